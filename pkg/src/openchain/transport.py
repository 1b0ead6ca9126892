"""Currents, occupations and conductances of boundary-driven chains.

Two families of formulas are implemented side by side and cross-tested:

* the generic Lindblad transport formula, which expresses the through
  current J and the dissipative current J_D entirely through the Keldysh
  Green function and the injection/extraction rates, and stays valid with
  bulk losses or gains;
* the non-interacting reductions (Landauer-type transmission integrals,
  the Meir-Wingreen expression evaluated on non-interacting Green
  functions, and the dissipative-chain closed forms), each computed
  independently rather than derived from one another.

Edge couplings are diagonal with a single nonzero entry, so every trace is
evaluated from the first/last row of G^R instead of full matrix products.
When an energy integral fails to converge, the raised
:class:`~openchain.quadrature.NonConvergence` carries the fully assembled
best-estimate observable, so callers can report partial results.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import greens, quadrature
from .model import (
    BulkKind,
    ChainModel,
    FermionicDrive,
    FermionicReservoir,
    LindbladDrive,
    LindbladReservoir,
    ModelError,
    QuadratureSpec,
)
from .quadrature import IntegrandProfile, NonConvergence

__all__ = [
    "CurrentResult",
    "CouplingMatrices",
    "fermi",
    "map_fermionic_to_lindblad",
    "occupation_lindblad",
    "occupation_fermionic",
    "transmission",
    "current_lindblad_generic",
    "current_meir_wingreen",
    "current_free_fermionic",
    "current_free_lindblad",
    "current_dissipative_chain",
    "conductance_high_temperature",
    "conductance_finite_temperature",
    "bounding_current",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CurrentResult:
    """Edge currents of a steady state.

    ``j_left`` leaves the left reservoir, ``j_right`` enters the right one;
    the through and dissipative currents are exact linear combinations.
    """

    j_left: float
    j_right: float

    @property
    def j_through(self) -> float:
        return 0.5 * (self.j_left + self.j_right)

    @property
    def j_dissipative(self) -> float:
        return self.j_left - self.j_right

    @classmethod
    def from_through_dissipative(cls, j, j_d) -> "CurrentResult":
        return cls(j_left=j + 0.5 * j_d, j_right=j - 0.5 * j_d)


@dataclass(frozen=True)
class CouplingMatrices:
    """Edge coupling matrices: gamma_r has a single 2 at the attached site,
    big_gamma_r = Delta_r * gamma_r. Mostly useful for tests; production
    code contracts the single nonzero entry directly."""

    gamma_l: np.ndarray
    gamma_r: np.ndarray
    big_gamma_l: np.ndarray
    big_gamma_r: np.ndarray

    @classmethod
    def build(cls, n_sites: int, widths) -> "CouplingMatrices":
        gl = np.zeros((n_sites, n_sites))
        gr = np.zeros((n_sites, n_sites))
        gl[0, 0] = 2.0
        gr[-1, -1] = 2.0
        return cls(gamma_l=gl, gamma_r=gr,
                   big_gamma_l=widths[0] * gl, big_gamma_r=widths[1] * gr)


def fermi(eps, res: FermionicReservoir) -> float:
    """Fermi-Dirac occupation of the reservoir at energy ``eps``.

    Temperature 0 gives the sharp step with f(mu) = 1/2.
    """
    if res.temperature == 0:
        if eps < res.mu:
            return 1.0
        return 0.5 if eps == res.mu else 0.0
    x = (eps - res.mu) / res.temperature
    if x > 60.0:
        return 0.0
    if x < -60.0:
        return 1.0
    return 1.0 / (1.0 + math.exp(x))


def map_fermionic_to_lindblad(res: FermionicReservoir) -> LindbladReservoir:
    """Effective Lindblad rates of a fermionic bath in the high-(mu, T) limit.

    alpha = Delta (1 + tanh(mu/2T)) / 2 and beta = Delta - alpha, so the
    width alpha + beta equals Delta exactly. At T = 0 the tanh saturates to
    sign(mu).
    """
    if res.temperature == 0:
        t = 0.0 if res.mu == 0 else math.copysign(1.0, res.mu)
    else:
        t = math.tanh(res.mu / (2.0 * res.temperature))
    alpha = 0.5 * res.delta * (1.0 + t)
    return LindbladReservoir(alpha=alpha, beta=res.delta - alpha)


def occupation_lindblad(res: LindbladReservoir) -> float:
    """Stationary occupation of a site held by a single Lindblad reservoir:
    alpha / (alpha + beta), independent of the level energy."""
    return res.alpha / (res.alpha + res.beta)


def _assembled(run, assemble):
    # re-raise quadrature failures with the assembled best estimate attached
    try:
        val, _ = run()
    except NonConvergence as exc:
        raise NonConvergence(str(exc), estimate=assemble(exc.estimate),
                             error_bound=exc.error_bound) from exc
    return assemble(val)


def occupation_fermionic(res: FermionicReservoir, eps0=0.0,
                         quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Stationary occupation of a single level hybridized with one bath.

    Lorentzian-weighted average of the bath occupation; tends to the bare
    Fermi-Dirac value as Delta -> 0 and to alpha/(alpha+beta) of the mapped
    Lindblad reservoir when mu and T dominate every other scale.
    """
    d = res.delta

    def integrand(e):
        return 2.0 * fermi(e, res) * d / ((e - eps0) ** 2 + d * d)

    return _assembled(
        lambda: quadrature.integrate_unbounded(integrand, quad, center=eps0,
                                               scale=d, breakpoints=(res.mu,)),
        lambda v: v / _TWO_PI)


def _require_lindblad(drive) -> LindbladDrive:
    if not isinstance(drive, LindbladDrive):
        raise ModelError("this formula requires a Lindblad drive")
    return drive


def _require_fermionic(drive) -> FermionicDrive:
    if not isinstance(drive, FermionicDrive):
        raise ModelError("this formula requires a fermionic drive")
    return drive


def _require_conserving(model: ChainModel) -> None:
    if model.bulk_rate != 0:
        raise ModelError("bulk dissipation is supported with Lindblad "
                         "boundaries and the generic/dissipative formulas only")


def _band_profile(model: ChainModel, extra_width, quad) -> IntegrandProfile:
    """Tangent-map profile aimed at the broadened band of the chain."""
    onsite = model.onsite
    center = 0.5 * (max(onsite) + min(onsite))
    scale = (2.0 * abs(model.hopping) + extra_width + 2.0 * model.bulk_rate
             + 0.5 * (max(onsite) - min(onsite)))
    return IntegrandProfile.unbounded(center=center, scale=scale, spec=quad)


def transmission(model: ChainModel, widths, eps) -> float:
    """Transmission probability 4 Delta_L Delta_R |G^R_{1,N}(eps)|^2."""
    row, _ = greens.retarded_rows(model, widths, eps)
    return 4.0 * widths[0] * widths[1] * float(np.abs(row[-1]) ** 2)


def current_lindblad_generic(model: ChainModel, drive,
                             quad: QuadratureSpec = QuadratureSpec()) -> CurrentResult:
    """Through and dissipative currents of a Lindblad-driven chain.

    The drive enters only through the Keldysh Green function: with
    w_r = alpha_r + beta_r,

        J   = [ (alpha_L - beta_L - alpha_R + beta_R)
                + (i/2) int deps/2pi Tr{(w_L gamma_L - w_R gamma_R) G^K} ] / 2
        J_D = (alpha_L - beta_L) + (alpha_R - beta_R)
                + (i/2) int deps/2pi Tr{(w_L gamma_L + w_R gamma_R) G^K}

    The boundary constant in J_D restores particle conservation for
    arbitrary rate tuples; it cancels only for an antisymmetric bias.
    Valid for any bulk loss/gain rate.
    """
    drive = _require_lindblad(drive)
    w_l, w_r = drive.left.width, drive.right.width
    k_src = greens.keldysh_source_diagonal(model, drive)

    def integrand(e):
        row1, row_n = greens.retarded_rows(model, (w_l, w_r), e)
        gk_11 = -np.sum(k_src * np.abs(row1) ** 2)
        gk_nn = -np.sum(k_src * np.abs(row_n) ** 2)
        return np.array([(1j * (w_l * gk_11 - w_r * gk_nn)).real,
                         (1j * (w_l * gk_11 + w_r * gk_nn)).real])

    def assemble(vals):
        vals = np.asarray(vals) / _TWO_PI
        j = 0.5 * ((drive.left.bias - drive.right.bias) + vals[0])
        j_d = (drive.left.bias + drive.right.bias) + vals[1]
        return CurrentResult.from_through_dissipative(j, j_d)

    profile = _band_profile(model, w_l + w_r, quad)
    return _assembled(lambda: quadrature.integrate_vector(integrand, profile),
                      assemble)


def current_free_lindblad(model: ChainModel, drive,
                          quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Lindblad current of a conserving chain from the transmission alone:

        J = (alpha_L beta_R - beta_L alpha_R) int deps/2pi 4 |G^R_{1,N}|^2

    with edge widths alpha_r + beta_r. Linear in the rate bias by
    construction, since G^R knows only the widths.
    """
    drive = _require_lindblad(drive)
    _require_conserving(model)
    w_l, w_r = drive.left.width, drive.right.width
    bias = drive.left.alpha * drive.right.beta - drive.left.beta * drive.right.alpha

    def integrand(e):
        row, _ = greens.retarded_rows(model, (w_l, w_r), e)
        return 4.0 * float(np.abs(row[-1]) ** 2)

    profile = _band_profile(model, w_l + w_r, quad)
    return _assembled(
        lambda: quadrature.integrate_unbounded(integrand, quad,
                                               center=profile.center,
                                               scale=profile.scale),
        lambda v: bias * v / _TWO_PI)


def _fermi_profile(model: ChainModel, drive: FermionicDrive, quad) -> IntegrandProfile:
    t = max(drive.left.temperature, drive.right.temperature)
    return IntegrandProfile.fermi_window(drive.left.mu, drive.right.mu, t,
                                         hopping=model.hopping, spec=quad)


def current_free_fermionic(model: ChainModel, drive,
                           quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Landauer current between two fermionic baths:

        J = int deps/2pi [f_L - f_R] * 4 Delta_L Delta_R |G^R_{1,N}|^2.
    """
    drive = _require_fermionic(drive)
    _require_conserving(model)
    d_l, d_r = drive.left.delta, drive.right.delta

    def integrand(e):
        row, _ = greens.retarded_rows(model, (d_l, d_r), e)
        return ((fermi(e, drive.left) - fermi(e, drive.right))
                * 4.0 * d_l * d_r * float(np.abs(row[-1]) ** 2))

    return _assembled(
        lambda: quadrature.integrate(integrand, _fermi_profile(model, drive, quad)),
        lambda v: v / _TWO_PI)


def current_meir_wingreen(model: ChainModel, drive,
                          quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Meir-Wingreen current evaluated on non-interacting Green functions.

        J = (i/2) int deps/2pi Tr{ [(f_L - 1/2) Gamma_L - (f_R - 1/2) Gamma_R]
                                   (G^R - G^A) + (Gamma_L - Gamma_R) G^K / 2 }

    The Keldysh matrix is eliminated through the non-interacting identity
    (G^A - G^R + G^K)/2 = i f_L G^R Gamma_L G^A + i f_R G^R Gamma_R G^A, so
    only G^R enters numerically. Agrees with the Landauer expression.
    """
    drive = _require_fermionic(drive)
    _require_conserving(model)
    d_l, d_r = drive.left.delta, drive.right.delta

    def integrand(e):
        row1, row_n = greens.retarded_rows(model, (d_l, d_r), e)
        g_11, g_1n, g_nn = row1[0], row1[-1], row_n[-1]
        f_l, f_r = fermi(e, drive.left), fermi(e, drive.right)
        spec_11 = 2j * g_11.imag     # (G^R - G^A)_{11}
        spec_nn = 2j * g_nn.imag
        gk_11 = spec_11 + 2j * (2.0 * d_l * f_l * abs(g_11) ** 2
                                + 2.0 * d_r * f_r * abs(g_1n) ** 2)
        gk_nn = spec_nn + 2j * (2.0 * d_l * f_l * abs(g_1n) ** 2
                                + 2.0 * d_r * f_r * abs(g_nn) ** 2)
        tr = ((f_l - 0.5) * 2.0 * d_l * spec_11
              - (f_r - 0.5) * 2.0 * d_r * spec_nn
              + 0.5 * (2.0 * d_l * gk_11 - 2.0 * d_r * gk_nn))
        return (0.5j * tr).real

    return _assembled(
        lambda: quadrature.integrate(integrand, _fermi_profile(model, drive, quad)),
        lambda v: v / _TWO_PI)


def current_dissipative_chain(model: ChainModel, drive,
                              quad: QuadratureSpec = QuadratureSpec()) -> CurrentResult:
    """Closed-form currents of a uniform chain with bulk loss or gain.

    Requires equal edge widths Delta = alpha_r + beta_r and an antisymmetric
    bias alpha_L - beta_L = -(alpha_R - beta_R) = dmu on a uniform chain;
    then, with G^R evaluated at eps + i nu,

        J   = dmu [ 1 + 2 Delta int deps/2pi ( |G^R_{1,N}|^2 - |G^R_{1,1}|^2 ) ]
        J_D = +- 4 Delta nu int deps/2pi sum_j |G^R_{1,j}|^2   (+ loss, - gain).

    J is blind to the loss/gain distinction; J_D flips sign. Outside the
    preconditions the generic formula is used instead (with a warning).
    """
    drive = _require_lindblad(drive)
    w_l, w_r = drive.left.width, drive.right.width
    symmetric = (w_l == w_r and drive.left.bias == -drive.right.bias
                 and model.is_uniform)
    if not symmetric:
        warnings.warn("dissipative closed form needs a uniform chain, equal "
                      "widths and antisymmetric bias; falling back to the "
                      "generic formula", stacklevel=2)
        return current_lindblad_generic(model, drive, quad)
    delta = w_l
    dmu = drive.left.bias
    sign = {BulkKind.LOSS: 1.0, BulkKind.GAIN: -1.0, BulkKind.NONE: 0.0}[model.bulk_kind]

    def integrand(e):
        row, _ = greens.retarded_rows(model, (delta, delta), e)
        r2 = np.abs(row) ** 2
        return np.array([r2[-1] - r2[0], float(r2.sum())])

    def assemble(vals):
        vals = np.asarray(vals) / _TWO_PI
        j = dmu * (1.0 + 2.0 * delta * vals[0])
        j_d = sign * 4.0 * delta * model.bulk_rate * vals[1]
        return CurrentResult.from_through_dissipative(j, j_d)

    profile = _band_profile(model, 2.0 * delta, quad)
    return _assembled(lambda: quadrature.integrate_vector(integrand, profile),
                      assemble)


def conductance_high_temperature(model: ChainModel, delta, temperature,
                                 quad: QuadratureSpec = QuadratureSpec()) -> float:
    """High-temperature linear conductance with symmetric edge widths:

        g = (1 / 4T) int deps/2pi Tr[Gamma_R G^R Gamma_L G^A],

    so T*g is temperature independent and proportional to the energy-
    integrated transmission.
    """
    _require_conserving(model)
    if temperature <= 0:
        raise ModelError("high-temperature conductance needs T > 0")

    def integrand(e):
        return transmission(model, (delta, delta), e)

    profile = _band_profile(model, 2.0 * delta, quad)
    return _assembled(
        lambda: quadrature.integrate_unbounded(integrand, quad,
                                               center=profile.center,
                                               scale=profile.scale),
        lambda v: v / _TWO_PI / (4.0 * temperature))


def conductance_finite_temperature(model: ChainModel, drive,
                                   quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Thermally smeared transmission at a common chemical potential:

        g(T) = int deps/2pi (-df/deps) 4 Delta_L Delta_R |G^R_{1,N}|^2,

    reducing to the bare transmission probability at T = 0 (even/odd
    resonance structure survives) and approaching the high-temperature law
    once the smearing exceeds the band.
    """
    drive = _require_fermionic(drive)
    _require_conserving(model)
    if drive.left.mu != drive.right.mu:
        raise ModelError("finite-T conductance is defined at equal chemical potentials")
    if drive.left.temperature != drive.right.temperature:
        raise ModelError("finite-T conductance is defined at a common temperature")
    mu, t = drive.left.mu, drive.left.temperature
    d_l, d_r = drive.left.delta, drive.right.delta
    if t == 0:
        return transmission(model, (d_l, d_r), mu)

    def minus_df(e):
        x = (e - mu) / (2.0 * t)
        if abs(x) > 300.0:
            return 0.0
        c = math.cosh(x)
        return 1.0 / (4.0 * t * c * c)

    def integrand(e):
        return minus_df(e) * transmission(model, (d_l, d_r), e)

    return _assembled(
        lambda: quadrature.integrate(integrand, _fermi_profile(model, drive, quad)),
        lambda v: v / _TWO_PI)


def bounding_current(drive, exponent,
                     quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Band-angle bounding integral for the long-chain Landauer current:

        J_a = int_{-pi/2}^{pi/2} dth/pi [f_L(2 sin th) - f_R(2 sin th)] cos^a th.

    For unit edge widths the exact current satisfies J_3 < J < J_1 up to
    exponentially small finite-size corrections.
    """
    drive = _require_fermionic(drive)

    def integrand(theta):
        e = 2.0 * math.sin(theta)
        return ((fermi(e, drive.left) - fermi(e, drive.right))
                * math.cos(theta) ** exponent)

    profile = IntegrandProfile(kind="band", window=(-math.pi / 2.0, math.pi / 2.0),
                               spec=quad)
    return _assembled(lambda: quadrature.integrate(integrand, profile),
                      lambda v: v / math.pi)
