"""Retarded, advanced and Keldysh Green-function matrices of driven chains.

The retarded matrix is the inverse of a tridiagonal matrix: diagonal
``eps - eps_j + i nu`` (plus ``i Delta_L`` / ``i Delta_R`` on the first/last
entry), constant off-diagonal ``+J``. The advanced matrix is its conjugate
transpose. For uniform chains with equal edge widths and |J| = 1 the inverse
is available in closed form through the three-term recursion

    B_k = eps_tilde * B_{k-1} - B_{k-2},   B_0 = 1,  B_1 = eps_tilde + i*width,

with ``eps_tilde = eps + i*nu``; the recursion tracks the growing solution,
so it is run forward with on-the-fly rescaling to survive large N and large
|eps| without overflow. Band edges (eps_tilde^2 = 4) are regular points of
the recursion, no special casing needed.

The Keldysh matrix of a Lindblad-driven chain is assembled from the retarded
one as ``G^K = -G^R K G^A`` where ``K`` is the diagonal drive/dissipation
source: ``-2i(alpha_r - beta_r)`` at the attached sites, ``+2i nu`` (loss)
or ``-2i nu`` (gain) everywhere the bulk dissipator acts. Losses and gains
enter the retarded matrix identically; only ``K`` tells them apart.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import BulkKind, ChainModel, FermionicDrive, LindbladDrive, ModelError

__all__ = [
    "OnShellSingularityError",
    "GreenSet",
    "ClosedFormParams",
    "retarded_single_site",
    "retarded_chain_dense",
    "closed_form_chain_gf",
    "closed_form_first_row",
    "closed_form_corner",
    "supports_closed_form",
    "retarded_rows",
    "keldysh_source_diagonal",
    "keldysh_from_rak",
    "green_set",
    "edge_widths",
]

# rescale thresholds for the B recursion; anything within is safe in double
_BIG = 1e100
_TINY = 1e-100


class OnShellSingularityError(ArithmeticError):
    """Inverse requested exactly on a real eigenvalue of an undamped chain."""


@dataclass(frozen=True)
class GreenSet:
    """The three N x N Green matrices of one model at one energy."""

    energy: float
    g_r: np.ndarray
    g_a: np.ndarray
    g_k: np.ndarray


@dataclass(frozen=True)
class ClosedFormParams:
    """Inputs of the closed-form inverse: uniform chain, equal edge widths.

    The underlying hopping is +1; models with |J| = 1 differ at most by a
    sign gauge that drops out of every |G_ij|^2.
    """

    energy: float
    width: float
    bulk: float = 0.0
    n_sites: int = 2

    def __post_init__(self):
        if self.n_sites < 2:
            raise ModelError("closed form needs n_sites >= 2; use retarded_single_site")
        if self.width < 0 or self.bulk < 0:
            raise ModelError("width and bulk rate must be >= 0")

    @property
    def eps_tilde(self) -> complex:
        return self.energy + 1j * self.bulk

    def roots(self) -> tuple[complex, complex]:
        """Characteristic roots r+- with r+ r- = 1, r+ + r- = eps_tilde, |r-| <= |r+|."""
        et = self.eps_tilde
        rt = cmath.sqrt(et * et - 4.0)
        r_plus, r_minus = (et + rt) / 2.0, (et - rt) / 2.0
        if abs(r_minus) > abs(r_plus):
            r_plus, r_minus = r_minus, r_plus
        return r_plus, r_minus


def retarded_single_site(eps, eps0, width_total) -> complex:
    """Breit-Wigner retarded function 1 / (eps - eps0 + i*width_total).

    ``width_total`` is the sum of all level widths acting on the site; the
    advanced function is the complex conjugate.
    """
    if width_total <= 0:
        raise ModelError("total width must be > 0 for a single driven site")
    return 1.0 / (eps - eps0 + 1j * width_total)


def retarded_chain_dense(model: ChainModel, widths, eps) -> np.ndarray:
    """Retarded matrix by dense inversion of the tridiagonal inverse.

    ``widths`` is the pair (Delta_L, Delta_R) of edge broadenings; bulk
    dissipation enters as ``+ i nu`` on every diagonal entry regardless of
    whether it is a loss or a gain.
    """
    n = model.n_sites
    w_l, w_r = widths
    a = np.zeros((n, n), dtype=complex)
    diag = eps - np.asarray(model.onsite, dtype=float) + 1j * model.bulk_rate
    a[np.arange(n), np.arange(n)] = diag
    a[0, 0] += 1j * w_l
    a[-1, -1] += 1j * w_r
    if n > 1:
        idx = np.arange(n - 1)
        a[idx, idx + 1] = model.hopping
        a[idx + 1, idx] = model.hopping
    try:
        return np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise OnShellSingularityError(
            "on-shell singularity: undamped chain inverted at an eigenvalue"
        ) from exc


def _b_scaled(eps_tilde: complex, width: float, n: int):
    """Rescaled recursion values (b_k, log-scale s_k) with B_k = b_k * exp(s_k)."""
    vals = [(1.0 + 0j, 0.0), (eps_tilde + 1j * width, 0.0)]
    b_prev2, s_prev2 = vals[0]
    b_prev, s_prev = vals[1]
    for _ in range(2, n + 1):
        b = eps_tilde * b_prev - b_prev2 * math.exp(s_prev2 - s_prev)
        s = s_prev
        m = abs(b)
        if m > _BIG or 0.0 < m < _TINY:
            b /= m
            s += math.log(m)
        vals.append((b, s))
        b_prev2, s_prev2 = b_prev, s_prev
        b_prev, s_prev = b, s
    return vals


def _denominator(params: ClosedFormParams, vals):
    et = params.eps_tilde
    b1, s1 = vals[params.n_sites - 1]
    b2, s2 = vals[params.n_sites - 2]
    return (et + 1j * params.width) * b1 - b2 * math.exp(s2 - s1), s1


def closed_form_chain_gf(params: ClosedFormParams, i: int, j: int) -> complex:
    """Closed-form retarded element G_{i,j} (1-based sites, uniform chain).

    Entries are symmetric in (i, j); the advanced element is the conjugate
    only when ``bulk == 0`` (otherwise build it from the ``-i nu`` branch,
    i.e. conjugate the full retarded matrix).
    """
    n = params.n_sites
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"sites must lie in 1..{n}")
    if i > j:
        i, j = j, i
    vals = _b_scaled(params.eps_tilde, params.width, n)
    den, s_den = _denominator(params, vals)
    b_i, s_i = vals[i - 1]
    b_j, s_j = vals[n - j]
    sign = -1.0 if (i + j) % 2 else 1.0  # (-J)^(i+j) at J = +1
    return sign * b_i * b_j / den * math.exp(s_i + s_j - s_den)


def closed_form_first_row(params: ClosedFormParams) -> np.ndarray:
    """All elements G_{1,j}, j = 1..N, from a single recursion pass.

    The last row follows by reflection: G_{N,j} = G_{1,N-j+1}.
    """
    n = params.n_sites
    vals = _b_scaled(params.eps_tilde, params.width, n)
    den, s_den = _denominator(params, vals)
    row = np.empty(n, dtype=complex)
    for j in range(1, n + 1):
        b_j, s_j = vals[n - j]
        sign = -1.0 if (1 + j) % 2 else 1.0
        row[j - 1] = sign * b_j / den * math.exp(s_j - s_den)
    return row


def closed_form_corner(params: ClosedFormParams) -> complex:
    """Transmission element G_{1,N} alone; the cheapest output of the
    recursion, used in the inner loop of the transmission integrals."""
    n = params.n_sites
    vals = _b_scaled(params.eps_tilde, params.width, n)
    den, s_den = _denominator(params, vals)
    sign = -1.0 if (1 + n) % 2 else 1.0
    return sign / den * math.exp(-s_den)


def supports_closed_form(model: ChainModel, widths) -> bool:
    """True when the closed-form inverse applies to this model/width pair."""
    w_l, w_r = widths
    return (model.n_sites >= 2 and model.is_uniform
            and abs(model.hopping) == 1.0 and w_l == w_r)


def retarded_rows(model: ChainModel, widths, eps):
    """First and last rows of G^R, via closed form when available.

    These two rows carry everything the transport formulas need (the edge
    couplings select them). Returns ``(row_first, row_last)``.
    """
    n = model.n_sites
    if n == 1:
        g = retarded_single_site(eps, model.onsite[0],
                                 widths[0] + widths[1] + model.bulk_rate)
        row = np.array([g])
        return row, row
    if supports_closed_form(model, widths):
        p = ClosedFormParams(energy=eps, width=widths[0], bulk=model.bulk_rate,
                             n_sites=n)
        row = closed_form_first_row(p)
        return row, row[::-1]
    g = retarded_chain_dense(model, widths, eps)
    return g[0, :], g[-1, :]


def edge_widths(drive) -> tuple[float, float]:
    """Level broadenings (Delta_L, Delta_R) a drive imprints on the chain edges."""
    if isinstance(drive, LindbladDrive):
        return drive.left.width, drive.right.width
    if isinstance(drive, FermionicDrive):
        return drive.left.delta, drive.right.delta
    raise ModelError(f"unsupported drive type {type(drive).__name__}")


def keldysh_source_diagonal(model: ChainModel, drive: LindbladDrive) -> np.ndarray:
    """Diagonal Keldysh source K with G^K = -G^R K G^A.

    Boundary reservoirs contribute ``-2i (alpha_r - beta_r)`` at their site;
    bulk loss adds ``+2i nu`` on every site, bulk gain ``-2i nu``. This is
    the only place losses and gains differ.
    """
    if not isinstance(drive, LindbladDrive):
        raise ModelError("Keldysh source is defined for Lindblad drives only")
    n = model.n_sites
    k = np.zeros(n, dtype=complex)
    if model.bulk_kind is BulkKind.LOSS:
        k += 2j * model.bulk_rate
    elif model.bulk_kind is BulkKind.GAIN:
        k -= 2j * model.bulk_rate
    k[0] += -2j * drive.left.bias
    k[-1] += -2j * drive.right.bias
    return k


def keldysh_from_rak(g_r: np.ndarray, drive: LindbladDrive, model: ChainModel) -> np.ndarray:
    """Keldysh matrix G^K = -G^R K G^A from the retarded one.

    ``g_r`` must belong to the same (model, drive); the result is
    anti-Hermitian by construction.
    """
    k = keldysh_source_diagonal(model, drive)
    return -(g_r * k[np.newaxis, :]) @ g_r.conj().T


def green_set(model: ChainModel, drive: LindbladDrive, eps) -> GreenSet:
    """All three Green matrices of a Lindblad-driven chain at one energy."""
    g_r = retarded_chain_dense(model, edge_widths(drive), eps)
    g_a = g_r.conj().T
    g_k = keldysh_from_rak(g_r, drive, model)
    return GreenSet(energy=float(eps), g_r=g_r, g_a=g_a, g_k=g_k)
