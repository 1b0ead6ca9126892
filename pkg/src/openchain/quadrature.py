"""Adaptive quadrature over energy for all transport integrals.

Finite windows go straight to an adaptive Gauss-Kronrod rule (QUADPACK via
scipy); unbounded integrals are compactified first with a tangent map
``eps = center + scale * tan(u)`` whose center/scale can be aimed at the
resonance structure of the integrand, and then integrated adaptively on
``(-pi/2, pi/2)``. Known discontinuities (Fermi steps, band edges) are
passed down as panel boundaries. The ``1/2pi`` normalization of energy
integrals is applied by callers, never here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy import integrate as _si

from .model import QuadratureSpec

__all__ = [
    "NonConvergence",
    "IntegrandProfile",
    "integrate",
    "integrate_unbounded",
    "integrate_vector",
]

_HALF_PI = math.pi / 2.0


class NonConvergence(RuntimeError):
    """Quadrature failed to meet tolerance within the subdivision budget.

    Carries the best available ``estimate`` and its ``error_bound``.
    """

    def __init__(self, message, estimate, error_bound):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


@dataclass(frozen=True)
class IntegrandProfile:
    """Where an integrand lives on the energy axis, plus tolerances.

    ``kind`` is one of ``"band"`` (finite window around the single-particle
    band), ``"fermi-window"`` (finite window set by chemical potentials and
    temperature) or ``"unbounded"`` (full line through the tangent map).
    """

    kind: str = "unbounded"
    window: tuple[float, float] | None = None
    breakpoints: tuple[float, ...] = ()
    center: float = 0.0
    scale: float = 1.0
    spec: QuadratureSpec = field(default_factory=QuadratureSpec)

    @classmethod
    def band(cls, hopping=1.0, broadening=0.0, spec=QuadratureSpec(), breakpoints=()):
        """Finite window [-2|J| - 10*b, 2|J| + 10*b]; b is the total level broadening."""
        half = 2.0 * abs(hopping) + 10.0 * broadening
        return cls(kind="band", window=(-half, half), breakpoints=tuple(breakpoints),
                   spec=spec)

    @classmethod
    def fermi_window(cls, mu_l, mu_r, temperature, hopping=1.0, spec=QuadratureSpec()):
        """Window covering both Fermi edges; beyond 40 T the occupation
        difference underflows in double precision. Chemical potentials and
        band edges become panel boundaries (exact at temperature 0)."""
        if temperature < 0:
            raise ValueError("temperature must be >= 0")
        lo = min(mu_l, mu_r) - 40.0 * temperature - 2.0 * abs(hopping)
        hi = max(mu_l, mu_r) + 40.0 * temperature + 2.0 * abs(hopping)
        pts = {mu_l, mu_r, -2.0 * abs(hopping), 2.0 * abs(hopping)}
        return cls(kind="fermi-window", window=(lo, hi),
                   breakpoints=tuple(sorted(pts)), spec=spec)

    @classmethod
    def unbounded(cls, center=0.0, scale=1.0, breakpoints=(), spec=QuadratureSpec()):
        if scale <= 0:
            raise ValueError("tangent-map scale must be > 0")
        return cls(kind="unbounded", center=center, scale=scale,
                   breakpoints=tuple(breakpoints), spec=spec)


def _interior(points, a, b):
    pts = sorted(p for p in points if a < p < b)
    return pts or None


def _quad_finite(f, a, b, breakpoints, spec):
    out = _si.quad(f, a, b, points=_interior(breakpoints, a, b),
                   epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                   limit=spec.max_subdivisions, full_output=1)
    if len(out) > 3:  # quadpack appended a warning message: tolerance not met
        raise NonConvergence(out[3], estimate=out[0], error_bound=out[1])
    return out[0], out[1]


def _tan_transform(f, center, scale):
    def g(u):
        c = math.cos(u)
        return f(center + scale * math.tan(u)) * scale / (c * c)
    return g


def integrate(f, profile: IntegrandProfile):
    """Integrate ``f`` over the domain described by ``profile``.

    Returns ``(value, error_estimate)`` with the estimated absolute error
    bounded by ``max(abs_tol, rel_tol * |value|)``; raises
    :class:`NonConvergence` otherwise.
    """
    spec = profile.spec
    if spec.window is not None:
        a, b = spec.window
        return _quad_finite(f, a, b, profile.breakpoints, spec)
    if profile.kind == "unbounded":
        return integrate_unbounded(f, spec, center=profile.center,
                                   scale=profile.scale,
                                   breakpoints=profile.breakpoints)
    a, b = profile.window
    return _quad_finite(f, a, b, profile.breakpoints, spec)


def integrate_unbounded(f, spec=QuadratureSpec(), *, center=0.0, scale=1.0,
                        breakpoints=()):
    """Integrate ``f`` over the whole real line via the tangent map.

    ``center``/``scale`` should point at the dominant structure of the
    integrand (a resonance position and width, or the band); ``f`` must decay
    at least as 1/eps^2. Returns ``(value, error_estimate)``.
    """
    g = _tan_transform(f, center, scale)
    pts = [math.atan((p - center) / scale) for p in breakpoints]
    return _quad_finite(g, -_HALF_PI, _HALF_PI, pts, spec)


def integrate_vector(f, profile: IntegrandProfile):
    """Like :func:`integrate` for array-valued ``f``, sharing quadrature nodes.

    All components are refined together, so a single pass serves several
    integrands of one Green-function evaluation. Returns ``(values, error)``.
    """
    spec = profile.spec
    if spec.window is not None or profile.kind != "unbounded":
        a, b = spec.window if spec.window is not None else profile.window
        g, pts = f, _interior(profile.breakpoints, a, b)
    else:
        a, b = -_HALF_PI, _HALF_PI
        c, s = profile.center, profile.scale
        def g(u, _f=f):
            cu = math.cos(u)
            return _f(c + s * math.tan(u)) * (s / (cu * cu))
        pts = _interior((math.atan((p - c) / s) for p in profile.breakpoints), a, b)
    res, err, info = _si.quad_vec(g, a, b, points=pts,
                                  epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                                  limit=spec.max_subdivisions, full_output=True)
    if not info.success:
        raise NonConvergence("vector quadrature did not converge",
                             estimate=res, error_bound=err)
    return res, err
