"""Domain types shared by all transport calculations.

Conventions: hbar = e = k_B = 1. All rates and energies are quoted in units
of the hopping amplitude |J| (default |J| = 1). Values are immutable after
construction; invalid field combinations fail at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Union


class ModelError(ValueError):
    """Raised when a domain value violates its invariants."""


class BulkKind(str, Enum):
    """Kind of on-site dissipation acting along the whole chain."""

    NONE = "none"
    LOSS = "loss"
    GAIN = "gain"


def lindblad_reservoir_errors(alpha, beta) -> tuple[str, ...]:
    """Invariant violations for a Lindblad reservoir, as human-readable strings."""
    errs = []
    if alpha < 0:
        errs.append(f"injection rate alpha must be >= 0, got {alpha}")
    if beta < 0:
        errs.append(f"extraction rate beta must be >= 0, got {beta}")
    if alpha + beta <= 0:
        errs.append("zero hybridization: alpha + beta must be > 0")
    return tuple(errs)


def fermionic_reservoir_errors(delta, mu, temperature) -> tuple[str, ...]:
    errs = []
    if delta <= 0:
        errs.append(f"hybridization delta must be > 0, got {delta}")
    if temperature < 0:
        errs.append(f"temperature must be >= 0, got {temperature}")
    return tuple(errs)


def chain_errors(n_sites, hopping, onsite, bulk_rate, bulk_kind) -> tuple[str, ...]:
    errs = []
    if int(n_sites) < 1:
        errs.append(f"n_sites must be >= 1, got {n_sites}")
    if hopping == 0:
        errs.append("hopping must be nonzero")
    if onsite is not None and len(onsite) != n_sites:
        errs.append(f"onsite must have exactly n_sites={n_sites} entries, got {len(onsite)}")
    if bulk_rate < 0:
        errs.append(f"bulk_rate must be >= 0, got {bulk_rate}")
    if bulk_kind == BulkKind.NONE and bulk_rate != 0:
        errs.append("inconsistent bulk dissipation: bulk_kind=none requires bulk_rate=0")
    return tuple(errs)


def quadrature_spec_errors(rel_tol, abs_tol, max_subdivisions) -> tuple[str, ...]:
    errs = []
    if rel_tol <= 0:
        errs.append(f"rel_tol must be > 0, got {rel_tol}")
    if abs_tol <= 0:
        errs.append(f"abs_tol must be > 0, got {abs_tol}")
    if max_subdivisions < 1:
        errs.append(f"max_subdivisions must be >= 1, got {max_subdivisions}")
    return tuple(errs)


def _raise_if(errs: tuple[str, ...]) -> None:
    if errs:
        raise ModelError("; ".join(errs))


@dataclass(frozen=True)
class LindbladReservoir:
    """Markovian boundary reservoir injecting at rate ``alpha``, extracting at ``beta``.

    ``alpha + beta`` plays the role of a level width, ``alpha - beta`` of a bias.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        _raise_if(lindblad_reservoir_errors(self.alpha, self.beta))

    @property
    def width(self) -> float:
        """Effective hybridization width alpha + beta."""
        return self.alpha + self.beta

    @property
    def bias(self) -> float:
        """Injection/extraction imbalance alpha - beta."""
        return self.alpha - self.beta


@dataclass(frozen=True)
class FermionicReservoir:
    """Equilibrium fermionic bath of hybridization ``delta`` at (``mu``, ``temperature``).

    The microscopic tunnelling amplitude and bath density of states are
    absorbed into ``delta``; temperature 0 is allowed (sharp Fermi step).
    """

    delta: float
    mu: float
    temperature: float

    def __post_init__(self):
        _raise_if(fermionic_reservoir_errors(self.delta, self.mu, self.temperature))


@dataclass(frozen=True)
class ChainModel:
    """Open tight-binding chain: N sites, uniform hopping, optional bulk dissipation."""

    n_sites: int
    hopping: float = 1.0
    onsite: tuple[float, ...] | None = None
    bulk_rate: float = 0.0
    bulk_kind: BulkKind = BulkKind.NONE

    def __post_init__(self):
        object.__setattr__(self, "bulk_kind", BulkKind(self.bulk_kind))
        if self.onsite is None:
            object.__setattr__(self, "onsite", (0.0,) * int(self.n_sites))
        else:
            object.__setattr__(self, "onsite", tuple(float(x) for x in self.onsite))
        _raise_if(chain_errors(self.n_sites, self.hopping, self.onsite,
                               self.bulk_rate, self.bulk_kind))

    @property
    def is_uniform(self) -> bool:
        """True when all onsite energies vanish (required by closed-form paths)."""
        return all(e == 0.0 for e in self.onsite)


@dataclass(frozen=True)
class LindbladDrive:
    """Pair of Lindblad reservoirs attached to the first and last site."""

    left: LindbladReservoir
    right: LindbladReservoir


@dataclass(frozen=True)
class FermionicDrive:
    """Pair of fermionic baths attached to the first and last site."""

    left: FermionicReservoir
    right: FermionicReservoir


#: A computation never mixes reservoir kinds; converting a fermionic bath to an
#: effective Lindblad reservoir is an explicit operation in ``transport``.
Drive = Union[LindbladDrive, FermionicDrive]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget for the adaptive energy integrals."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000
    window: tuple[float, float] | None = None

    def __post_init__(self):
        _raise_if(quadrature_spec_errors(self.rel_tol, self.abs_tol, self.max_subdivisions))
        if self.window is not None:
            object.__setattr__(self, "window", (float(self.window[0]), float(self.window[1])))


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate`: all violated invariants, or none."""

    errors: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(f"invalid: {e}" for e in self.errors)


def _get(obj, name, default=None):
    if isinstance(obj, Mapping):
        return obj.get(name, default)
    return getattr(obj, name, default)


def validate(model, drive=None) -> ValidationReport:
    """Check every invariant of a model/drive pair, collecting all violations.

    Accepts constructed values or plain mappings with the same field names,
    so raw configuration can be checked before construction. Never raises.
    """
    errs: list[str] = []
    if model is not None:
        n = _get(model, "n_sites", 1)
        errs.extend(chain_errors(
            n,
            _get(model, "hopping", 1.0),
            _get(model, "onsite") or (0.0,) * int(n),
            _get(model, "bulk_rate", 0.0),
            BulkKind(_get(model, "bulk_kind", BulkKind.NONE)),
        ))
    if drive is not None:
        for side in ("left", "right"):
            res = _get(drive, side)
            if res is None:
                errs.append(f"drive is missing the {side} reservoir")
                continue
            if _get(res, "delta") is not None:
                errs.extend(f"{side}: {e}" for e in fermionic_reservoir_errors(
                    _get(res, "delta"), _get(res, "mu", 0.0), _get(res, "temperature", 0.0)))
            else:
                errs.extend(f"{side}: {e}" for e in lindblad_reservoir_errors(
                    _get(res, "alpha", 0.0), _get(res, "beta", 0.0)))
    return ValidationReport(tuple(errs))
