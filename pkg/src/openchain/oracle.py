"""Exact steady states of the full Lindblad master equation on small chains.

Ground truth for the Green-function transport formulas: the many-body
Liouvillian is assembled from Jordan-Wigner fermion operators (strings
included, so these are the genuine fermionic jump operators), vectorized
into a 4^N x 4^N matrix and diagonalized densely. Currents come from the
boundary rate equations

    J_L = 2 alpha_L (1 - n_L) - 2 beta_L n_L,
    J_R = -(2 alpha_R (1 - n_R) - 2 beta_R n_R),

whose factor 2 matches the jump operators sqrt(2 alpha) c^dag and
sqrt(2 beta) c; the single-site occupation alpha/(alpha+beta) pins this
convention. The total bulk dissipation rate is reported separately and
equals J_L - J_R at stationarity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BulkKind, ChainModel, LindbladDrive, ModelError
from .transport import CurrentResult

__all__ = [
    "MAX_SITES",
    "DegenerateSteadyStateError",
    "Superoperator",
    "SteadyState",
    "fermion_annihilators",
    "build_liouvillian",
    "steady_state",
]

#: Dense diagonalization of the 4^N Liouvillian stays cheap up to here.
MAX_SITES = 4


class DegenerateSteadyStateError(RuntimeError):
    """Null space of the Liouvillian has dimension > 1."""

    def __init__(self, eigenvalues, states):
        super().__init__(f"degenerate steady state: {len(eigenvalues)} null vectors")
        self.eigenvalues = eigenvalues
        self.states = states


@dataclass(frozen=True)
class Superoperator:
    """Vectorized Liouvillian rho -> -i[H, rho] + dissipators, C-ordered."""

    n_sites: int
    dim: int
    matrix: np.ndarray


@dataclass(frozen=True)
class SteadyState:
    """Stationary density matrix with the observables the formulas predict."""

    rho: np.ndarray
    occupations: tuple[float, ...]
    currents: CurrentResult
    bulk_dissipation: float
    residual: float


def fermion_annihilators(n_sites: int) -> list[np.ndarray]:
    """Jordan-Wigner annihilation operators c_1 .. c_N on the 2^N Fock space.

    Equivalent to the occupation-number-basis matrices with the usual
    (-1)^(sum of occupations to the left) fermionic signs.
    """
    lower = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    eye = np.eye(2, dtype=complex)
    ops = []
    for j in range(n_sites):
        m = np.ones((1, 1), dtype=complex)
        for k in range(n_sites):
            m = np.kron(m, z if k < j else (lower if k == j else eye))
        ops.append(m)
    return ops


def _vectorized(a_left, a_right):
    """Matrix of rho -> a_left @ rho @ a_right for C-ordered vec(rho)."""
    return np.kron(a_left, a_right.T)


def build_liouvillian(model: ChainModel, drive: LindbladDrive,
                      max_sites: int = MAX_SITES) -> Superoperator:
    """Assemble the vectorized Liouvillian of the driven chain.

    Boundary dissipators: alpha_r (2 c_r^dag rho c_r - {c_r c_r^dag, rho})
    and beta_r (2 c_r rho c_r^dag - {c_r^dag c_r, rho}). Bulk dissipators
    act on every site with rate nu, annihilating (loss) or creating (gain).
    """
    if not isinstance(drive, LindbladDrive):
        raise ModelError("the oracle solves Lindblad-driven chains only")
    n = model.n_sites
    if n > max_sites:
        raise ModelError(f"oracle limited to {max_sites} sites "
                         f"(4^N = {4 ** n} would be too large), got N = {n}")
    c = fermion_annihilators(n)
    dim = 2 ** n
    h = np.zeros((dim, dim), dtype=complex)
    for j in range(n - 1):
        h += model.hopping * (c[j].conj().T @ c[j + 1] + c[j + 1].conj().T @ c[j])
    for j in range(n):
        h += model.onsite[j] * (c[j].conj().T @ c[j])

    jumps = [
        np.sqrt(2.0 * drive.left.alpha) * c[0].conj().T,
        np.sqrt(2.0 * drive.left.beta) * c[0],
        np.sqrt(2.0 * drive.right.alpha) * c[-1].conj().T,
        np.sqrt(2.0 * drive.right.beta) * c[-1],
    ]
    if model.bulk_kind is BulkKind.LOSS:
        jumps += [np.sqrt(2.0 * model.bulk_rate) * c[j] for j in range(n)]
    elif model.bulk_kind is BulkKind.GAIN:
        jumps += [np.sqrt(2.0 * model.bulk_rate) * c[j].conj().T for j in range(n)]

    eye = np.eye(dim, dtype=complex)
    lio = -1j * (_vectorized(h, eye) - _vectorized(eye, h))
    for op in jumps:
        op_dag_op = op.conj().T @ op
        lio += (_vectorized(op, op.conj().T)
                - 0.5 * (_vectorized(op_dag_op, eye) + _vectorized(eye, op_dag_op)))
    return Superoperator(n_sites=n, dim=dim, matrix=lio)


def steady_state(sop: Superoperator, drive: LindbladDrive,
                 model: ChainModel, degeneracy_tol: float = 1e-10) -> SteadyState:
    """Stationary state from the null space of the Liouvillian.

    Dense eigendecomposition, smallest-|eigenvalue| vector, then hermitized
    and trace-normalized. Fails loudly (with all candidate states) if the
    null space is degenerate, which cannot happen while both edges keep
    alpha + beta > 0.
    """
    lam, vec = np.linalg.eig(sop.matrix)
    order = np.argsort(np.abs(lam))
    null = [k for k in order if abs(lam[k]) < degeneracy_tol]
    if len(null) > 1:
        states = [vec[:, k].reshape(sop.dim, sop.dim) for k in null]
        raise DegenerateSteadyStateError([lam[k] for k in null], states)
    k = order[0]
    rho = vec[:, k].reshape(sop.dim, sop.dim)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    residual = float(np.linalg.norm(sop.matrix @ rho.reshape(-1)))

    c = fermion_annihilators(sop.n_sites)
    occ = tuple(float(np.real(np.trace(rho @ (ci.conj().T @ ci)))) for ci in c)
    n_l, n_r = occ[0], occ[-1]
    j_left = 2.0 * drive.left.alpha * (1.0 - n_l) - 2.0 * drive.left.beta * n_l
    j_right = -(2.0 * drive.right.alpha * (1.0 - n_r) - 2.0 * drive.right.beta * n_r)
    if model.bulk_kind is BulkKind.LOSS:
        bulk = sum(2.0 * model.bulk_rate * nj for nj in occ)
    elif model.bulk_kind is BulkKind.GAIN:
        bulk = -sum(2.0 * model.bulk_rate * (1.0 - nj) for nj in occ)
    else:
        bulk = 0.0
    return SteadyState(rho=rho, occupations=occ,
                       currents=CurrentResult(j_left=j_left, j_right=j_right),
                       bulk_dissipation=bulk, residual=residual)


def solve(model: ChainModel, drive: LindbladDrive, **kwargs) -> SteadyState:
    """Build the Liouvillian and return its steady state in one call."""
    return steady_state(build_liouvillian(model, drive,
                                          kwargs.pop("max_sites", MAX_SITES)),
                        drive, model, **kwargs)
