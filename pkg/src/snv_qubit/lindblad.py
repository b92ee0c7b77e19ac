"""Dense Lindblad master-equation solver for 2-4 level systems.

    d rho/dt = -i[H, rho] + sum_i (c_i rho c_i^+ - 1/2 {c_i^+ c_i, rho})

Vectorization is column-stacking: vec(A rho B) = (B^T kron A) vec(rho).
The steady-state solver, the RK integrator and the matrix-exponential
propagator all share this convention. Superoperator builders accept batched
operators with leading axes, which the protocol layer uses to propagate many
noise realizations at once.
"""

import csv
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from snv_qubit.errors import IntegrationError, SteadyStateError

logger = logging.getLogger(__name__)

RTOL = 1e-10
ATOL = 1e-12
NULL_SPACE_RTOL = 1e-12
STEADY_RESIDUAL_RTOL = 1e-10

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
POSITIVITY_TOL = -1e-8


@dataclass(frozen=True)
class CollapseOperator:
    matrix: np.ndarray  # sqrt(rate) * operator
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex))


@dataclass(frozen=True)
class LindbladSystem:
    hamiltonian: np.ndarray  # rad/s
    collapses: Tuple[CollapseOperator, ...] = ()

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError(f"Hamiltonian must be square, got shape {h.shape}")
        collapses = tuple(
            c if isinstance(c, CollapseOperator) else CollapseOperator(c)
            for c in self.collapses
        )
        for c in collapses:
            if c.matrix.shape != h.shape:
                raise ValueError(
                    f"collapse operator {c.label or '?'} has shape {c.matrix.shape}, "
                    f"system has {h.shape}"
                )
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "collapses", collapses)

    @property
    def dimension(self):
        return self.hamiltonian.shape[0]

    def liouvillian(self):
        return liouvillian(self.hamiltonian, [c.matrix for c in self.collapses])


@dataclass
class EvolutionResult:
    times: np.ndarray
    states: List[np.ndarray]
    observables: Dict[str, np.ndarray] = field(default_factory=dict)


def _kron(a, b):
    """Kronecker product over the last two axes, broadcasting leading axes."""
    lead = np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    out = np.einsum("...ij,...kl->...ikjl", a, b)
    return out.reshape(lead + (a.shape[-2] * b.shape[-2], a.shape[-1] * b.shape[-1]))


def _dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def spre(a):
    """vec(A rho) = spre(A) vec(rho)."""
    a = np.asarray(a, dtype=complex)
    return _kron(np.eye(a.shape[-1], dtype=complex), a)


def spost(b):
    """vec(rho B) = spost(B) vec(rho)."""
    b = np.asarray(b, dtype=complex)
    return _kron(np.swapaxes(b, -1, -2), np.eye(b.shape[-1], dtype=complex))


def dissipator(c):
    c = np.asarray(c, dtype=complex)
    cdc = _dagger(c) @ c
    return _kron(np.conj(c), c) - 0.5 * spre(cdc) - 0.5 * spost(cdc)


def liouvillian(hamiltonian, collapses=()):
    """Superoperator of the master equation; ``hamiltonian`` may be batched."""
    h = np.asarray(hamiltonian, dtype=complex)
    sup = -1j * (spre(h) - spost(h))
    for c in collapses:
        sup = sup + dissipator(c)
    return sup


def vec(rho):
    rho = np.asarray(rho, dtype=complex)
    n = rho.shape[-1]
    return np.swapaxes(rho, -1, -2).reshape(rho.shape[:-2] + (n * n,))


def unvec(v):
    v = np.asarray(v)
    n = int(round(np.sqrt(v.shape[-1])))
    return np.swapaxes(v.reshape(v.shape[:-1] + (n, n)), -1, -2)


def check_density_matrix(rho, trace_tol=TRACE_TOL):
    """Raise ValueError unless rho is Hermitian, unit-trace and positive."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] not in (2, 3, 4):
        raise ValueError(f"density matrix must be n x n with n in 2..4, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise ValueError("density matrix is not Hermitian")
    trace = np.trace(rho)
    if abs(trace - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace is {trace.real:.12g}, expected 1")
    lowest = np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]
    if lowest < POSITIVITY_TOL:
        raise ValueError(f"density matrix has negative eigenvalue {lowest:.3g}")
    return rho


def expectation(rho, op):
    """Tr(rho . op)."""
    rho = np.asarray(rho, dtype=complex)
    op = np.asarray(op, dtype=complex)
    if rho.shape != op.shape:
        raise ValueError(f"dimension mismatch: rho {rho.shape}, operator {op.shape}")
    return complex(np.einsum("ij,ji->", rho, op))


def _check_times(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-D sequence")
    if times[0] < 0:
        raise ValueError("times must start at t >= 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    return times


def _observables(states, observables):
    return {
        name: np.array([expectation(rho, op) for rho in states])
        for name, op in (observables or {}).items()
    }


def evolve(system, rho0, times, observables=None, rtol=RTOL, atol=ATOL):
    """Integrate the master equation from t = 0 with adaptive RK45.

    The trace is never renormalized; drift in it is the error signal.
    """
    rho0 = check_density_matrix(rho0)
    if rho0.shape != system.hamiltonian.shape:
        raise ValueError(
            f"dimension mismatch: rho0 {rho0.shape}, system {system.hamiltonian.shape}"
        )
    times = _check_times(times)
    sup = system.liouvillian()
    y0 = vec(rho0)

    if times[-1] == 0.0:
        states = [rho0.copy()]
        return EvolutionResult(times, states, _observables(states, observables))

    reached = [0.0]

    def rhs(t, y):
        reached[0] = t
        return sup @ y

    sol = solve_ivp(
        rhs, (0.0, times[-1]), y0, method="RK45", t_eval=times, rtol=rtol, atol=atol
    )
    if not sol.success:
        raise IntegrationError(f"master-equation integration failed: {sol.message}", reached[0])
    logger.debug("evolve: %d RHS evaluations over %.3g s", sol.nfev, times[-1])

    states = [unvec(sol.y[:, k]) for k in range(sol.y.shape[1])]
    return EvolutionResult(times, states, _observables(states, observables))


def propagate(system, rho0, times, observables=None):
    """Exact piecewise-constant propagation rho(t) = exp(L t) rho0."""
    rho0 = np.asarray(rho0, dtype=complex)
    times = _check_times(times)
    sup = system.liouvillian()
    props = expm(sup[None, :, :] * times[:, None, None])
    vs = props @ vec(rho0)
    states = [unvec(v) for v in vs]
    return EvolutionResult(times, states, _observables(states, observables))


def steady_state(system):
    """Unique fixed point of the Liouvillian with unit trace."""
    if not system.collapses:
        raise ValueError("steady_state needs at least one collapse operator")
    sup = system.liouvillian()
    _, s, vh = np.linalg.svd(sup)
    null_dim = int(np.sum(s <= NULL_SPACE_RTOL * s[0]))
    if null_dim > 1:
        raise SteadyStateError(null_dim)

    rho = unvec(vh[-1].conj())
    rho = rho / np.trace(rho)
    rho = (rho + rho.conj().T) / 2
    residual = np.linalg.norm(sup @ vec(rho))
    if residual > STEADY_RESIDUAL_RTOL * s[0]:
        logger.warning("steady-state residual %.3g exceeds tolerance", residual)
    return rho


def write_trajectory_csv(result, path):
    """Debug dump: t and Re/Im of every matrix entry."""
    n = result.states[0].shape[0]
    header = ["t_s"]
    for i in range(n):
        for j in range(n):
            header += [f"re_{i}{j}", f"im_{i}{j}"]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for t, rho in zip(result.times, result.states):
            row = [f"{t:.10g}"]
            for value in rho.reshape(-1):
                row += [f"{value.real:.10g}", f"{value.imag:.10g}"]
            writer.writerow(row)
