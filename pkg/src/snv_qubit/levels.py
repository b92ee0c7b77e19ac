"""Ground/excited level structure of the SnV center.

Each manifold is a 4x4 Hamiltonian on orbital (x) spin, built in GHz and
returned in rad/s:

    H = H_SO + H_Z_parallel + H_Z_perp + H_JT

The orbital Zeeman term is omitted. The hyperfine coupling is not part of
these matrices; protocols treat it as a classical shift of the splitting.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Tuple

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment

from snv_qubit.constants import (
    BASIS_LABELS,
    EFFECTIVELY_INFINITE,
    EXCITED_LABELS,
    GHZ,
    GROUND_LABELS,
    IDENTITY2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
)
from snv_qubit.params import JahnTellerStrain

logger = logging.getLogger(__name__)

HERMITIAN_RTOL = 1e-12
STRAIN_PLACEMENTS = ("ground", "excited")

# (excited label, ground label) for each optical line.
TRANSITIONS = {
    "A1": ("A", "1"),
    "A2": ("A", "2"),
    "B1": ("B", "1"),
    "B2": ("B", "2"),
}


def _hermitian_defect(matrix):
    norm = np.linalg.norm(matrix)
    return np.linalg.norm(matrix - matrix.conj().T), norm


@dataclass(frozen=True)
class Hamiltonian4:
    matrix: np.ndarray
    basis: Tuple[str, ...] = BASIS_LABELS

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"Hamiltonian4 needs a 4x4 matrix, got shape {m.shape}")
        defect, norm = _hermitian_defect(m)
        if defect > HERMITIAN_RTOL * max(norm, 1.0):
            raise ValueError(f"Hamiltonian is not Hermitian (defect {defect:.3g})")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    labels: Tuple[str, ...]

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no eigenstate labelled {label!r}; have {self.labels}") from None

    def vector(self, label):
        return self.eigenvectors[:, self.index(label)]

    def energy(self, label):
        return float(self.eigenvalues[self.index(label)])


@dataclass(frozen=True)
class DipoleOperators:
    """Orbital dipole matrices in the (e+, e-) basis."""

    p_x: np.ndarray = field(default_factory=lambda: np.array([[0, 1], [1, 0]], dtype=complex))
    p_y: np.ndarray = field(default_factory=lambda: np.array([[0, -1j], [1j, 0]], dtype=complex))
    p_z: np.ndarray = field(default_factory=lambda: 2.0 * np.eye(2, dtype=complex))

    def on_product_space(self):
        """The three operators acting as identity on spin."""
        return [np.kron(p, IDENTITY2) for p in (self.p_x, self.p_y, self.p_z)]


class Transition(NamedTuple):
    name: str
    freq_offset: float  # GHz from the zero-field optical line
    strength: float


@dataclass(frozen=True)
class TransitionTable:
    rows: Tuple[Transition, ...]

    def __post_init__(self):
        for row in self.rows:
            if row.strength < 0:
                raise ValueError(f"negative strength for {row.name}")

    def strength(self, name):
        return self[name].strength

    def __getitem__(self, name):
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)

    def write_csv(self, path):
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["transition", "freq_offset_GHz", "strength"])
            for row in self.rows:
                writer.writerow([row.name, f"{row.freq_offset:.10g}", f"{row.strength:.10g}"])


class MwRabiElement(NamedTuple):
    exact: float
    approx: float


def _manifold_matrix(lambda_so, params, strain, include_perpendicular):
    bx, by, bz = params.b_vector
    half_gamma = params.gyro_e / 2.0
    h = (lambda_so / 2.0) * np.kron(SIGMA_Z, SIGMA_Z)
    h = h + half_gamma * bz * np.kron(IDENTITY2, SIGMA_Z)
    if include_perpendicular:
        h = h + half_gamma * np.kron(IDENTITY2, bx * SIGMA_X + by * SIGMA_Y)
    h = h + np.kron(strain.matrix(), IDENTITY2)
    return Hamiltonian4(h * GHZ)


def build_ground_hamiltonian(params, strain=None):
    """Ground manifold (lambda_SO = 850 GHz nominal) in rad/s."""
    return _manifold_matrix(
        params.lambda_so_ground, params, strain or JahnTellerStrain(), True
    )


def build_excited_hamiltonian(params, strain=None, include_perpendicular=True):
    """Excited manifold; same operators with lambda_SO,excited.

    ``include_perpendicular=False`` pins the excited spin to the symmetry axis.
    """
    return _manifold_matrix(
        params.lambda_so_excited,
        params,
        strain or JahnTellerStrain(),
        include_perpendicular,
    )


def diagonalize(h, reference=None):
    """Sorted eigenpairs with labels assigned by maximum overlap.

    ``reference`` maps label -> product-basis index of the state it connects
    to at zero field and zero strain (default: ground labels 1..4).
    """
    if isinstance(h, Hamiltonian4):
        matrix = h.matrix
    else:
        matrix = np.asarray(h, dtype=complex)
        defect, norm = _hermitian_defect(matrix)
        if defect > HERMITIAN_RTOL * max(norm, 1.0):
            raise ValueError(f"Hamiltonian is not Hermitian (defect {defect:.3g})")
    values, vectors = np.linalg.eigh(matrix)

    reference = reference or GROUND_LABELS
    names = list(reference)
    rows = [reference[name] for name in names]
    overlap = np.abs(vectors[rows, :]) ** 2
    label_idx, column_idx = linear_sum_assignment(-overlap)
    labels = [""] * vectors.shape[1]
    for li, ci in zip(label_idx, column_idx):
        labels[ci] = names[li]
    return EigenSystem(values, vectors, tuple(labels))


def transition_strengths(ground, excited, dip=None, zero_field_line=0.0):
    """Fermi-golden-rule strengths of A1, A2, B1, B2.

    ``zero_field_line`` is the optical line (rad/s) that frequency offsets are
    measured against.
    """
    operators = (dip or DipoleOperators()).on_product_space()
    rows = []
    for name, (exc, gnd) in TRANSITIONS.items():
        e_vec = excited.vector(exc)
        g_vec = ground.vector(gnd)
        strength = sum(abs(e_vec.conj() @ p @ g_vec) ** 2 for p in operators)
        offset = excited.energy(exc) - ground.energy(gnd) - zero_field_line
        rows.append(Transition(name, offset / GHZ, float(strength)))
    return TransitionTable(tuple(rows))


def _strain_split(strain, place_strain_in):
    if place_strain_in not in STRAIN_PLACEMENTS:
        raise ValueError(
            f"place_strain_in must be one of {STRAIN_PLACEMENTS}, got {place_strain_in!r}"
        )
    strain = strain or JahnTellerStrain()
    zero = JahnTellerStrain()
    if place_strain_in == "ground":
        return strain, zero
    return zero, strain


def transition_table(params, strain=None, place_strain_in="ground", pin_excited_spin=True):
    ground_strain, excited_strain = _strain_split(strain, place_strain_in)
    ground = diagonalize(build_ground_hamiltonian(params, ground_strain), GROUND_LABELS)
    excited = diagonalize(
        build_excited_hamiltonian(
            params, excited_strain, include_perpendicular=not pin_excited_spin
        ),
        EXCITED_LABELS,
    )
    line = (params.lambda_so_ground - params.lambda_so_excited) / 2.0 * GHZ
    return transition_strengths(ground, excited, zero_field_line=line)


def branching_ratio(params, strain=None, place_strain_in="ground", pin_excited_spin=True):
    """eta = strength(A1) / strength(A2) from both diagonalized manifolds."""
    table = transition_table(params, strain, place_strain_in, pin_excited_spin)
    a1 = table.strength("A1")
    a2 = table.strength("A2")
    if a2 < 1e-30 * a1:
        return EFFECTIVELY_INFINITE
    return a1 / a2


def branching_ratio_estimate(params):
    """Closed form 8 lambda^2 / (gamma_e B_perp)^2 for zero strain."""
    zeeman = params.gyro_e * params.b_perp
    if zeeman == 0:
        return EFFECTIVELY_INFINITE
    return 8.0 * params.lambda_so_ground**2 / zeeman**2


def branching_sweep(params, c_values, place_strain_in="ground", pin_excited_spin=True):
    """[(c_GHz, eta), ...] for symmetric strain a = b = 0."""
    return [
        (float(c), branching_ratio(params, JahnTellerStrain(c=float(c)), place_strain_in, pin_excited_spin))
        for c in c_values
    ]


def calibrate_strain(params, target_eta, place_strain_in="ground", c_max=5000.0):
    """Find the off-diagonal strain c that reproduces a measured branching ratio."""
    eta0 = branching_ratio(params, None, place_strain_in)
    if eta0 <= target_eta:
        raise ValueError(
            f"zero-strain branching ratio {eta0:.4g} is already below target {target_eta}"
        )

    def log_mismatch(c):
        return math.log(branching_ratio(params, JahnTellerStrain(c=c), place_strain_in)) - math.log(
            target_eta
        )

    hi = 1.0
    while log_mismatch(hi) > 0:
        hi *= 2.0
        if hi > c_max:
            raise ValueError(f"no strain below {c_max} GHz reaches eta = {target_eta}")
    lo = hi / 2.0 if hi > 1.0 else 0.0
    logger.debug("strain bracket [%g, %g] GHz for eta=%g", lo, hi, target_eta)
    c = brentq(log_mismatch, lo, hi, xtol=1e-9)
    return JahnTellerStrain(c=c)


def mw_rabi_element(strain, lambda_so):
    """<1|H_MW|2> proportionality for a microwave drive and its 2c/lambda limit."""
    a, b, c = strain.a, strain.b, strain.c
    if c == 0:
        return MwRabiElement(0.0, 0.0)
    d_minus = -a + b + lambda_so
    d_plus = a - b + lambda_so
    exact = 2.0 * c * (
        1.0 / (d_minus + math.sqrt(4 * c**2 + d_minus**2))
        + 1.0 / (d_plus + math.sqrt(4 * c**2 + d_plus**2))
    )
    return MwRabiElement(exact, 2.0 * c / lambda_so)


def first_order_qubit_states(params):
    """Perturbative lower-branch states |1>, |2> to first order in gamma_e B / lambda."""
    bx, by, _ = params.b_vector
    k = params.gyro_e / (2.0 * params.lambda_so_ground)
    b_plus = bx + 1j * by
    b_minus = bx - 1j * by
    e_plus = np.array([1, 0], dtype=complex)
    e_minus = np.array([0, 1], dtype=complex)
    up = np.array([1, 0], dtype=complex)
    down = np.array([0, 1], dtype=complex)
    state1 = np.kron(e_plus, down - k * b_minus * up)
    state2 = np.kron(e_minus, up - k * b_plus * down)
    return {
        "1": state1 / np.linalg.norm(state1),
        "2": state2 / np.linalg.norm(state2),
    }


def qubit_splitting(params, strain=None):
    """E(2) - E(1) of the ground manifold in rad/s."""
    ground = diagonalize(build_ground_hamiltonian(params, strain))
    return ground.energy("2") - ground.energy("1")

