"""Bell-basis tooling for two-qubit states.

Bell labels follow the fixed order 0: Phi+, 1: Psi+, 2: Phi-, 3: Psi-, which
doubles as the bit-pair encoding used by the classical hashing layer.  The
twirl implemented here is the standard symmetrization to Werner form: a
uniformly random shared Pauli, a uniformly random shared axis rotation from a
three-element cyclic set, and a fixed basis correction conjugating the whole
protocol so the Phi+ overlap is the preserved figure of merit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidStateError, ZeroProbabilityError
from .locc import SelectiveOutcome, apply_selective, LocalFilter
from .qstate import (
    DensityOperator,
    PureState,
    partial_transpose,
    sym,
)
from .sampling import haar_unitary

__all__ = [
    "BELL_LABELS",
    "BellProbs",
    "TwoQubitDiagnostics",
    "ProjectionWitness",
    "bell_vector",
    "bell_state",
    "bell_basis_matrix",
    "magic_basis_matrix",
    "werner_probs",
    "werner",
    "twirl",
    "twirl_unitaries",
    "bell_probs_from_density",
    "density_from_bell_probs",
    "fully_entangled_fraction",
    "two_qubit_diagnostics",
    "project_to_qubits",
    "search_projection_witness",
]

BELL_LABELS = ("phi_plus", "psi_plus", "phi_minus", "psi_minus")

_SQ2 = 1.0 / math.sqrt(2.0)
_BELL_COLUMNS = np.array(
    [
        [1, 0, 1, 0],
        [0, 1, 0, 1],
        [0, 1, 0, -1],
        [1, 0, -1, 0],
    ],
    dtype=complex,
) * _SQ2  # columns: Phi+, Psi+, Phi-, Psi-

BELL_DIAGONAL_TOL = 1e-8
ENTANGLEMENT_TOL = 1e-10
_PROJECTOR_TOL = 1e-9


def bell_basis_matrix() -> np.ndarray:
    """4 x 4 unitary whose columns are the Bell vectors in label order."""
    return _BELL_COLUMNS.copy()


def bell_vector(label: int) -> np.ndarray:
    if label not in (0, 1, 2, 3):
        raise DimensionMismatchError(f"Bell label must be 0..3, got {label}")
    return _BELL_COLUMNS[:, label].copy()


def bell_state(label: int) -> PureState:
    return PureState(2, 2, bell_vector(label))


def magic_basis_matrix() -> np.ndarray:
    """Columns Phi+, i*Phi-, i*Psi+, Psi-: the basis in which maximally
    entangled states are exactly the real unit combinations."""
    cols = np.stack(
        [
            _BELL_COLUMNS[:, 0],
            1j * _BELL_COLUMNS[:, 2],
            1j * _BELL_COLUMNS[:, 1],
            _BELL_COLUMNS[:, 3],
        ],
        axis=1,
    )
    return cols


@dataclass(frozen=True)
class BellProbs:
    """Probability weights over the four Bell states, in label order."""

    p: tuple[float, float, float, float]

    def __post_init__(self):
        values = tuple(float(v) for v in self.p)
        object.__setattr__(self, "p", values)
        if len(values) != 4:
            raise InvalidStateError(f"need four Bell weights, got {len(values)}")
        if min(values) < -1e-12:
            raise InvalidStateError(f"negative Bell weight {min(values)}")
        total = sum(values)
        if abs(total - 1.0) > 1e-9:
            raise InvalidStateError(f"Bell weights sum to {total}, not 1")

    @property
    def fidelity(self) -> float:
        """Weight on Phi+."""
        return self.p[0]

    def as_array(self) -> np.ndarray:
        return np.array(self.p)


@dataclass(frozen=True)
class TwoQubitDiagnostics:
    ppt_min_eigenvalue: float
    fully_entangled_fraction: float
    entangled: bool


@dataclass(frozen=True)
class ProjectionWitness:
    """Best local rank-2 projection found by randomized search."""

    pi_a: np.ndarray
    pi_b: np.ndarray
    ppt_min_eigenvalue: float
    trial_index: int
    success_prob: float


def _require_two_qubit(rho: DensityOperator, what: str) -> None:
    if (rho.dim_a, rho.dim_b) != (2, 2):
        raise DimensionMismatchError(
            f"{what} needs a two-qubit state, got ({rho.dim_a}, {rho.dim_b})"
        )


def werner_probs(fidelity: float) -> BellProbs:
    f = float(fidelity)
    if not 0.0 <= f <= 1.0:
        raise InvalidStateError(f"Werner fidelity must lie in [0, 1], got {f}")
    rest = (1.0 - f) / 3.0
    return BellProbs((f, rest, rest, rest))


def werner(fidelity: float) -> DensityOperator:
    """Werner state: weight F on Phi+ and (1-F)/3 on each other Bell state."""
    return density_from_bell_probs(werner_probs(fidelity))


_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_HAD = np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2
_PHASE = np.array([[1, 0], [0, 1j]], dtype=complex)

# Three shared rotations generating a cyclic permutation of the non-singlet
# Bell states, and the four shared Paulis killing Bell off-diagonals.
_ETAS = (_I2, _PHASE @ _HAD, _Z @ _HAD @ _PHASE)
_PAULIS = (_I2, _X, _Y, _Z)
_CORRECTION = np.kron(_X, _Z)  # maps the singlet to Phi+ and back


def twirl_unitaries() -> tuple[np.ndarray, ...]:
    """The twelve product unitaries whose uniform mixture is the Werner twirl."""
    out = []
    for eta in _ETAS:
        for sigma in _PAULIS:
            v = _CORRECTION @ np.kron(eta, eta) @ np.kron(sigma, sigma) @ _CORRECTION
            v.setflags(write=False)
            out.append(v)
    return tuple(out)


_TWIRL_UNITARIES = twirl_unitaries()


def twirl(
    rho: DensityOperator, mode: str = "exact", seed: int | None = None
) -> DensityOperator:
    """Symmetrize a two-qubit state to Werner form.

    ``exact`` averages the twelve conjugations, producing the Bell-diagonal
    state with unchanged Phi+ overlap and the remaining weight spread evenly.
    ``sampled`` applies a single uniformly drawn member, which is what one
    round of the physical protocol does before averaging over randomness.
    """
    _require_two_qubit(rho, "twirl")
    if mode == "exact":
        acc = np.zeros((4, 4), dtype=complex)
        for v in _TWIRL_UNITARIES:
            acc += v @ rho.matrix @ v.conj().T
        return DensityOperator(rho.factors, acc / 12.0)
    if mode == "sampled":
        rng = np.random.default_rng(0 if seed is None else seed)
        v = _TWIRL_UNITARIES[int(rng.integers(0, 12))]
        return DensityOperator(rho.factors, v @ rho.matrix @ v.conj().T)
    raise InvalidStateError(f"twirl mode must be 'exact' or 'sampled', got {mode!r}")


def bell_probs_from_density(rho: DensityOperator, project: bool = False) -> BellProbs:
    """Diagonal of the state in the Bell basis.

    Rejects states whose Bell off-diagonal part exceeds 1e-8 unless
    ``project`` is set, in which case the off-diagonal part is dropped.
    """
    _require_two_qubit(rho, "bell_probs_from_density")
    in_bell = _BELL_COLUMNS.conj().T @ rho.matrix @ _BELL_COLUMNS
    off = in_bell - np.diag(np.diag(in_bell))
    residue = np.abs(off).max()
    if residue > BELL_DIAGONAL_TOL and not project:
        raise InvalidStateError(
            f"state is not Bell diagonal (off-diagonal residue {residue:.3e}); "
            "pass project=True to drop the off-diagonal part"
        )
    diag = np.real(np.diag(in_bell))
    diag = np.clip(diag, 0.0, None)
    return BellProbs(tuple(diag / diag.sum()))


def density_from_bell_probs(bp: BellProbs) -> DensityOperator:
    m = (_BELL_COLUMNS * np.asarray(bp.p)) @ _BELL_COLUMNS.conj().T
    return DensityOperator.from_matrix(m, 2, 2)


def fully_entangled_fraction(rho: DensityOperator) -> float:
    """Largest overlap with any maximally entangled state.

    Maximally entangled states are the real unit combinations of the magic
    basis, so the maximum is the top eigenvalue of the real part of the state
    expressed in that basis.
    """
    _require_two_qubit(rho, "fully_entangled_fraction")
    magic = magic_basis_matrix()
    m = magic.conj().T @ rho.matrix @ magic
    real_part = (m.real + m.real.T) / 2
    return float(np.linalg.eigvalsh(real_part).max())


def two_qubit_diagnostics(rho: DensityOperator) -> TwoQubitDiagnostics:
    """PPT minimum eigenvalue, fully entangled fraction, and the verdict."""
    _require_two_qubit(rho, "two_qubit_diagnostics")
    pt_min = float(np.linalg.eigvalsh(sym(partial_transpose(rho))).min())
    return TwoQubitDiagnostics(
        ppt_min_eigenvalue=pt_min,
        fully_entangled_fraction=fully_entangled_fraction(rho),
        entangled=pt_min < -ENTANGLEMENT_TOL,
    )


def _range_isometry(projector: np.ndarray, dim: int, name: str) -> np.ndarray:
    p = np.asarray(projector, dtype=complex)
    if p.shape != (dim, dim):
        raise DimensionMismatchError(
            f"{name} has shape {p.shape}, expected ({dim}, {dim})"
        )
    if np.abs(p - p.conj().T).max() > _PROJECTOR_TOL:
        raise InvalidStateError(f"{name} is not Hermitian")
    if np.abs(p @ p - p).max() > _PROJECTOR_TOL:
        raise InvalidStateError(f"{name} is not idempotent within {_PROJECTOR_TOL}")
    eigenvalues, vectors = np.linalg.eigh(sym(p))
    keep = eigenvalues > 0.5
    if int(keep.sum()) != 2:
        raise InvalidStateError(f"{name} must have rank 2, got rank {int(keep.sum())}")
    return vectors[:, keep]  # dim x 2 isometry onto the range


def project_to_qubits(
    rho: DensityOperator, pi_a: np.ndarray, pi_b: np.ndarray
) -> tuple[SelectiveOutcome, TwoQubitDiagnostics]:
    """Project both sides onto rank-2 subspaces and compress to a two-qubit state.

    The compressed state is expressed in orthonormal bases of the projector
    ranges; the outcome probability is the projection weight.
    """
    va = _range_isometry(pi_a, rho.dim_a, "pi_a")
    vb = _range_isometry(pi_b, rho.dim_b, "pi_b")
    filt = LocalFilter(va.conj().T, vb.conj().T)
    outcome = apply_selective(filt, rho)
    diagnostics = two_qubit_diagnostics(outcome.normalized())
    return outcome, diagnostics


def search_projection_witness(
    rho: DensityOperator, trials: int, seed: int = 0
) -> ProjectionWitness:
    """Randomized search for local rank-2 projections exposing entanglement.

    Each trial draws Haar unitaries per side (sub-seeded from (seed, trial),
    so results do not depend on how trials are partitioned across workers),
    projects onto the span of their first two columns, and keeps the
    projection minimizing the PPT minimum eigenvalue of the compressed state.
    Trials whose projection weight vanishes are skipped.
    """
    trials = int(trials)
    if trials < 1:
        raise DimensionMismatchError(f"need at least one trial, got {trials}")
    if rho.dim_a < 2 or rho.dim_b < 2:
        raise DimensionMismatchError("both sides need dimension >= 2")
    best: ProjectionWitness | None = None
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        ua = haar_unitary(rho.dim_a, rng)[:, :2]
        ub = haar_unitary(rho.dim_b, rng)[:, :2]
        pi_a = ua @ ua.conj().T
        pi_b = ub @ ub.conj().T
        try:
            outcome, diag = project_to_qubits(rho, pi_a, pi_b)
        except ZeroProbabilityError:
            continue
        if best is None or diag.ppt_min_eigenvalue < best.ppt_min_eigenvalue:
            best = ProjectionWitness(
                pi_a=pi_a,
                pi_b=pi_b,
                ppt_min_eigenvalue=diag.ppt_min_eigenvalue,
                trial_index=trial,
                success_prob=outcome.probability,
            )
    if best is None:
        raise ZeroProbabilityError("every trial projected onto a null subspace")
    return best
