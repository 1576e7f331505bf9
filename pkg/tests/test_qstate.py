"""State container, metrics, and serialization checks.

Every expected number is either exact arithmetic written out in the test or
an independently computed spectrum; library calls are never compared against
themselves.
"""

import math

import numpy as np
import pytest

from distillery.errors import (
    DimensionCapError,
    DimensionMismatchError,
    InvalidStateError,
)
from distillery.qstate import (
    DensityOperator,
    PureState,
    UnnormalizedOperator,
    fidelity_pure,
    max_entangled,
    max_side_dim,
    partial_trace,
    partial_transpose,
    permute_subsystems,
    state_from_json,
    state_to_json,
    tensor_product,
    trace_norm_distance,
    von_neumann_entropy,
)
from distillery.sampling import random_density_operator, random_pure_state


def maximally_mixed(dim_a: int, dim_b: int) -> DensityOperator:
    d = dim_a * dim_b
    return DensityOperator.from_matrix(np.eye(d) / d, dim_a, dim_b)


def test_max_entangled_vector():
    psi = max_entangled(2)
    expected = np.zeros(4, dtype=complex)
    expected[0] = expected[3] = 1.0 / math.sqrt(2)
    assert np.abs(psi.amplitudes - expected).max() == 0.0
    # d = 4 amplitudes sit on the diagonal positions k*(d+1)
    psi4 = max_entangled(4)
    nz = np.flatnonzero(psi4.amplitudes)
    assert list(nz) == [0, 5, 10, 15]
    assert np.allclose(psi4.amplitudes[nz], 0.5)
    with pytest.raises(DimensionMismatchError):
        max_entangled(1)


def test_trace_distance_known_value():
    # eigenvalues of sigma+ - I/4 are {3/4, -1/4, -1/4, -1/4}; trace norm 3/2
    d = trace_norm_distance(max_entangled(2).density(), maximally_mixed(2, 2))
    assert abs(d - 1.5) < 1e-12


def test_trace_distance_orthogonal_pure_states():
    # on a trivial Alice factor: |0><0| vs |1><1| on Bob, distance 2
    zero = DensityOperator(((1, 2),), np.diag([1.0, 0.0]))
    one = DensityOperator(((1, 2),), np.diag([0.0, 1.0]))
    assert abs(trace_norm_distance(zero, one) - 2.0) < 1e-12
    with pytest.raises(DimensionMismatchError):
        trace_norm_distance(zero, maximally_mixed(2, 2))


def test_partial_transpose_pure_entangled():
    # PT of the projector onto (|00> + |11>)/sqrt(2) has spectrum {1/2 x3, -1/2}
    rho = max_entangled(2).density()
    eig = np.linalg.eigvalsh(partial_transpose(rho))
    expected = np.array([-0.5, 0.5, 0.5, 0.5])
    assert np.abs(np.sort(eig) - expected).max() < 1e-12


def test_partial_transpose_matches_reshape_route():
    rng = np.random.default_rng(11)
    for _ in range(20):
        rho = random_density_operator(2, 3, rng)
        pt = partial_transpose(rho)
        assert abs(np.trace(pt) - 1.0) < 1e-12
        # independent route: swap Bob's row and column axes on the raw matrix
        manual = rho.matrix.reshape(2, 3, 2, 3).transpose(0, 3, 2, 1).reshape(6, 6)
        assert np.abs(pt - manual).max() == 0.0
        # transposing Bob twice is the identity
        assert np.abs(manual.reshape(2, 3, 2, 3).transpose(0, 3, 2, 1).reshape(6, 6) - rho.matrix).max() == 0.0


def test_partial_transpose_product_states_stay_positive():
    rng = np.random.default_rng(12)
    for _ in range(20):
        a = random_density_operator(2, 1, rng).matrix
        b = random_density_operator(1, 3, rng).matrix
        rho = DensityOperator.from_matrix(np.kron(a, b), 2, 3)
        assert np.linalg.eigvalsh(partial_transpose(rho)).min() > -1e-10


def test_entropy_known_values():
    # spectrum of the F = 0.9 mixture is (0.9, 1/30, 1/30, 1/30)
    p = [0.9, 1 / 30, 1 / 30, 1 / 30]
    expected = -sum(v * math.log2(v) for v in p)
    assert abs(expected - 0.6274918436613969) < 1e-15
    from distillery.bell import werner

    assert abs(von_neumann_entropy(werner(0.9)) - expected) < 1e-12
    assert von_neumann_entropy(max_entangled(2).density()) < 1e-10
    assert abs(von_neumann_entropy(maximally_mixed(2, 2)) - 2.0) < 1e-12


def test_entropy_additive_over_tensor_products():
    rng = np.random.default_rng(13)
    for _ in range(10):
        x = random_density_operator(2, 2, rng)
        y = random_density_operator(2, 2, rng)
        joint = von_neumann_entropy(tensor_product(x, y))
        assert abs(joint - von_neumann_entropy(x) - von_neumann_entropy(y)) < 1e-8


def test_tensor_product_copy_major_layout():
    # joining two copies must reorder the raw Kronecker axes so that the
    # maximally entangled pair of pairs equals the d = 4 maximally entangled state
    phi = max_entangled(2)
    v = np.kron(phi.amplitudes, phi.amplitudes)  # order a1 b1 a2 b2
    v = v.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(16)  # -> a1 a2 b1 b2
    assert np.abs(v - max_entangled(4).amplitudes).max() < 1e-15

    two = tensor_product(phi.density(), phi.density())
    assert two.factors == ((2, 2), (2, 2))
    assert np.abs(two.matrix - np.outer(v, v.conj())).max() < 1e-15


def test_tensor_product_fidelity_multiplies():
    from distillery.bell import werner

    pair = tensor_product(werner(0.7), werner(0.7))
    f = fidelity_pure(max_entangled(4), pair)
    assert abs(f - 0.49) < 1e-12


def test_partial_trace_recovers_factors():
    from distillery.bell import werner

    w = werner(0.6)
    joint = tensor_product(max_entangled(2).density(), w)
    left = partial_trace(joint, [0])
    right = partial_trace(joint, [1])
    assert left.factors == ((2, 2),)
    assert np.abs(left.matrix - max_entangled(2).density().matrix).max() < 1e-12
    assert np.abs(right.matrix - w.matrix).max() < 1e-12


def test_partial_trace_three_copies():
    rng = np.random.default_rng(14)
    x = random_density_operator(2, 2, rng)
    y = random_density_operator(2, 2, rng)
    z = random_density_operator(2, 2, rng)
    triple = tensor_product(tensor_product(x, y), z)
    kept = partial_trace(triple, [0, 2])
    assert kept.factors == ((2, 2), (2, 2))
    assert np.abs(kept.matrix - tensor_product(x, z).matrix).max() < 1e-10
    assert abs(np.trace(kept.matrix) - 1.0) < 1e-12
    with pytest.raises(DimensionMismatchError):
        partial_trace(triple, [])
    with pytest.raises(DimensionMismatchError):
        partial_trace(triple, [3])


def test_partial_trace_contracts_trace_distance():
    rng = np.random.default_rng(15)
    for _ in range(50):
        a = tensor_product(random_density_operator(2, 2, rng), random_density_operator(2, 2, rng))
        b = tensor_product(random_density_operator(2, 2, rng), random_density_operator(2, 2, rng))
        before = trace_norm_distance(a, b)
        after = trace_norm_distance(partial_trace(a, [0]), partial_trace(b, [0]))
        assert after <= before + 1e-8


def test_fidelity_trace_distance_inequalities():
    # 2(1 - F) <= ||rho - psi||_1 <= 2 sqrt(1 - F) with F the pure-state overlap
    rng = np.random.default_rng(16)
    for k in range(100):
        dim_a, dim_b = [(2, 2), (2, 3), (3, 3)][k % 3]
        rho = random_density_operator(dim_a, dim_b, rng)
        psi = random_pure_state(dim_a, dim_b, rng)
        f = fidelity_pure(psi, rho)
        d = trace_norm_distance(psi.density(), rho)
        assert 2.0 * (1.0 - f) <= d + 1e-8
        assert d <= 2.0 * math.sqrt(1.0 - f) + 1e-8


def test_fidelity_pure_domain():
    psi = max_entangled(2)
    assert abs(fidelity_pure(psi, psi.density()) - 1.0) < 1e-12
    assert abs(fidelity_pure(psi, maximally_mixed(2, 2)) - 0.25) < 1e-12
    with pytest.raises(DimensionMismatchError):
        fidelity_pure(psi, maximally_mixed(2, 3))


def test_permute_subsystems_roundtrip():
    rng = np.random.default_rng(17)
    m = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    dims = [2, 3, 2]
    perm = (2, 0, 1)
    inverse = (1, 2, 0)
    back = permute_subsystems(permute_subsystems(m, dims, perm), [dims[p] for p in perm], inverse)
    assert np.abs(back - m).max() == 0.0


def test_unnormalized_operator_weight():
    op = UnnormalizedOperator(((2, 2),), 0.25 * max_entangled(2).density().matrix)
    assert abs(op.weight - 0.25) < 1e-12
    rho = op.normalized()
    assert abs(np.trace(rho.matrix) - 1.0) < 1e-12
    with pytest.raises(InvalidStateError):
        UnnormalizedOperator(((2, 2),), np.zeros((4, 4)))  # trace not positive


def test_validation_rejects_bad_matrices():
    good = np.eye(4) / 4
    with pytest.raises(InvalidStateError):
        DensityOperator.from_matrix(good + np.diag([0.1, 0, 0, 0]), 2, 2)  # trace 1.1
    skew = good.astype(complex).copy()
    skew[0, 1] = 1e-3
    with pytest.raises(InvalidStateError):
        DensityOperator.from_matrix(skew, 2, 2)  # not Hermitian
    with pytest.raises(InvalidStateError):
        DensityOperator.from_matrix(np.diag([0.6, 0.6, -0.1, -0.1]), 2, 2)  # negative eigenvalue
    with pytest.raises(InvalidStateError):
        DensityOperator.from_matrix(np.eye(2) / 2, 2, 2)  # wrong shape
    with pytest.raises(DimensionMismatchError):
        DensityOperator((), np.eye(4) / 4)  # no factors
    with pytest.raises(InvalidStateError):
        PureState(2, 2, np.array([1.0, 1.0, 0.0, 0.0]))  # norm sqrt(2)


def test_matrices_are_frozen():
    rho = max_entangled(2).density()
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 9.0


def test_dimension_cap_default_and_override(monkeypatch):
    monkeypatch.delenv("DISTILLERY_MAX_DIM", raising=False)
    assert max_side_dim() == 64
    with pytest.raises(DimensionCapError):
        max_entangled(65)
    monkeypatch.setenv("DISTILLERY_MAX_DIM", "4")
    assert max_side_dim() == 4
    with pytest.raises(DimensionCapError):
        max_entangled(5)
    max_entangled(4)  # at the cap is allowed
    monkeypatch.setenv("DISTILLERY_MAX_DIM", "not-a-number")
    with pytest.raises(DimensionCapError):
        max_side_dim()
    monkeypatch.setenv("DISTILLERY_MAX_DIM", "0")
    with pytest.raises(DimensionCapError):
        max_side_dim()


def test_dimension_cap_applies_to_tensor_products(monkeypatch):
    monkeypatch.setenv("DISTILLERY_MAX_DIM", "3")
    rho = max_entangled(2).density()
    with pytest.raises(DimensionCapError):
        tensor_product(rho, rho)


def test_json_roundtrip_is_bit_exact():
    rng = np.random.default_rng(18)
    for _ in range(5):
        rho = random_density_operator(2, 3, rng)
        text = state_to_json(rho)
        back = state_from_json(text)
        assert back.factors == ((2, 3),)
        assert np.array_equal(back.matrix, rho.matrix)  # 17 significant digits round-trip floats
        assert state_to_json(back) == text


def test_json_rejects_malformed_documents():
    with pytest.raises(InvalidStateError):
        state_from_json('{"dim_a":2,"matrix":[]}')
    with pytest.raises(InvalidStateError):
        state_from_json('{"dim_a":2,"dim_b":2,"matrix":[[[1,0]]]}')
