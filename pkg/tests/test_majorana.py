import itertools

import numpy as np
import pytest

from nsyk.errors import InvalidArgumentError, SymmetryViolationError
from nsyk.majorana import (PauliString, build_majoranas, parity_operator, popcount,
                           project_to_sector, sector_indices)


@pytest.mark.parametrize("n", [2, 4, 8, 12])
def test_clifford_algebra(n):
    ms = build_majoranas(n)
    ops = ms.operators
    assert len(ops) == n
    assert ops[0].shape == (2 ** (n // 2),) * 2
    eye = np.eye(ms.dimension)
    for a, b in itertools.combinations_with_replacement(range(n), 2):
        anti = ops[a] @ ops[b] + ops[b] @ ops[a]
        expected = eye if a == b else 0 * eye
        assert np.max(np.abs(anti - expected)) <= 1e-14


def test_majoranas_are_hermitian():
    for op in build_majoranas(8).operators:
        assert np.max(np.abs(op - op.conj().T)) == 0.0


def test_two_majoranas_are_scaled_paulis():
    x, y = build_majoranas(2).operators
    s = 2 ** -0.5
    np.testing.assert_allclose(x, s * np.array([[0, 1], [1, 0]]), atol=1e-15)
    np.testing.assert_allclose(y, s * np.array([[0, -1j], [1j, 0]]), atol=1e-15)


def test_symbolic_form_matches_dense():
    ms = build_majoranas(8)
    for a in range(8):
        np.testing.assert_allclose(ms.paulis[a].to_dense(ms.n_sites), ms.operators[a], atol=1e-15)


def test_monomial_product_rule(rng):
    ms = build_majoranas(10)
    for _ in range(20):
        idx = sorted(rng.choice(np.arange(1, 11), size=4, replace=False))
        dense = ms.operators[idx[0] - 1] @ ms.operators[idx[1] - 1] @ ms.operators[idx[2] - 1] @ ms.operators[idx[3] - 1]
        np.testing.assert_allclose(ms.monomial(idx).to_dense(ms.n_sites), dense, atol=1e-15)


def test_pauli_string_multiplication():
    # X Z = -i Y  and  Z X = i Y on one qubit
    x, z = PauliString(1, 0), PauliString(0, 1)
    y = np.array([[0, -1j], [1j, 0]])
    np.testing.assert_allclose((x @ z).to_dense(1), -1j * y)
    np.testing.assert_allclose((z @ x).to_dense(1), 1j * y)


@pytest.mark.parametrize("n", [1, 3, 0, -2, 5.0])
def test_invalid_majorana_count(n):
    with pytest.raises(InvalidArgumentError):
        build_majoranas(n)


def test_monomial_index_range():
    with pytest.raises(InvalidArgumentError):
        build_majoranas(4).monomial([1, 2, 3, 5])


def test_popcount():
    assert popcount(np.array([0, 1, 3, 255, 2**40 + 1])).tolist() == [0, 1, 2, 8, 2]


@pytest.mark.parametrize("n", [4, 8, 12])
def test_parity_properties(n):
    ms = build_majoranas(n)
    P = parity_operator(ms)
    eye = np.eye(ms.dimension)
    np.testing.assert_allclose(P.matrix @ P.matrix, eye)
    np.testing.assert_allclose(P.matrix, P.matrix.conj().T)
    for op in ms.operators:
        np.testing.assert_allclose(P.matrix @ op + op @ P.matrix, 0, atol=1e-15)
    assert P.sector_dims == (ms.dimension // 2, ms.dimension // 2)
    # proportional to the product of all Majoranas
    prod = np.linalg.multi_dot(ms.operators) if n > 2 else ms.operators[0] @ ms.operators[1]
    ratio = prod[0, 0] / P.matrix[0, 0]
    np.testing.assert_allclose(prod, ratio * P.matrix, atol=1e-14)


def test_four_body_terms_commute_with_parity():
    ms = build_majoranas(8)
    P = parity_operator(ms)
    for idx in [(1, 2, 3, 4), (1, 3, 6, 8), (2, 5, 7, 8)]:
        m = ms.monomial(idx).to_dense(ms.n_sites)
        np.testing.assert_allclose(P.matrix @ m, m @ P.matrix, atol=1e-15)


def test_projection_selects_parity_block(rng):
    ms = build_majoranas(8)
    P = parity_operator(ms)
    idx = sector_indices(ms.n_sites, 1)
    H = np.zeros((16, 16), dtype=complex)
    for tup in itertools.combinations(range(1, 9), 4):
        H += (rng.standard_normal() + 1j * rng.standard_normal()) * ms.monomial(tup).to_dense(4)
    block = project_to_sector(H, P, 1)
    assert block.shape == (8, 8)
    np.testing.assert_array_equal(block, H[np.ix_(idx, idx)])
    assert np.all(popcount(idx) % 2 == 0)
    odd = project_to_sector(H, P, -1)
    full = np.sort(np.linalg.svd(H, compute_uv=False))
    parts = np.sort(np.concatenate([np.linalg.svd(block, compute_uv=False),
                                    np.linalg.svd(odd, compute_uv=False)]))
    np.testing.assert_allclose(parts, full, atol=1e-12)


def test_projection_rejects_parity_odd_operator():
    ms = build_majoranas(6)
    P = parity_operator(ms)
    with pytest.raises(SymmetryViolationError):
        project_to_sector(ms.operators[0], P, 1)
    with pytest.raises(InvalidArgumentError):
        project_to_sector(np.eye(8), P, 0)


def test_construction_is_deterministic():
    a, b = build_majoranas(10), build_majoranas(10)
    assert a.paulis == b.paulis
    for x, y in zip(a.operators, b.operators):
        assert np.array_equal(x, y)
