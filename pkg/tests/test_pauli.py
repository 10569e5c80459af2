import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tripleshadow.pauli import (
    DensityOperator,
    PauliLabel,
    PauliVector,
    ValidationError,
    dense_pauli,
    dense_pauli_kron,
    from_pauli_vector,
    pauli_weight,
    symplectic_product,
    symplectic_walsh,
    symplectic_walsh_direct,
    to_pauli_vector,
    transpose_sign,
    walsh_hadamard,
    y_count,
)

from conftest import random_density

L = PauliLabel.from_string


def all_labels(n):
    return [PauliLabel.from_index(i, n) for i in range(4**n)]


def labels(n):
    return st.integers(0, 4**n - 1).map(lambda i: PauliLabel.from_index(i, n))


# -- labels ---------------------------------------------------------------------

def test_string_round_trip_and_layout():
    assert str(L("XIZ")) == "XIZ"
    p = L("XIZ")  # X on qubit 2, Z on qubit 0
    assert (p.x_bits, p.z_bits) == (0b100, 0b001)
    assert p.index == (0b001 << 3) | 0b100
    assert PauliLabel.from_index(p.index, 3) == p
    assert [str(q) for q in all_labels(1)] == ["I", "X", "Z", "Y"]


def test_label_rejects_oversized_masks():
    with pytest.raises(ValueError):
        PauliLabel(4, 0, 2)
    with pytest.raises(ValueError):
        PauliLabel(0, 0, 13)


def test_symplectic_product_examples():
    assert symplectic_product(L("X"), L("Z")) == 1
    assert symplectic_product(L("XX"), L("YY")) == 0
    for a in all_labels(2):
        assert symplectic_product(a, a) == 0


def test_symplectic_product_rejects_mixed_sizes():
    with pytest.raises(ValueError):
        symplectic_product(L("X"), L("XZ"))


def test_weight_and_y_count_examples():
    assert pauli_weight(PauliLabel.identity(3)) == 0
    assert pauli_weight(L("XIZ")) == 2
    assert pauli_weight(L("YYYY")) == 4
    assert (y_count(L("Y")), transpose_sign(L("Y"))) == (1, -1)
    assert (y_count(L("XZ")), transpose_sign(L("XZ"))) == (0, 1)
    assert (y_count(L("YY")), transpose_sign(L("YY"))) == (2, 1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_symplectic_product_symmetric_and_bilinear(n):
    labs = all_labels(n)
    for a, b in itertools.product(labs, labs):
        f = symplectic_product(a, b)
        assert f == symplectic_product(b, a)
    for a, b, c in itertools.product(labs[:16], labs, labs[:16]):
        ac = PauliLabel.from_index(a.index ^ c.index, n)
        assert symplectic_product(ac, b) == symplectic_product(a, b) ^ symplectic_product(c, b)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_commutation_matches_dense(n):
    mats = {a.index: dense_pauli(a) for a in all_labels(n)}
    for a, b in itertools.product(all_labels(n), repeat=2):
        pa, pb = mats[a.index], mats[b.index]
        sign = -1 if symplectic_product(a, b) else 1
        np.testing.assert_allclose(pa @ pb, sign * pb @ pa, atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_transpose_sign_matches_dense(n):
    for a in all_labels(n):
        m = dense_pauli(a)
        np.testing.assert_array_equal(m.T, transpose_sign(a) * m)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_dense_pauli_matches_kron(n):
    for a in all_labels(n):
        np.testing.assert_array_equal(dense_pauli(a), dense_pauli_kron(a))


def test_dense_pauli_examples():
    np.testing.assert_array_equal(dense_pauli(L("I")), np.eye(2))
    np.testing.assert_array_equal(dense_pauli(L("Z")), np.diag([1, -1]))
    m = dense_pauli(L("XZ"))
    np.testing.assert_allclose(m @ m.conj().T, np.eye(4))
    np.testing.assert_allclose(m, m.conj().T)
    assert np.trace(m) == 0


@given(labels(4))
def test_dense_pauli_hermitian_involution(a):
    m = dense_pauli(a)
    np.testing.assert_array_equal(m, m.conj().T)
    np.testing.assert_allclose(m @ m, np.eye(16), atol=1e-14)


# -- transforms -------------------------------------------------------------------

def test_symplectic_walsh_of_identity_indicator():
    v = np.zeros(16)
    v[0] = 1
    np.testing.assert_array_equal(symplectic_walsh(v), np.ones(16))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_symplectic_walsh_matches_direct(n, rng):
    for _ in range(5):
        v = rng.normal(size=4**n)
        assert np.max(np.abs(symplectic_walsh(v) - symplectic_walsh_direct(v))) < 1e-12 * max(1, 4**n / 16)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_symplectic_walsh_involution(n, seed):
    v = np.random.default_rng(seed).normal(size=4**n)
    np.testing.assert_allclose(symplectic_walsh(symplectic_walsh(v)), 4**n * v, atol=1e-9)


def test_walsh_rejects_bad_lengths():
    with pytest.raises(ValueError):
        walsh_hadamard(np.ones(6))
    with pytest.raises(ValueError):
        symplectic_walsh(np.ones(8))


# -- Pauli vectors ------------------------------------------------------------------

def test_pauli_vector_examples():
    assert to_pauli_vector(DensityOperator.maximally_mixed(3)).nonzero() == {"III": 1.0}
    zero = DensityOperator.from_state_vector([1, 0])
    pv = to_pauli_vector(zero)
    assert [pv["I"], pv["X"], pv["Y"], pv["Z"]] == [1, 0, 0, 1]
    ghz = DensityOperator.from_state_vector(np.array([1, 0, 0, 1]) / np.sqrt(2))
    nz = to_pauli_vector(ghz).nonzero()
    assert nz.keys() == {"II", "XX", "YY", "ZZ"}
    assert nz["YY"] == pytest.approx(-1) and nz["XX"] == pytest.approx(1) and nz["ZZ"] == pytest.approx(1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pauli_vector_matches_trace_oracle(n, rng):
    rho = random_density(n, rng)
    pv = to_pauli_vector(rho)
    for a in all_labels(n):
        assert pv[a] == pytest.approx(np.trace(dense_pauli(a) @ rho.matrix).real, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_round_trip(n, rng):
    for _ in range(3):
        rho = random_density(n, rng)
        pv = to_pauli_vector(rho)
        assert pv.coeffs[0] == pytest.approx(1)
        assert np.all(np.abs(pv.coeffs) <= 1 + 1e-12)
        back = from_pauli_vector(pv)
        assert np.max(np.abs(back.matrix - rho.matrix)) < 1e-9


def test_non_hermitian_rejected():
    with pytest.raises(ValidationError):
        to_pauli_vector(np.array([[0.5, 1.0], [0.0, 0.5]]))


def test_density_validation():
    with pytest.raises(ValidationError):
        DensityOperator.from_matrix(np.diag([1.5, -0.5]))
    with pytest.raises(ValidationError):
        DensityOperator.from_matrix(np.eye(2))
    with pytest.raises(ValidationError):
        DensityOperator.from_matrix(np.eye(3) / 3)
    with pytest.raises(ValidationError):
        from_pauli_vector(PauliVector(np.zeros(4), 1))


def test_density_operator_is_immutable():
    rho = DensityOperator.maximally_mixed(1)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1
