import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wignerqe import linalg
from wignerqe._backend import BACKENDS
from wignerqe.ensembles import gue_spec, sample_wigner
from wignerqe.errors import ConvergenceError, ValidationError
from wignerqe.linalg import check_unitary, fix_phase, haar_unitary, hermitian_eig


def _check_decomposition(h, dec):
    norm2 = np.linalg.norm(h, 2)
    v = dec.vectors
    assert dec.residual <= 1e-10 * max(norm2, 1e-300)
    assert np.all(np.diff(dec.eigenvalues) >= 0)
    assert np.max(np.abs(v @ v.conj().T - np.eye(h.shape[0]))) <= 1e-10
    assert np.allclose(np.linalg.norm(v, axis=1), 1.0, atol=1e-12)
    lam = dec.eigenvalues
    assert abs(lam.sum() - np.trace(h).real) <= 1e-9 * max(1.0, np.abs(lam).sum())
    assert abs((lam ** 2).sum() - np.linalg.norm(h) ** 2) <= 1e-9 * np.linalg.norm(h) ** 2


def test_diag_two_by_two(backend):
    dec = hermitian_eig(np.diag([2.0, 1.0]), backend=backend)
    assert np.allclose(dec.eigenvalues, [1.0, 2.0])
    assert np.allclose(np.abs(dec.vectors), [[0, 1], [1, 0]])


def test_swap_matrix(backend):
    dec = hermitian_eig(np.array([[0.0, 1.0], [1.0, 0.0]]), backend=backend)
    assert np.allclose(dec.eigenvalues, [-1.0, 1.0], atol=1e-15)
    v = np.array([fix_phase(r) for r in dec.vectors])
    s = 1 / np.sqrt(2)
    assert np.allclose(v, [[s, -s], [s, s]], atol=1e-14)


@pytest.mark.parametrize("d", [1, 2, 3, 9, 33])
def test_gue_decomposition(backend, rng, d):
    h = sample_wigner(gue_spec(), d, rng)
    dec = hermitian_eig(h, backend=backend)
    _check_decomposition(h, dec)
    assert np.allclose(dec.eigenvalues, np.linalg.eigvalsh(h), atol=1e-12)


def test_backends_agree(rng):
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    h = sample_wigner(gue_spec(), 17, rng)
    a = hermitian_eig(h, backend="compiled")
    b = hermitian_eig(h, backend="python")
    assert np.allclose(a.eigenvalues, b.eigenvalues, atol=1e-13)
    # eigenvectors agree up to a phase per row
    ov = np.abs(np.sum(a.vectors * b.vectors.conj(), axis=1))
    assert np.allclose(ov, 1.0, atol=1e-10)


def test_deterministic(rng):
    h = sample_wigner(gue_spec(), 20, rng)
    a, b = hermitian_eig(h), hermitian_eig(h)
    assert np.array_equal(a.vectors, b.vectors)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)


def test_degenerate_and_special(backend):
    _check_decomposition(np.eye(5), hermitian_eig(np.eye(5), backend=backend))
    z = np.zeros((4, 4))
    dec = hermitian_eig(z, backend=backend)
    assert np.all(dec.eigenvalues == 0)
    # block diagonal matrix with decoupled tridiagonal pieces
    h = np.zeros((6, 6), dtype=complex)
    h[0, 1] = h[1, 0] = 1.0
    h[3, 4] = 2j
    h[4, 3] = -2j
    _check_decomposition(h, hermitian_eig(h, backend=backend))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2 ** 32 - 1))
def test_random_hermitian_property(d, seed):
    r = np.random.default_rng(seed)
    a = r.standard_normal((d, d)) + 1j * r.standard_normal((d, d))
    h = a + a.conj().T
    _check_decomposition(h, hermitian_eig(h))


def test_non_hermitian_rejected():
    with pytest.raises(ValidationError):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValidationError):
        hermitian_eig(np.ones((2, 3)))
    with pytest.raises(ValidationError):
        hermitian_eig(np.array([[np.nan]]))


def test_convergence_error_names_index(monkeypatch):
    monkeypatch.setattr(linalg, "MAX_SWEEPS", 0)
    with pytest.raises(ConvergenceError) as exc:
        hermitian_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert exc.value.index == 0
    assert "index 0" in str(exc.value)


def test_fix_phase():
    assert np.allclose(fix_phase([1j, 0]), [1, 0])
    v = np.array([3.0, 1j, -2.0])
    assert np.array_equal(fix_phase(v), v.astype(complex))
    # ties go to the smallest index
    w = fix_phase([1j, 1.0])
    assert w[0] == 1.0
    with pytest.raises(ValidationError):
        fix_phase([0, 0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=8))
def test_fix_phase_preserves_modulus(vals):
    v = np.array(vals)
    if not np.any(np.abs(v) > 0):
        return
    w = fix_phase(v)
    assert np.allclose(np.abs(w), np.abs(v))
    j = int(np.argmax(np.abs(v)))
    assert w[j].real > 0 and abs(w[j].imag) <= 1e-12 * abs(w[j])


def test_haar_unitary_basic(rng):
    for d in (1, 2, 7):
        check_unitary(haar_unitary(d, rng))
    u = haar_unitary(1, rng, size=2000)[:, 0, 0]
    assert np.allclose(np.abs(u), 1.0)
    # phase is uniform: first circular moment vanishes
    assert abs(u.mean()) < 4 / np.sqrt(2000)
    with pytest.raises(ValidationError):
        haar_unitary(0, rng)


def test_haar_moments(rng):
    n = 100_000
    u = haar_unitary(8, rng, size=n)[:, 0, 0]
    a2 = np.abs(u) ** 2
    assert abs(a2.mean() - 1 / 8) <= 3 * a2.std(ddof=1) / np.sqrt(n)
    u4 = np.abs(haar_unitary(4, rng, size=n)[:, 1, 2]) ** 4
    assert abs(u4.mean() - 0.1) <= 3 * u4.std(ddof=1) / np.sqrt(n)


def test_haar_column_symmetry(rng):
    n, d = 10_000, 6
    u = haar_unitary(d, rng, size=n)
    for q in (2, 4):
        a = np.abs(u[:, :, 0]) ** q
        b = np.abs(u[:, :, d - 1]) ** q
        a, b = a.mean(axis=1), b.mean(axis=1)
        se = np.sqrt(a.var(ddof=1) / n + b.var(ddof=1) / n)
        assert abs(a.mean() - b.mean()) <= 4 * se


def test_check_unitary_rejects():
    with pytest.raises(ValidationError):
        check_unitary(2 * np.eye(3))
