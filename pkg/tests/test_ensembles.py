import numpy as np
import pytest

from wignerqe.ensembles import (ENTRY_LAWS, VarianceProfile, WignerEnsembleSpec, gue_spec, make_profile,
                                sample_wigner, validate_ensemble)
from wignerqe.errors import ValidationError


def test_flat_profile():
    p = make_profile("flat", 5)
    assert np.allclose(p.sigma2, 0.2)
    assert np.allclose(p.column_sums(), 1.0)


def test_banded_profile():
    p = make_profile("banded", 5, (0.5, 1))
    assert np.max(np.abs(p.column_sums() - 1.0)) <= 1e-12
    assert np.array_equal(p.sigma2, p.sigma2.T)


def test_two_block_profile():
    p = make_profile("two-block", 4, (0.3,), c1=2.0)
    assert p.sigma2.min() >= 1 / (2.0 * 4)
    assert np.max(np.abs(p.column_sums() - 1.0)) <= 1e-12
    q = make_profile("two-block", 7, (0.3,))
    assert np.max(np.abs(q.column_sums() - 1.0)) <= 1e-12


def test_profile_errors():
    with pytest.raises(ValidationError, match="banded"):
        make_profile("banded", 5, (1.5, 1))
    with pytest.raises(ValidationError, match="bounds"):
        make_profile("two-block", 4, (0.9,), c1=1.2)
    with pytest.raises(ValidationError, match="normalization"):
        VarianceProfile(np.full((3, 3), 0.4)).check(4.0)
    with pytest.raises(ValidationError):
        make_profile("triangular", 3)
    with pytest.raises(ValidationError):
        VarianceProfile(np.array([[0.5, 0.2], [0.1, 0.5]]))
    with pytest.raises(ValidationError):
        WignerEnsembleSpec("cauchy")


@pytest.mark.parametrize("law", ENTRY_LAWS)
@pytest.mark.parametrize("profile,params", [("flat", ()), ("banded", (0.5, 1)), ("two-block", (0.3,))])
def test_sample_is_hermitian(rng, law, profile, params):
    h = sample_wigner(WignerEnsembleSpec(law, profile, params), 6, rng)
    assert np.array_equal(h, h.conj().T)
    assert np.all(np.diag(h).imag == 0)


def test_rademacher_modulus(rng):
    h = sample_wigner(WignerEnsembleSpec("complex-rademacher"), 3, rng)
    off = h[~np.eye(3, dtype=bool)]
    assert np.allclose(np.abs(off), 1 / np.sqrt(3), rtol=0, atol=1e-15)


def test_gue_entry_variance(rng):
    n, d = 10_000, 5
    hs = np.array([sample_wigner(gue_spec(), d, rng) for _ in range(n)])
    a2 = np.abs(hs) ** 2
    mean = a2.mean(0)
    se = a2.std(0, ddof=1) / np.sqrt(n)
    assert np.all(np.abs(mean - 1 / d) <= 3.5 * se)


def test_validate_gue(rng):
    diag = validate_ensemble(gue_spec(), 16, 10_000, rng)
    assert diag.passed, diag.failed


@pytest.mark.parametrize("law", ["complex-rademacher", "complex-uniform"])
def test_validate_other_laws(rng, law):
    diag = validate_ensemble(WignerEnsembleSpec(law), 8, 2000, rng)
    assert diag.passed, diag.failed
    assert all(np.isfinite(v) for v in diag.moments.values())


def test_validate_planted_defect(rng):
    bad = VarianceProfile(np.full((5, 5), 1.1 / 5))
    spec = WignerEnsembleSpec("complex-gaussian", bad, check_profile=False)
    diag = validate_ensemble(spec, 5, 4000, rng)
    assert "normalization" in diag.failed


def test_validate_needs_samples(rng):
    with pytest.raises(ValidationError):
        validate_ensemble(gue_spec(), 4, 10, rng)


def test_moment_bound_finite():
    for law in ENTRY_LAWS:
        spec = WignerEnsembleSpec(law)
        assert all(np.isfinite(spec.moment_bound(q)) for q in (2, 4, 6, 8))
