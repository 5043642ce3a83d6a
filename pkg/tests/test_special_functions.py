import math

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import lambertw as scipy_lambertw

from solvers.special_functions import BRANCH_POINT, Branch, lambert_w
from utils.error_handling import DomainError


def _principal_samples(rng, count):
    near = BRANCH_POINT + 10.0 ** rng.uniform(-14, -0.5, count)
    wide = 10.0 ** rng.uniform(-12, 10, count)
    negative = -rng.uniform(0.0, 0.3678, count // 4)
    return np.concatenate([near, wide, negative])


def _lower_samples(rng, count):
    return np.concatenate(
        [BRANCH_POINT + 10.0 ** rng.uniform(-14, -0.5, count), -(10.0 ** rng.uniform(-300, -0.5, count))]
    )


@pytest.mark.parametrize("branch, sampler", [(Branch.PRINCIPAL, _principal_samples), (Branch.NEGATIVE, _lower_samples)])
def test_round_trip_residual(branch, sampler):
    x = sampler(np.random.default_rng(0), 5000)
    w = lambert_w(branch, x)
    residual = np.abs(w * np.exp(w) - x)
    assert np.all(residual <= 1e-12 * np.maximum(1.0, np.abs(x)))


@pytest.mark.parametrize("branch, sampler", [(Branch.PRINCIPAL, _principal_samples), (Branch.NEGATIVE, _lower_samples)])
def test_matches_scipy(branch, sampler):
    x = sampler(np.random.default_rng(1), 1000)
    # W is ill-conditioned right at -1/e; the round-trip test covers that region
    x = x[x > BRANCH_POINT + 1e-6]
    expected = scipy_lambertw(x, k=branch.value).real
    assert np.allclose(lambert_w(branch, x), expected, rtol=1e-10, atol=0.0)


def test_branch_ordering():
    x = np.linspace(BRANCH_POINT * 0.999999, -1e-6, 2001)
    lower = lambert_w(Branch.NEGATIVE, x)
    upper = lambert_w(Branch.PRINCIPAL, x)
    assert np.all(lower < -1.0)
    assert np.all(upper > -1.0)
    assert np.all(upper <= 0.0)


def test_continuity_at_branch_point():
    # |W + 1| ~ sqrt(2 e eps) near -1/e
    x = BRANCH_POINT + 1e-13
    assert abs(lambert_w(Branch.PRINCIPAL, x) + 1.0) <= 1e-6
    assert abs(lambert_w(Branch.NEGATIVE, x) + 1.0) <= 1e-6
    assert lambert_w(Branch.PRINCIPAL, BRANCH_POINT) == pytest.approx(-1.0, abs=1e-7)
    assert lambert_w(Branch.NEGATIVE, BRANCH_POINT) == pytest.approx(-1.0, abs=1e-7)


def test_known_values():
    assert lambert_w(Branch.PRINCIPAL, 0.0) == 0.0
    assert lambert_w(Branch.PRINCIPAL, math.e) == pytest.approx(1.0, rel=1e-15)
    assert lambert_w(Branch.NEGATIVE, -2.0 * math.exp(-2.0)) == pytest.approx(-2.0, rel=1e-14)
    assert lambert_w(Branch.PRINCIPAL, -0.5 * math.exp(-0.5)) == pytest.approx(-0.5, rel=1e-14)


def test_scalar_and_array_outputs():
    assert isinstance(lambert_w(Branch.PRINCIPAL, 1.0), float)
    out = lambert_w(Branch.NEGATIVE, np.full((3, 4), -0.1))
    assert out.shape == (3, 4)


def test_rounding_below_branch_point_is_snapped():
    assert lambert_w(Branch.NEGATIVE, BRANCH_POINT - 1e-17) == pytest.approx(-1.0, abs=1e-7)


def test_domain_errors():
    with pytest.raises(DomainError):
        lambert_w(Branch.PRINCIPAL, -0.5)
    with pytest.raises(DomainError):
        lambert_w(Branch.NEGATIVE, 0.0)
    with pytest.raises(DomainError):
        lambert_w(Branch.NEGATIVE, 1.0)
    with pytest.raises(DomainError):
        lambert_w(Branch.PRINCIPAL, math.nan)


def test_lower_branch_matches_bisection():
    expected = brentq(lambda w: w * math.exp(w) + 0.1, -50.0, -1.0, xtol=1e-15)
    assert lambert_w(Branch.NEGATIVE, -0.1) == pytest.approx(expected, rel=1e-12)
    assert lambert_w(Branch.NEGATIVE, -0.1) < -1.0
