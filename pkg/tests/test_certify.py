import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qvisolve import ValidationError
from qvisolve.certify import (
    Certificate,
    ProblemConstants,
    best_lambda,
    existence_bounds,
    full_certificate,
    radicand,
    theta,
)

from oracles import certificate_oracle, rel_err

EXAMPLE = ProblemConstants(L=3.0, rho=1.0, l=0.1, lam=0.1)

finite_L = st.floats(min_value=0.05, max_value=50.0)
fractions = st.floats(min_value=0.01, max_value=1.0)
small_l = st.floats(min_value=0.0, max_value=3.0)


# --------------------------------------------------------------------- theta

def test_theta_example_constants():
    # frozen from the 50-digit oracle: 0.1 + sqrt(0.89)
    assert theta(EXAMPLE) == pytest.approx(1.0433981132056603811, rel=1e-14)


def test_theta_vanishes_at_unit_step():
    assert theta(ProblemConstants(L=1.0, rho=1.0, l=0.0, lam=1.0)) == 0.0


def test_theta_small_lambda_limit():
    th = theta(ProblemConstants(L=3.0, rho=1.0, l=0.1, lam=1e-12))
    assert th == pytest.approx(1.1, abs=1e-9)


@given(finite_L, fractions, small_l, fractions)
def test_radicand_identity(L, ratio, l, lam_frac):
    rho = L * ratio
    lam = lam_frac * 3.0 / L
    c = ProblemConstants(L=L, rho=rho, l=l, lam=lam)
    direct = radicand(c)
    via_identity = (1.0 - lam * rho) ** 2 + lam**2 * (L**2 - rho**2)
    assert direct == pytest.approx(via_identity, rel=1e-12, abs=1e-12)
    assert direct >= -1e-15


def test_radicand_minimized_at_vertex():
    # the quadratic 1 - 2 lam rho + lam^2 L^2 has its vertex at lam = rho / L^2
    L, rho = 3.0, 1.0
    vertex = rho / L**2
    at_vertex = radicand(ProblemConstants(L=L, rho=rho, l=0.0, lam=vertex))
    for eps in (1e-3, 1e-2, 0.1):
        for lam in (vertex - eps * vertex, vertex + eps * vertex):
            assert radicand(ProblemConstants(L=L, rho=rho, l=0.0, lam=lam)) >= at_vertex


# ---------------------------------------------------------- existence bounds

def test_existence_bounds_values():
    assert existence_bounds(1.0) == (1.0, 1.0)
    strict, relaxed = existence_bounds(2.0)
    assert strict == pytest.approx(0.13397459621556135324, rel=1e-14)
    assert relaxed == 0.5
    strict, relaxed = existence_bounds(3.0)
    assert strict == pytest.approx(0.057190958417936634132, rel=1e-14)
    assert relaxed == pytest.approx(1.0 / 3.0, rel=1e-15)


def test_existence_bounds_reject_gamma_below_one():
    with pytest.raises(ValidationError):
        existence_bounds(0.99)


@given(st.floats(min_value=1.0, max_value=100.0))
def test_strict_bound_below_relaxed(gamma):
    strict, relaxed = existence_bounds(gamma)
    assert strict <= relaxed + 1e-15


def test_strict_bound_nonincreasing_in_gamma():
    gammas = np.linspace(1.0, 20.0, 200)
    values = [existence_bounds(g)[0] for g in gammas]
    assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))


# ------------------------------------------------------------ full_certificate

def test_certificate_example_constants():
    cert = full_certificate(EXAMPLE)
    # frozen 50-digit oracle values
    assert cert.Lambda == pytest.approx(0.65641754716735849547, rel=1e-13)
    assert cert.mu == pytest.approx(-1.0614175471673584955, rel=1e-13)
    assert cert.rate_r == pytest.approx(10.179389279233362288, rel=1e-13)
    assert cert.discrete_rhs == pytest.approx(1.046948949045872028, rel=1e-13)
    assert cert.Lambda + 2.0 == pytest.approx(2.6564175471673584955, rel=1e-13)
    assert not cert.continuous_ok
    assert not cert.discrete_ok
    assert not cert.existence_ok  # l = 0.1 > 0.0572
    assert cert.nesterov_ok       # l = 0.1 <= 1/3
    assert cert.radicand_ok
    assert cert.moving_rhs is None and not cert.moving_ok


def test_certificate_small_lambda_limit():
    # theta -> 1, Lambda -> 0+, r -> 6 as lambda -> 0 with L = rho = 1, l = 0
    cert = full_certificate(ProblemConstants(L=1.0, rho=1.0, l=0.0, lam=1e-12))
    assert cert.theta == pytest.approx(1.0, abs=1e-9)
    assert cert.Lambda == pytest.approx(0.0, abs=1e-9)
    assert cert.rate_r == pytest.approx(6.0, abs=1e-9)
    assert not cert.continuous_ok
    assert not cert.discrete_ok
    assert not cert.moving_ok


def test_discrete_rhs_at_unit_l():
    cert = full_certificate(ProblemConstants(L=1.0, rho=1.0, l=1.0, lam=0.5))
    assert cert.discrete_rhs == pytest.approx(math.sqrt(5.0) - 1.0, rel=1e-15)


def test_discrete_rhs_maximized_at_unit_l():
    values = []
    for l in np.linspace(0.0, 3.0, 301):
        cert = full_certificate(ProblemConstants(L=2.0, rho=1.0, l=float(l), lam=0.1))
        values.append(cert.discrete_rhs)
    top = int(np.argmax(values))
    assert np.linspace(0.0, 3.0, 301)[top] == pytest.approx(1.0)
    assert values[top] == pytest.approx(math.sqrt(5.0) - 1.0, rel=1e-15)


def test_moving_certificate_fields():
    cert = full_certificate(ProblemConstants(L=1.0, rho=1.0, l=0.6, lam=0.5, beta=0.3))
    # 2*sqrt(1 - 0.09 + 0.3) - 1 = 2*1.1 - 1
    assert cert.moving_rhs == pytest.approx(1.2, rel=1e-15)
    # condition uses theta with l = 2*beta: (1 + 0.6 + 0.5)(1 + 0.5) = 3.15 > 1.2
    assert not cert.moving_ok


def test_certificate_matches_oracle_on_random_tuples():
    rng = np.random.default_rng(1234)
    for _ in range(200):
        L = rng.uniform(0.1, 10.0)
        rho = L * rng.uniform(0.01, 1.0)
        l = rng.uniform(0.0, 3.0)
        lam = rng.uniform(1e-6, 3.0 / L)
        cert = full_certificate(ProblemConstants(L=L, rho=rho, l=l, lam=lam))
        ref = certificate_oracle(L, rho, l, lam)
        for name in ("gamma", "radicand", "theta", "mu", "Lambda", "rate_r",
                     "existence_bound", "nesterov_bound", "discrete_rhs"):
            assert rel_err(getattr(cert, name), ref[name]) <= 1e-12, name


def test_rate_below_one_implies_positive_mu():
    rng = np.random.default_rng(99)
    for _ in range(1000):
        L = rng.uniform(0.1, 10.0)
        rho = L * rng.uniform(0.01, 1.0)
        l = rng.uniform(0.0, 3.0)
        lam = rng.uniform(1e-6, 3.0 / L)
        cert = full_certificate(ProblemConstants(L=L, rho=rho, l=l, lam=lam))
        if cert.rate_r < 1.0:
            assert cert.mu > 0.0


def test_discrete_flag_matches_threshold_form():
    # discrete_ok iff (1+theta)(1+lam L) < discrete_rhs (for l in the range
    # where the threshold is real)
    rng = np.random.default_rng(77)
    for _ in range(500):
        L = rng.uniform(0.1, 10.0)
        rho = L * rng.uniform(0.01, 1.0)
        l = rng.uniform(0.0, 3.0)
        lam = rng.uniform(1e-6, 3.0 / L)
        cert = full_certificate(ProblemConstants(L=L, rho=rho, l=l, lam=lam))
        product = (1.0 + cert.theta) * (1.0 + lam * L)
        assert cert.discrete_ok == (product < cert.discrete_rhs)


def test_uniqueness_flags_at_unit_gamma():
    # l = 0 satisfies both uniqueness bounds even in the degenerate gamma = 1
    # limiting case (where only the convergence flags are false)
    cert = full_certificate(ProblemConstants(L=1.0, rho=1.0, l=0.0, lam=1e-12))
    assert cert.existence_ok and cert.nesterov_ok and cert.radicand_ok


def test_condition_equivalence_on_random_tuples():
    # [(1+theta)(1+lam L) + 1]^2 < 4 - l^2 + 2 l  iff  (1+theta)^2 (1+lam L)^2 < 2 mu
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        L = rng.uniform(0.1, 10.0)
        rho = L * rng.uniform(0.01, 1.0)
        l = rng.uniform(0.0, 3.0)
        lam = rng.uniform(1e-6, 3.0 / L)
        c = ProblemConstants(L=L, rho=rho, l=l, lam=lam)
        th = theta(c)
        mu = 0.5 - l * l / 2.0 - th + l - lam * L - lam * L * th
        product = (1.0 + th) * (1.0 + lam * L)
        squared_form = (product + 1.0) ** 2 < 4.0 - l * l + 2.0 * l
        mu_form = product**2 < 2.0 * mu
        assert squared_form == mu_form


# ----------------------------------------------------------------- validation

def test_constants_validation_messages():
    with pytest.raises(ValidationError, match="rho exceeds L"):
        ProblemConstants(L=1.0, rho=2.0, l=0.0, lam=0.1)
    with pytest.raises(ValidationError):
        ProblemConstants(L=1.0, rho=1.0, l=-0.1, lam=0.1)
    with pytest.raises(ValidationError):
        ProblemConstants(L=1.0, rho=1.0, l=0.0, lam=0.0)
    with pytest.raises(ValidationError):
        ProblemConstants(L=1.0, rho=1.0, l=0.0, lam=0.1, beta=-1.0)


def test_certificate_serialization_round_trip():
    cert = full_certificate(ProblemConstants(L=3.0, rho=1.0, l=0.1, lam=0.1, beta=0.2))
    text = json.dumps(cert.to_dict())
    again = Certificate.from_dict(json.loads(text))
    assert again == cert


# ---------------------------------------------------------------- best_lambda

def test_best_lambda_identity_constants():
    lam, cert = best_lambda(1.0, 1.0, 0.0, grid=10001)
    upper = 20.0
    assert 0.0 < lam <= upper
    assert cert.rate_r >= 1.0
    # brute force over the same documented grid
    grid = np.geomspace(upper * 1e-6, upper, 10001)
    rates = [full_certificate(ProblemConstants(L=1.0, rho=1.0, l=0.0, lam=float(g))).rate_r
             for g in grid]
    assert min(rates) >= 1.0
    best = int(np.argmin(rates))
    assert lam == pytest.approx(float(grid[best]), rel=1e-15)
    assert cert.rate_r == pytest.approx(rates[best], rel=1e-15)


def test_best_lambda_example_constants():
    lam, cert = best_lambda(3.0, 1.0, 0.1, grid=1001)
    assert 0.0 < lam <= 20.0 / 9.0
    assert math.isfinite(cert.rate_r)
    assert cert.rate_r >= 1.0


def test_best_lambda_rejects_small_grid():
    with pytest.raises(ValidationError):
        best_lambda(1.0, 1.0, 0.0, grid=1)


def test_best_lambda_deterministic():
    a = best_lambda(2.0, 0.5, 0.05, grid=501)
    b = best_lambda(2.0, 0.5, 0.05, grid=501)
    assert a[0] == b[0] and a[1] == b[1]
