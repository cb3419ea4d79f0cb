"""Invariants checked over randomly drawn inputs."""
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from pendkit.dichotomy import ImmersedEndProfile, sobolev_probe, theorem2_h_tracker
from pendkit.discrete_solver import build_grid, p_rayleigh_minimize, rayleigh_quotient, solve_p_dirichlet
from pendkit.model_geometry import ModelManifold, delta_r, growth_profile, log_volume
from pendkit.radial_potential import (
    annulus_potential,
    caccioppoli_sweep,
    classify_end,
    p_capacity,
)
from pendkit.spectrum import lambda_ball, lambda_manifold, poli_decay

BUILTINS = [
    ModelManifold.euclidean(2),
    ModelManifold.euclidean(4),
    ModelManifold.hyperbolic(2),
    ModelManifold.hyperbolic(4),
    ModelManifold.complex_hyperbolic(1),
    ModelManifold.complex_hyperbolic(2),
    ModelManifold.quaternionic_hyperbolic(1),
    ModelManifold.quaternionic_hyperbolic(2),
    ModelManifold.polynomial(0),
    ModelManifold.polynomial(2.5),
]

models = st.sampled_from(BUILTINS)
exponents = st.sampled_from([1.5, 2.0, 3.0])
fast = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])


# geometry ---------------------------------------------------------------------------

@fast
@given(models, st.floats(0.05, 20.0), st.floats(1e-3, 5.0))
def test_volume_strictly_increasing(model, r, dr):
    assert log_volume(model, r + dr) > log_volume(model, r)


@fast
@given(models, st.floats(0.1, 30.0))
def test_delta_r_is_log_derivative_of_volume_derivative(model, r):
    h = 1e-5 * r
    fd = (model.log_area(r + h) - model.log_area(r - h)) / (2 * h)
    assert delta_r(model, r) == pytest.approx(float(fd), rel=1e-6, abs=1e-9)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_quaternionic_growth_exponent(m):
    prof = growth_profile(ModelManifold.quaternionic_hyperbolic(m), 40.0)
    assert prof.a == pytest.approx(2 * (2 * m + 1), abs=1e-2)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_euclidean_growth_is_polynomial_of_degree_n(n):
    prof = growth_profile(ModelManifold.euclidean(n), 1000.0)
    assert prof.regime == "polynomial"
    assert prof.poly_degree == pytest.approx(n, abs=1e-2)


# potential theory -----------------------------------------------------------------

@fast
@given(models, exponents, st.floats(1.0, 3.0), st.floats(0.5, 3.0), st.floats(0.5, 5.0))
def test_exhaustion_potentials_increase(model, p, r0, d1, d2):
    R1, R2 = r0 + d1, r0 + d1 + d2
    f1 = annulus_potential(model, p, r0, R1, size=101)
    f2 = annulus_potential(model, p, r0, R2, size=101)
    x = f1.grid.nodes
    assert np.all(f1.values <= f2(x) * (1 + 1e-10) + 1e-14)


@fast
@given(models, exponents, st.sampled_from([0.1, 10.0]))
def test_verdict_independent_of_r0_and_scale(model, p, c):
    verdicts = {classify_end(model, p, r0).verdict for r0 in (1.0, 2.0, 5.0)}
    verdicts.add(classify_end(model.rescaled(c), p, 1.0).verdict)
    assert len(verdicts) == 1


@fast
@given(models, exponents, st.floats(1.5, 4.0), st.floats(0.5, 6.0))
def test_capacity_nonincreasing_in_R(model, p, R, dR):
    assert p_capacity(model, p, 1.0, R + dR) <= p_capacity(model, p, 1.0, R) * (1 + 1e-12)


@pytest.mark.parametrize("model", [ModelManifold.hyperbolic(3), ModelManifold.complex_hyperbolic(1)])
@pytest.mark.parametrize("p", [1.5, 3.0])
def test_capacity_continuous_at_infinity(model, p):
    assert p_capacity(model, p, 1.0, 60.0) == pytest.approx(p_capacity(model, p, 1.0), rel=1e-6)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 10_000))
def test_caccioppoli_ratio_at_most_one(seed):
    assert max(r.ratio for r in caccioppoli_sweep(10, seed=seed, size=801)) <= 1.0


# discrete solver ------------------------------------------------------------------

@fast
@given(models, exponents, st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_discrete_maximum_principle(model, p, a, b):
    grid = build_grid(1.0, 3.0, 201)
    u = solve_p_dirichlet(model, p, grid, bc=(a, b)).values
    lo, hi = min(a, b), max(a, b)
    assert np.all(u >= lo - 1e-12) and np.all(u <= hi + 1e-12)


@fast
@given(models, exponents, st.sampled_from([0.1, 10.0]))
def test_scaling_A_changes_nothing(model, p, c):
    grid = build_grid(1.0, 3.0, 201)
    u1 = solve_p_dirichlet(model, p, grid).values
    u2 = solve_p_dirichlet(model.rescaled(c), p, grid).values
    np.testing.assert_allclose(u1, u2, atol=1e-8)
    eg = build_grid(0.0, 3.0, 129)
    l1 = p_rayleigh_minimize(model, p, eg).lam
    l2 = p_rayleigh_minimize(model.rescaled(c), p, eg).lam
    assert l1 == pytest.approx(l2, rel=1e-9)


@fast
@given(models, exponents, st.floats(1e-3, 1e3))
def test_quotient_homogeneous(model, p, c):
    grid = build_grid(0.0, 3.0, 129)
    res = p_rayleigh_minimize(model, p, grid)
    u = res.eigenfunction.values
    assert rayleigh_quotient(model, p, grid, c * u) == pytest.approx(res.quotient, rel=1e-10)


@pytest.mark.parametrize("model,p", [(ModelManifold.hyperbolic(3), 2.0), (ModelManifold.euclidean(3), 3.0)])
def test_refinement_converges(model, p):
    lams = [p_rayleigh_minimize(model, p, build_grid(0.0, 4.0, n)).lam for n in (129, 257, 513, 1025)]
    d = np.abs(np.diff(lams))
    assert np.all(d[1:] < d[:-1])
    orders = np.log2(d[:-1] / d[1:])
    assert np.all(orders >= 1.0)


# spectrum ---------------------------------------------------------------------------

@settings(max_examples=8, deadline=None)
@given(models, exponents)
def test_domain_monotonicity(model, p):
    lams = [lambda_ball(model, p, R, 513).lam for R in (4.0, 8.0, 16.0)]
    assert lams[0] > lams[1] > lams[2]


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_poli_bound_dominates_estimate(k):
    model = ModelManifold.polynomial(k)
    decay = [v for _, v in poli_decay(model, 2.0, [10.0, 100.0, 1000.0])]
    lam = lambda_manifold(model, 2.0).lambda_limit
    assert min(decay) >= lam
    assert decay[-1] < decay[0]


# dichotomy ----------------------------------------------------------------------------

@settings(max_examples=10, deadline=None)
@given(models, exponents, st.integers(10, 30), st.integers(1, 30), st.integers(0, 100))
def test_probe_monotone_in_family(model, p, n, extra, seed):
    small = sobolev_probe(model, p, 2 * p, family_size=n, seed=seed)
    big = sobolev_probe(model, p, 2 * p, family_size=n + extra, seed=seed)
    assert big.C >= small.C
    assert all(big.C >= q for _, q in big.probe_trace)


@settings(max_examples=10, deadline=None)
@given(st.floats(1.2, 2.8), st.floats(1.5, 4.0), st.lists(st.floats(4.0, 40.0), min_size=2, max_size=5))
def test_h_nondecreasing_and_bounded(p, r0, rs):
    prof = ImmersedEndProfile(3, ModelManifold.hyperbolic(3, r_min=1.0))
    rep = theorem2_h_tracker(prof, p, r0, sorted(set(rs)))
    hs = np.array([h for _, h in rep.h_trace])
    assert np.all(np.diff(hs) >= -1e-8 * max(hs.max(), 1e-300))
    assert math.isfinite(rep.h_bound) and np.all(hs <= rep.h_bound)
