import math

import pytest

from pendkit.errors import BoundInapplicableError, NumericInconsistencyError, ParameterError
from pendkit.model_geometry import ModelManifold
from pendkit.spectrum import (
    SpectrumReport,
    buckley_koskela_gap,
    cheng_upper_bound,
    divergence_lower_bound,
    extrapolate_limit,
    lambda_ball,
    lambda_manifold,
    poli_decay,
)

import oracles


def test_ball_eigenvalue_above_limit():
    # lam(B_15) in H^2 is 1/4 + O(R^-2), not 1/4 itself
    lam = lambda_ball(ModelManifold.hyperbolic(2), 2, 15).lam
    assert 0.25 < lam < 0.25 + 15.0 / 15**2


def test_h3_ball_sequence():
    rep = lambda_manifold(ModelManifold.hyperbolic(3), 2, R_list=(5, 10, 20), r_max=40)
    for R, lam in rep.lambda_balls:
        assert lam == pytest.approx(oracles.h3_ball_eigenvalue(R), rel=1e-6)
    assert rep.lambda_limit == pytest.approx(1.0, rel=1e-3)


def test_extrapolation_exact_on_power_law():
    R = [10.0, 20.0, 40.0]
    lam = [3.0 + 5.0 * r**-1.7 for r in R]
    L, err = extrapolate_limit(R, lam)
    assert L == pytest.approx(3.0, rel=1e-10)
    assert err == pytest.approx(5.0 * 40**-1.7, rel=1e-8)


def test_extrapolation_fallback():
    L, err = extrapolate_limit([1, 2, 3], [1.0, 1.0, 1.0])
    assert (L, err) == (1.0, 0.0)


def test_extrapolation_clamps_at_zero():
    R = [10.0, 20.0, 40.0]
    L, _ = extrapolate_limit(R, [-0.01 + r**-2 for r in R])
    assert L == 0.0


@pytest.mark.parametrize(
    "model,p,exact",
    [
        (ModelManifold.hyperbolic(2), 2.0, 0.25),
        (ModelManifold.hyperbolic(4), 3.0, 1.0),
        (ModelManifold.complex_hyperbolic(1), 1.5, (4 / 1.5) ** 1.5),
        (ModelManifold.quaternionic_hyperbolic(1), 2.0, 9.0),
    ],
)
def test_limit_is_sharp(model, p, exact):
    rep = lambda_manifold(model, p)
    assert rep.lambda_limit == pytest.approx(exact, rel=5e-3)
    assert rep.lower_bound == pytest.approx(exact, rel=1e-12)
    assert rep.upper_bound == pytest.approx(exact, rel=1e-6)
    assert rep.consistent
    assert abs(rep.bk_gap) < 5e-3


@pytest.mark.parametrize("k", [0, 2])
def test_polynomial_limit_vanishes(k):
    rep = lambda_manifold(ModelManifold.polynomial(k), 2.0)
    assert rep.regime == "polynomial"
    assert rep.lambda_limit <= 1e-3
    assert rep.upper_bound == 0.0 and rep.consistent


def test_divergence_bound_on_compact_window():
    # delta_r = 2 coth r decreases to 2, so the infimum over [1, 5] is at r = 5
    val = divergence_lower_bound(ModelManifold.hyperbolic(3), 2.0, 1.0, 5.0)
    assert val == pytest.approx((2 / math.tanh(5.0) / 2) ** 2, rel=1e-12)


def test_divergence_bound_needs_positive_mean_curvature():
    r = [1.0 + 0.1 * i for i in range(40)]
    model = ModelManifold.tabulated(r, [math.exp(-x) for x in r], dim=2)
    with pytest.raises(BoundInapplicableError):
        divergence_lower_bound(model, 2.0, 1.5, 4.5)


def test_cheng_bound_zero_for_polynomial_growth():
    assert cheng_upper_bound(ModelManifold.euclidean(3), 2.0, r_max=200) == 0.0


def test_buckley_koskela_gap_sign():
    H3 = ModelManifold.hyperbolic(3)
    assert buckley_koskela_gap(H3, 2.0, 1.0) == pytest.approx(0.0, abs=1e-8)
    assert buckley_koskela_gap(H3, 2.0, 0.25) > 0
    with pytest.raises(ParameterError):
        buckley_koskela_gap(H3, 2.0, -1.0)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_poli_decay_exact(k, p):
    (r, val), = poli_decay(ModelManifold.polynomial(k), p, [1e3])
    assert val == pytest.approx(2 ** (k + 1) * 1e3**-p, rel=1e-10)


def test_report_csv():
    rep = SpectrumReport("x", 2.0, [(10.0, 1.5), (20.0, 1.2)], 1.0, 0.01, 0.9, 1.1, 0.0, "exponential", True)
    lines = rep.to_csv().splitlines()
    assert lines[0] == "model,p,R,lambda,lower,upper,gap"
    assert len(lines) == 4 and lines[-1].startswith("x,2.0,inf,1.0")


def test_monotonicity_violation_detected(monkeypatch):
    import pendkit.spectrum as sp

    monkeypatch.setattr(sp, "_lambda_ball_refined", lambda model, p, R, size: float(R))
    with pytest.raises(NumericInconsistencyError):
        lambda_manifold(ModelManifold.hyperbolic(2), 2.0)
