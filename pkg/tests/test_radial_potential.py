import math

import numpy as np
import pytest

from pendkit.errors import ContractError, ParameterError
from pendkit.grids import build_grid, cutoff
from pendkit.model_geometry import ModelManifold
from pendkit.radial_potential import (
    HYPERBOLIC,
    PARABOLIC,
    annulus_potential,
    caccioppoli_sweep,
    check_caccioppoli,
    classify_end,
    conductance_integral,
    p_capacity,
    p_energy,
    reflect,
)

import oracles

E3 = ModelManifold.euclidean(3)


def test_conductance_closed_forms():
    assert conductance_integral(E3, 2, 1, 2) == pytest.approx(0.5, rel=1e-12)
    assert conductance_integral(ModelManifold.euclidean(2), 2, 1) == math.inf
    # int_1^inf dt / sinh t = -log tanh(1/2)
    assert conductance_integral(ModelManifold.hyperbolic(2), 2, 1) == pytest.approx(
        -math.log(math.tanh(0.5)), rel=1e-10
    )


@pytest.mark.parametrize("n,p", [(3, 1.5), (4, 2.0), (5, 3.0), (6, 4.5), (3, 2.5)])
@pytest.mark.parametrize("R", [2.0, 7.0, math.inf])
def test_euclidean_conductance(n, p, R):
    model = ModelManifold.euclidean(n)
    assert conductance_integral(model, p, 1.0, R) == pytest.approx(
        oracles.euclidean_conductance(n, p, 1.0, R), rel=1e-10
    )


@pytest.mark.parametrize(
    "kind,param,model",
    [
        ("ch", 1, ModelManifold.complex_hyperbolic(1)),
        ("qh", 2, ModelManifold.quaternionic_hyperbolic(2)),
        ("hyperbolic", 3, ModelManifold.hyperbolic(3)),
    ],
)
@pytest.mark.parametrize("p", [1.5, 3.0])
def test_tail_conductance_matches_mpmath(kind, param, model, p):
    assert conductance_integral(model, p, 1.0) == pytest.approx(
        oracles.mp_conductance(kind, param, p, 1.0, math.inf), rel=1e-9
    )


def test_capacities():
    assert p_capacity(E3, 2, 1, 2) == pytest.approx(2.0, rel=1e-12)
    assert p_capacity(E3, 2, 1) == pytest.approx(1.0, rel=1e-12)
    assert p_capacity(ModelManifold.euclidean(2), 2, 1) == 0.0


def test_capacity_is_energy_of_potential():
    for R, cap in ((2.0, 2.0), (math.inf, 1.0)):
        f = reflect(annulus_potential(E3, 2, 1, R))
        assert p_energy(E3, 2, f) == pytest.approx(cap, rel=1e-8)


def test_potential_values():
    f = annulus_potential(E3, 2, 1, 2)
    assert f(1.5) == pytest.approx(1 / 3, rel=1e-10)
    f4 = annulus_potential(ModelManifold.euclidean(4), 2, 1, 2)
    assert f4(math.sqrt(2)) == pytest.approx(1 / 3, rel=1e-10)


@pytest.mark.parametrize("n,p", [(3, 1.5), (4, 3.0), (5, 2.0)])
def test_potential_table_matches_closed_form(n, p):
    model = ModelManifold.euclidean(n)
    f = annulus_potential(model, p, 1.0, 4.0, size=301)
    exact = [oracles.euclidean_potential(n, p, 1.0, 4.0, r) for r in f.grid.nodes]
    np.testing.assert_allclose(f.values, exact, rtol=1e-10, atol=1e-13)


def test_parabolic_limit_potential_is_one():
    f = annulus_potential(ModelManifold.euclidean(2), 2, 1, math.inf)
    assert np.all(f.values == 1.0)


def test_hyperbolic_limit_potential_decays():
    f = annulus_potential(ModelManifold.hyperbolic(3), 2, 1, math.inf, r_plot=20)
    assert f.values[0] == 1.0
    assert f.values[-1] < 1e-10
    assert np.all(np.diff(f.values) <= 0)


@pytest.mark.parametrize(
    "n,p", [(n, n + d) for n in (2, 3, 4, 5, 6) for d in (-1.0, -0.5, 0.0, 1.0) if n + d > 1]
)
def test_parabolicity_of_euclidean(n, p):
    verdict = classify_end(ModelManifold.euclidean(n), p).verdict
    assert verdict == (HYPERBOLIC if p < n else PARABOLIC)


@pytest.mark.parametrize(
    "model",
    [ModelManifold.hyperbolic(2), ModelManifold.complex_hyperbolic(1), ModelManifold.quaternionic_hyperbolic(1)],
)
@pytest.mark.parametrize("p", [1.5, 2.0, 10.0])
def test_exponential_ends_are_hyperbolic(model, p):
    res = classify_end(model, p)
    assert res.hyperbolic and math.isfinite(res.tail_integral)


@pytest.mark.parametrize("k,p,expected", [(0, 1.5, PARABOLIC), (1, 1.5, HYPERBOLIC), (1, 2.0, PARABOLIC), (3, 3.5, HYPERBOLIC)])
def test_polynomial_ends(k, p, expected):
    # A = r^k is p-hyperbolic iff k > p - 1
    assert classify_end(ModelManifold.polynomial(k), p).verdict == expected


def test_truncated_end_is_parabolic():
    r = np.linspace(1, 3, 20)
    model = ModelManifold.tabulated(r, np.exp(r), dim=2)
    assert classify_end(model, 2.0, 1.5).verdict == PARABOLIC


def test_bad_p_rejected():
    with pytest.raises(ParameterError):
        p_capacity(E3, 1.0, 1, 2)


# Caccioppoli ----------------------------------------------------------------------

def test_caccioppoli_on_single_configuration():
    u = reflect(annulus_potential(E3, 2, 1, 3, size=2001))
    phi = cutoff(u.grid, (1, 2.8), (1, 2.0))
    res = check_caccioppoli(E3, 2, u, phi)
    assert res.holds and 0 < res.ratio < 1


def test_caccioppoli_contract_checks():
    u = annulus_potential(E3, 2, 1, 3, size=201)
    bad = reflect(u)
    bad.values[0] = 0.5  # neither end zero
    phi = cutoff(u.grid, (1, 2.8), (1, 2.0))
    with pytest.raises(ContractError):
        check_caccioppoli(E3, 2, bad, phi)
    full = cutoff(u.grid, (1, 3), (1, 3))
    with pytest.raises(ContractError):
        check_caccioppoli(E3, 2, reflect(u), full)
    other = cutoff(build_grid(1, 3, 101), (1, 2.8), (1, 2.0))
    with pytest.raises(ContractError):
        check_caccioppoli(E3, 2, reflect(u), other)


@pytest.mark.parametrize("seed", [0, 7])
def test_caccioppoli_sweep(seed):
    res = caccioppoli_sweep(40, seed=seed, size=801)
    assert all(r.holds for r in res)
    assert max(r.ratio for r in res) <= 1.0
