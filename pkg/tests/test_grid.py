import json
import math

import numpy as np
import pytest

from polarlab.grid import (
    DistributionFunction,
    GridError,
    GridFunction,
    GridSpec,
    LorentzParams,
    decay_bound_check,
    discrete_gradient_energy,
    distribution_function,
    is_radially_decreasing,
    lorentz_quasinorm,
    lp_norm,
    pointwise_decay_bound,
    radial_pointwise_bound_check,
    tail_norm_bound_check,
)
from polarlab.profiles import (
    gaussian,
    hat,
    indicator_interval,
    power_decay,
    random_radial_decreasing,
)
from polarlab.rearrange import schwarz_rearrange


def test_spec_validation():
    with pytest.raises(GridError):
        GridSpec(3, 1.0, 8)
    with pytest.raises(GridError):
        GridSpec(1, 1.0, 7)  # odd cell count
    with pytest.raises(GridError):
        GridSpec(1, -1.0, 8)
    spec = GridSpec(2, 2.5, 10)
    assert spec.h * spec.cells_per_axis == pytest.approx(2 * spec.half_width, rel=0, abs=0)


def test_axis_centers_mirror_exactly():
    spec = GridSpec(1, 3.0, 48)
    c = spec.axis_centers()
    assert np.all(c == -c[::-1])
    assert spec.boundary_index(0.0) == 24
    with pytest.raises(GridError):
        spec.boundary_index(0.03)


def test_lp_norm_zero_and_indicator():
    spec = GridSpec(1, 2.0, 32)
    zero = GridFunction(spec, np.zeros(32))
    assert lp_norm(zero, 2.0) == 0.0
    u = indicator_interval(spec, 0.0, 1.0)
    assert lp_norm(u, 2.0) == pytest.approx(1.0, rel=1e-14)


def test_lp_norm_matches_manual_sum(rng):
    spec = GridSpec(2, 1.0, 8)
    v = rng.normal(size=(8, 8))
    u = GridFunction(spec, v)
    for p in (1.0, 2.0, 3.5):
        manual = (spec.cell_measure * np.sum(np.abs(v) ** p)) ** (1 / p)
        assert lp_norm(u, p) == pytest.approx(manual, rel=1e-14)


def test_counterexample_profile_l1_matches_midpoint_sum():
    # independent arithmetic on the sampled values
    from polarlab.counterexample import CounterexampleSpec, build_profile_1d

    spec = CounterexampleSpec(delta=0.1, epsilon=0.05, cells_per_delta=4)
    u = build_profile_1d(spec)
    manual = u.spec.h * float(np.sum(np.abs(u.values)))
    assert lp_norm(u, 1.0) == pytest.approx(manual, rel=1e-15)


def test_distribution_function_indicator():
    spec = GridSpec(1, 2.0, 32)
    u = indicator_interval(spec, -1.0, 1.0)
    d = distribution_function(u)
    assert d.mu(0.5) == pytest.approx(2.0)
    assert d.mu(1.0) == 0.0
    assert d.mu(0.999999) == pytest.approx(2.0)


def test_distribution_counts_direct():
    spec = GridSpec(1, 2.0, 8)
    u = GridFunction(spec, [3.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    d = distribution_function(u)
    h = spec.h
    assert d.mu(0.5) == pytest.approx(3 * h)
    assert d.mu(2.0) == pytest.approx(1 * h)


def test_distribution_equimeasurability_permutation(rng):
    spec = GridSpec(1, 1.0, 16)
    v = rng.uniform(0, 1, 16)
    u = GridFunction(spec, v)
    w = GridFunction(spec, rng.permutation(v))
    assert distribution_function(u) == distribution_function(w)
    w2 = GridFunction(spec, v + 1e-9 * (np.arange(16) == 3))
    assert distribution_function(u) != distribution_function(w2)


def test_lorentz_single_step():
    spec = GridSpec(1, 2.0, 32)
    u = indicator_interval(spec, -1.0, 1.0)
    assert lorentz_quasinorm(u, LorentzParams(2.0, math.inf)) == pytest.approx(math.sqrt(2))
    assert lorentz_quasinorm(u, LorentzParams(2.0, 2.0)) == pytest.approx(1.0)
    zero = GridFunction(spec, np.zeros(32))
    assert lorentz_quasinorm(zero, LorentzParams(1.5, 3.0)) == 0.0


def test_lorentz_theta_q_equals_lp_power(rng):
    # p * integral t^(p-1) mu(t) dt == ||u||_p^p: two independent computations
    for spec in (GridSpec(1, 1.5, 24), GridSpec(2, 1.0, 10)):
        v = rng.uniform(-2, 2, spec.shape)
        u = GridFunction(spec, v)
        for p in (1.0, 2.0, 2.7):
            lhs = p * lorentz_quasinorm(u, LorentzParams(p, p))
            assert lhs == pytest.approx(lp_norm(u, p) ** p, rel=1e-12)


def test_decay_bound_indicator_example():
    spec = GridSpec(1, 2.0, 32)
    u = indicator_interval(spec, -1.0, 1.0)
    k = pointwise_decay_bound(u, LorentzParams(2.0, math.inf))
    assert k == pytest.approx(1.0, rel=1e-12)
    rep = decay_bound_check(u, LorentzParams(2.0, math.inf))
    assert rep["violations"] == 0


def test_decay_bound_rejects_non_radial():
    spec = GridSpec(1, 2.0, 32)
    x = spec.axis_centers()
    u = GridFunction(spec, np.where((x > 0) & (x < 1), x, 0.0))
    assert not is_radially_decreasing(u)
    with pytest.raises(ValueError):
        pointwise_decay_bound(u, LorentzParams(2.0, 2.0))


def test_decay_bound_random_radial_both_branches(rng):
    # exact inequality at every cell center, 1D; both Lorentz branches
    spec = GridSpec(1, 3.0, 60)
    for _ in range(20):
        u = random_radial_decreasing(spec, rng)
        for params in (LorentzParams(2.0, math.inf), LorentzParams(1.7, 2.5)):
            rep = decay_bound_check(u, params)
            assert rep["violations"] == 0


def test_radial_lp_pointwise_bound(rng):
    spec = GridSpec(1, 3.0, 60)
    for _ in range(20):
        u = random_radial_decreasing(spec, rng)
        rep = radial_pointwise_bound_check(u, 2.0)
        assert rep["violations"] == 0


def test_tail_bound_cases(rng):
    spec = GridSpec(1, 6.0, 120)
    zero = GridFunction(spec, np.zeros(120))
    rep = tail_norm_bound_check(zero, 2.0, 3.0, 4.0)
    assert rep["lhs"] == 0.0 and rep["rhs"] == 0.0
    u = power_decay(spec, 2.0)
    rep = tail_norm_bound_check(u, 2.0, 3.0, 4.0)
    assert rep["lhs"] <= rep["rhs"]
    ind = indicator_interval(spec, -1.0, 1.0)
    rep = tail_norm_bound_check(ind, 2.0, 3.0, 2.0)
    assert rep["lhs"] == 0.0
    for _ in range(20):
        u = random_radial_decreasing(spec, rng)
        rep = tail_norm_bound_check(u, 2.0, 3.0, 1.5)
        assert rep["lhs"] <= rep["rhs"] * (1 + 1e-14)


def test_gradient_energy_constant_and_hat():
    spec = GridSpec(1, 2.0, 4096)
    zero = GridFunction(spec, np.zeros(4096))
    assert discrete_gradient_energy(zero, 2.0) == 0.0
    u = hat(spec)
    assert discrete_gradient_energy(u, 2.0) == pytest.approx(2.0, rel=2e-3)


def test_gradient_energy_gaussian_converges():
    target = math.sqrt(math.pi / 2.0)
    errs = []
    for m in (256, 512, 1024):
        u = gaussian(GridSpec(1, 6.0, m))
        errs.append(abs(discrete_gradient_energy(u, 2.0) - target))
    assert errs[-1] < 1e-3 * target
    assert errs[2] < errs[0]


def test_is_radially_decreasing_modes(rng):
    spec = GridSpec(2, 1.0, 6)
    u = random_radial_decreasing(spec, rng)
    assert is_radially_decreasing(u, strict_ties=True)
    star = schwarz_rearrange(GridFunction(spec, rng.uniform(0, 1, (6, 6))))
    assert is_radially_decreasing(star)  # total-order notion, by construction


def test_json_roundtrip(rng):
    for spec in (GridSpec(1, 2.0, 16), GridSpec(2, 1.5, 6)):
        u = GridFunction(spec, rng.normal(size=spec.shape))
        v = GridFunction.from_json(u.to_json())
        assert v.spec == u.spec
        assert np.array_equal(v.values, u.values)
        doc = json.loads(u.to_json())
        assert set(doc) == {"dim", "half_width", "cells_per_axis", "values"}


def test_values_are_immutable(rng):
    u = GridFunction(GridSpec(1, 1.0, 8), rng.normal(size=8))
    with pytest.raises(ValueError):
        u.values[0] = 5.0


def test_rejects_nonfinite():
    with pytest.raises(GridError):
        GridFunction(GridSpec(1, 1.0, 4), [1.0, np.nan, 0.0, 0.0])
