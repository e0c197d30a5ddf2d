import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarlab.grid import (
    GridError,
    GridFunction,
    GridSpec,
    distribution_function,
    is_radially_decreasing,
    lp_norm,
)
from polarlab.halfspaces import AlignedHalfSpace, HalfSpace, HalfSpaceSchedule
from polarlab.profiles import (
    cosine_bump,
    indicator_interval,
    random_radial_decreasing,
    random_threshold_field,
)
from polarlab.rearrange import (
    contraction_check,
    iterate_polarization,
    polarization_partition,
    polarize,
    polarize_general,
    schwarz_rearrange,
)


def all_halfspaces(spec, max_offset=3):
    out = []
    for axis in range(spec.dim):
        for off in range(min(max_offset, spec.cells_per_axis // 2 - 1) + 1):
            out.append(AlignedHalfSpace(axis, off, 1))
            if off > 0:
                out.append(AlignedHalfSpace(axis, off, -1))
    return out


def test_polarize_fixes_radially_decreasing(rng):
    for spec in (GridSpec(1, 1.0, 16), GridSpec(2, 1.0, 8)):
        u = random_radial_decreasing(spec, rng)
        for hs in all_halfspaces(spec):
            assert np.array_equal(polarize(u, hs).values, u.values)


def test_polarize_multiset_preserved(rng):
    for spec in (GridSpec(1, 1.0, 16), GridSpec(2, 1.0, 8)):
        for hs in all_halfspaces(spec):
            u = GridFunction(spec, np.abs(rng.normal(size=spec.shape)))
            uh = polarize(u, hs)
            assert np.array_equal(np.sort(u.flat()), np.sort(uh.flat()))
            assert distribution_function(u) == distribution_function(uh)
            assert lp_norm(u, 3.0) == pytest.approx(lp_norm(uh, 3.0), rel=1e-15)


def test_polarize_idempotent(rng):
    spec = GridSpec(2, 1.0, 10)
    for hs in all_halfspaces(spec):
        u = GridFunction(spec, np.abs(rng.normal(size=spec.shape)))
        uh = polarize(u, hs)
        assert np.array_equal(polarize(uh, hs).values, uh.values)


def test_polarize_rejects_negative_escape():
    spec = GridSpec(1, 1.0, 8)
    u = GridFunction(spec, [-1.0, 0, 0, 0, 0, 0, 0, 0])
    with pytest.raises(GridError):
        polarize(u, AlignedHalfSpace(0, 2, 1))
    # nonnegative deep values are fine and unchanged
    u2 = GridFunction(spec, [1.0, 0, 0, 0, 0, 0, 0, 0])
    assert np.array_equal(polarize(u2, AlignedHalfSpace(0, 2, 1)).values, u2.values)


def test_polarize_max_into_halfspace(rng):
    spec = GridSpec(1, 1.0, 12)
    hs = AlignedHalfSpace(0, 0, 1)
    u = GridFunction(spec, rng.uniform(0, 1, 12))
    uh = polarize(u, hs)
    v = uh.values
    assert np.all(v[:6] >= v[11:5:-1] - 1e-15)
    assert np.all(np.maximum(u.values, u.values[::-1])[:6] == v[:6])


def test_partition_structure(rng):
    spec = GridSpec(2, 1.0, 10)
    u = GridFunction(spec, np.abs(rng.normal(size=spec.shape)))
    for hs in all_halfspaces(spec, max_offset=0):
        part = polarization_partition(u, hs)
        n = spec.n_cells
        pieces = [part.swap_h, part.keep_h, part.swap_c, part.keep_c, part.fixed]
        allidx = np.concatenate(pieces)
        assert allidx.size == n and np.unique(allidx).size == n
        # swap_c / keep_c are the exact reflections
        assert np.array_equal(part.partner[part.swap_h], part.swap_c)
        assert np.array_equal(part.partner[part.keep_h], part.keep_c)
        flat = u.flat()
        assert np.all(flat[part.swap_h] <= flat[part.swap_c])
        assert np.all(flat[part.keep_h] > flat[part.keep_c])
        # polarized values: u o sigma on the swap pairs, unchanged on keep
        uh = polarize(u, hs).flat()
        assert np.array_equal(uh[part.swap_h], flat[part.swap_c])
        assert np.array_equal(uh[part.swap_c], flat[part.swap_h])
        assert np.array_equal(uh[part.keep_h], flat[part.keep_h])
        assert np.array_equal(uh[part.keep_c], flat[part.keep_c])


def test_partition_constant_is_all_ties():
    spec = GridSpec(1, 1.0, 8)
    u = GridFunction(spec, np.zeros(8))
    part = polarization_partition(u, AlignedHalfSpace(0, 0, 1))
    assert part.keep_h.size == 0 and part.keep_c.size == 0
    assert part.swap_h.size == 4


def test_partition_requires_zero_on_deep_cells():
    spec = GridSpec(1, 1.0, 8)
    u = GridFunction(spec, [0.5, 0, 0, 0, 0, 0, 0, 0])
    with pytest.raises(GridError):
        polarization_partition(u, AlignedHalfSpace(0, 1, 1))


def test_schwarz_indicator_centered():
    spec = GridSpec(1, 2.0, 32)
    u = indicator_interval(spec, 0.25, 0.75)
    star = schwarz_rearrange(u)
    x = spec.axis_centers()
    mass = star.values.sum() * spec.h
    assert mass == pytest.approx(0.5, abs=spec.h)
    support = x[star.values > 0]
    assert np.abs(support).max() <= 0.25 + spec.h


def test_schwarz_fixed_point_and_equimeasurable(rng):
    for spec in (GridSpec(1, 1.0, 16), GridSpec(2, 1.0, 8)):
        u = GridFunction(spec, np.abs(rng.normal(size=spec.shape)))
        star = schwarz_rearrange(u)
        assert is_radially_decreasing(star)
        assert np.array_equal(schwarz_rearrange(star).values, star.values)
        assert distribution_function(star) == distribution_function(u)


def test_schwarz_uses_absolute_value(rng):
    spec = GridSpec(1, 1.0, 8)
    u = GridFunction(spec, [-3.0, 1.0, 0, 0, 0, 0, 0, 0])
    star = schwarz_rearrange(u)
    assert np.sort(star.flat()).tolist() == sorted([3.0, 1.0] + [0.0] * 6)


@settings(max_examples=60, deadline=None)
@given(
    vals=st.lists(st.floats(-5, 5, allow_nan=False), min_size=8, max_size=8),
    wals=st.lists(st.floats(-5, 5, allow_nan=False), min_size=8, max_size=8),
    axisoff=st.tuples(st.integers(0, 2), st.sampled_from([1, -1])),
)
def test_contraction_property(vals, wals, axisoff):
    off, orient = axisoff
    spec = GridSpec(1, 1.0, 8)
    u = GridFunction(spec, np.abs(vals))
    v = GridFunction(spec, np.abs(wals))
    hs = AlignedHalfSpace(0, off, orient)
    for p in (1.0, 2.0, 4.0):
        rep = contraction_check(u, v, hs, p)
        assert rep["lhs"] <= rep["rhs"] * (1 + 1e-12) + 1e-15


def test_contraction_with_rearrangement(rng):
    spec = GridSpec(2, 1.0, 8)
    u = GridFunction(spec, np.abs(rng.normal(size=spec.shape)))
    star = schwarz_rearrange(u)
    for hs in all_halfspaces(spec):
        rep = contraction_check(u, star, hs, 2.0)
        assert rep["lhs"] <= rep["rhs"] * (1 + 1e-12)


def test_iterate_polarization_fixed_point(rng):
    spec = GridSpec(1, 1.0, 16)
    u0 = random_radial_decreasing(spec, rng)
    schedule = HalfSpaceSchedule(spec, seed=1)
    iterates, errors = iterate_polarization(u0, schedule, 5)
    for it in iterates:
        assert np.array_equal(it.values, u0.values)
    assert all(e == 0.0 for e in errors)


def test_iterate_polarization_converges_1d(rng):
    spec = GridSpec(1, 2.0, 32)
    u0 = cosine_bump(spec, center=[0.8], radius=0.7)
    schedule = HalfSpaceSchedule(spec, seed=2)
    _, errors = iterate_polarization(u0, schedule, 60, p=2.0)
    assert errors[-1] < 0.5 * errors[0]
    assert all(b <= a * (1 + 1e-12) + 1e-15 for a, b in zip(errors, errors[1:]))


def test_polarize_whole_support_inside_h(rng):
    # H contains the support; reflections land outside the complement support
    spec = GridSpec(1, 4.0, 64)
    u = GridFunction(spec, np.where(np.abs(spec.axis_centers() + 2.0) < 1.0, 0.7, 0.0))
    hs = AlignedHalfSpace(0, 0, 1)  # {x <= 0} contains supp(u)
    assert np.array_equal(polarize(u, hs).values, u.values)


def test_polarize_general_exact_when_aligned(rng):
    spec = GridSpec(1, 1.0, 16)
    u = GridFunction(spec, np.abs(rng.normal(size=16)))
    out, approx = polarize_general(u, HalfSpace((1.0,), 0.0))
    assert not approx
    assert np.array_equal(out.values, polarize(u, AlignedHalfSpace(0, 0, 1)).values)


def test_polarize_general_flags_approximate(rng):
    spec = GridSpec(2, 1.0, 8)
    u = GridFunction(spec, np.abs(rng.normal(size=(8, 8))))
    n = np.array([1.0, 1.0]) / np.sqrt(2.0)
    out, approx = polarize_general(u, HalfSpace(tuple(n), 0.0))
    assert approx
    # resampled polarization still puts max on the H side pointwise
    assert out.values.shape == (8, 8)
