import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_config
from trustqueue.incentives import (UndefinedColumnError, delta_grid, ic_check,
                                   ic_indicator, ic_region, pair_threshold,
                                   social_benefit_region)
from trustqueue.model import Policy, SizeGrid, diagonal_matrix, validate_config
from trustqueue.soap import fcfs_mean_response, overall_curve

MT = Policy.MEASURED_TRUST
BT = Policy.BLIND_TRUST

# hand-derived (classic preemptive-priority formulas): the rare-long-job
# workload has a single binding pair (j=1 declaring 0) with
# delta(b) = 12.61995 b - 11.95885, root at b = 0.947575
RARE_BT_THRESHOLD = 0.947575


def test_verdict_matches_deltas(three_class):
    report = ic_check(three_class, MT, 0.1)
    assert report.verdict and report.violations == ()
    report = ic_check(three_class, MT, 0.02)
    assert not report.verdict
    assert all(d < 0 for _, _, d in report.violations)


def test_low_b_violations_are_underestimates(three_class):
    # with weak punishment, lying means declaring a smaller class
    for kind in (MT, BT):
        report = ic_check(three_class, kind, 0.02)
        assert report.violations and all(k < j for j, k, _ in report.violations)


def test_high_b_violations_are_overestimates(three_class):
    for kind in (MT, BT):
        report = ic_check(three_class, kind, 0.9)
        assert report.violations and all(k > j for j, k, _ in report.violations)


def test_pair_threshold_rare_long_job(rare_long_job):
    roots = pair_threshold(rare_long_job, BT, j=1, k=0)
    assert len(roots) == 1
    assert roots[0] == pytest.approx(RARE_BT_THRESHOLD, abs=1e-4)


def test_rare_long_job_region(rare_long_job):
    region = ic_region(rare_long_job, BT)
    assert len(region.intervals) == 1
    iv = region.intervals[0]
    assert iv.lo == pytest.approx(RARE_BT_THRESHOLD, abs=1e-3)
    assert iv.hi == 1.0


def test_pair_threshold_argument_errors(three_class):
    with pytest.raises(ValueError):
        pair_threshold(three_class, MT, j=1, k=1)
    entries = np.array([
        [0.40, 0.0, 0.06],
        [0.20, 0.0, 0.10],
        [0.04, 0.0, 0.20],
    ])
    config = validate_config(0.4, [1, 2, 3], entries)
    with pytest.raises(UndefinedColumnError):
        pair_threshold(config, MT, j=1, k=0)


def test_perfect_estimates_disincentivize_overestimates():
    grid = SizeGrid([1.0, 2.0, 3.0])
    config = validate_config(0.4, [1, 2, 3], diagonal_matrix([0.5, 0.3, 0.2], grid).entries)
    bs = np.round(np.arange(0, 1.0005, 1e-3), 10)
    d = delta_grid(config, MT, bs)
    for j in range(3):
        for k in range(j + 1, 3):
            assert pair_threshold(config, MT, j, k) == []
            assert np.all(d[j, k] > 0)


@given(st.integers(0, 2**31), st.sampled_from([MT, BT]))
@settings(max_examples=25, deadline=None)
def test_pair_threshold_brackets_sign_change(seed, kind):
    config = random_config(seed)
    rng = np.random.default_rng(seed + 1)
    j = int(rng.integers(0, config.n))
    k = int(rng.integers(0, config.n))
    if j == k:
        k = (k + 1) % config.n
    d = delta_grid(config, kind, np.array([0.0, 1.0]))[j, k]
    roots = pair_threshold(config, kind, j, k)
    if (d[0] < 0) != (d[1] < 0):
        assert roots, "sign change must yield a root"
    for root in roots:
        lo = delta_grid(config, kind, np.array([max(0.0, root - 1e-4)]))[j, k, 0]
        hi = delta_grid(config, kind, np.array([min(1.0, root + 1e-4)]))[j, k, 0]
        assert min(abs(lo), abs(hi)) < 1e-2 or (lo < 0) != (hi < 0)


@given(st.integers(0, 2**31))
@settings(max_examples=25, deadline=None)
def test_mt_single_interval_on_dense_grid(seed):
    config = random_config(seed)
    bs = np.round(np.arange(0, 1.0005, 1e-3), 10)
    ok = ic_indicator(config, MT, bs)
    runs = int(((~ok[:-1]) & ok[1:]).sum()) + int(ok[0])
    assert runs <= 1


@given(st.integers(0, 2**31))
@settings(max_examples=20, deadline=None)
def test_mt_pair_feasible_sets_one_sided(seed):
    # k > j: feasible prefix [0, b_jk]; k < j: feasible suffix [b_jk, 1]
    config = random_config(seed)
    bs = np.round(np.arange(0, 1.0005, 1e-2), 10)
    d = delta_grid(config, MT, bs)
    for j in range(config.n):
        for k in range(config.n):
            if j == k or np.isnan(d[j, k, 0]):
                continue
            feas = d[j, k] >= -1e-9
            switches = int((feas[:-1] != feas[1:]).sum())
            assert switches <= 1
            if switches == 1:
                assert feas[0] if k > j else feas[-1]


@given(st.integers(0, 2**31), st.sampled_from([MT, BT]))
@settings(max_examples=12, deadline=None)
def test_region_consistency(seed, kind):
    config = random_config(seed)
    region = ic_region(config, kind)
    for iv in region.intervals:
        mid = 0.5 * (iv.lo + iv.hi)
        assert ic_check(config, kind, mid).verdict
    for b in np.linspace(0.0, 1.0, 41):
        inside = region.contains(float(b))
        if inside:
            continue
        if all(min(abs(b - iv.lo), abs(b - iv.hi)) > region.grid_step
               for iv in region.intervals):
            assert not ic_check(config, kind, float(b)).verdict


@given(st.integers(0, 2**31))
@settings(max_examples=12, deadline=None)
def test_mt_region_equals_pair_intersection(seed):
    config = random_config(seed)
    region = ic_region(config, MT)
    lo, hi = 0.0, 1.0
    d = delta_grid(config, MT, np.array([0.0, 1.0]))
    for j in range(config.n):
        for k in range(config.n):
            if j == k or np.isnan(d[j, k, 0]):
                continue
            roots = pair_threshold(config, MT, j, k)
            if not roots:
                if d[j, k, 0] < -1e-9 and d[j, k, 1] < -1e-9:
                    lo, hi = 1.0, 0.0  # infeasible everywhere
                continue
            if k > j:
                hi = min(hi, roots[0])
            else:
                lo = max(lo, roots[0])
    if lo > hi + 2e-6:
        assert region.is_empty
    elif not region.is_empty:
        iv = region.intervals[0]
        assert iv.lo == pytest.approx(lo, abs=2e-6)
        assert iv.hi == pytest.approx(hi, abs=2e-6)


@given(st.integers(0, 2**31))
@settings(max_examples=12, deadline=None)
def test_bt_region_matches_dense_indicator(seed):
    config = random_config(seed)
    region = ic_region(config, BT)
    bs = np.round(np.arange(0, 1.0005, 1e-3), 10)
    ok = ic_indicator(config, BT, bs)
    for b, flag in zip(bs, ok):
        if flag:
            assert region.contains(float(b), slack=2e-3)


def test_three_class_regions(three_class):
    # frozen from the validated engine (simulator-confirmed formulas)
    mt = ic_region(three_class, MT).intervals[0]
    assert mt.lo == pytest.approx(0.0530, abs=2e-3)
    assert mt.hi == pytest.approx(0.2118, abs=2e-3)
    bt = ic_region(three_class, BT).intervals[0]
    assert bt.lo == pytest.approx(0.2843, abs=2e-3)
    assert bt.hi == pytest.approx(0.2867, abs=2e-3)


def test_social_benefit_three_class(three_class):
    region = social_benefit_region(three_class, MT, Policy.FCFS)
    assert len(region.intervals) == 1
    iv = region.intervals[0]
    assert iv.lo == 0.0
    # the whole incentive compatible range is also socially beneficial
    assert iv.hi > ic_region(three_class, MT).intervals[0].hi
    # boundary value: E[T] at the right endpoint equals the FCFS value
    et = overall_curve(three_class, MT, [iv.hi])[0]
    assert et == pytest.approx(fcfs_mean_response(three_class), abs=1e-4)


def test_social_benefit_single_class():
    config = validate_config(0.3, [2.0], [[1.0]])
    for kind in (MT, BT):
        region = social_benefit_region(config, kind, Policy.FCFS)
        assert len(region.intervals) == 1
        assert region.intervals[0].lo == 0.0
        assert region.intervals[0].hi == 1.0


def test_social_benefit_vs_scf(three_class):
    # SCF is much worse than the trust policies on this workload
    region = social_benefit_region(three_class, MT, Policy.SCF)
    assert region.intervals[0].lo == 0.0 and region.intervals[0].hi == 1.0


def test_delta_grid_undefined_column():
    entries = np.array([
        [0.40, 0.0, 0.06],
        [0.20, 0.0, 0.10],
        [0.04, 0.0, 0.20],
    ])
    config = validate_config(0.4, [1, 2, 3], entries)
    d = delta_grid(config, MT, np.array([0.5]))
    assert np.isnan(d[1]).all()
    assert np.isfinite(d[0, 1, 0])
    report = ic_check(config, MT, 0.5)
    assert all(j != 1 for j, _, _ in report.violations)
