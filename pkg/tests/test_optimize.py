"""Intensity optimization, distance scans, and crossover search."""

import math

import numpy as np
import pytest

from tfqss.bounds import plob_bound, repeaterless_bound
from tfqss.core import ParameterError, SystemParams
from tfqss.keyrate import key_rate, rate_at_transmittance
from tfqss.optimize import (
    MU_MAX,
    MU_MIN,
    find_crossover,
    maximize_rate_at_transmittance,
    optimize_mu,
    scan_distances,
)

DEFAULTS = SystemParams()

# brute-force oracle (1e-6-step grid, then Newton on the stationarity
# condition e^(-mu) (3 - 2 mu) = 2) for the lossless noiseless channel,
# where the rate reduces to (1 - e^(-mu)) (1 - 2 mu)
IDEAL_MU_STAR = 0.235040279874499
IDEAL_RATE = 0.110997452601919


def test_ideal_channel_optimum_matches_brute_force_oracle():
    params = SystemParams(detector_efficiency=1.0, dark_count_rate=0.0,
                          misalignment=0.0)
    mu_opt, bd = optimize_mu(0.0, params)
    assert mu_opt == pytest.approx(IDEAL_MU_STAR, abs=1e-6)
    assert bd.rate == pytest.approx(IDEAL_RATE, rel=1e-9)
    # the closed form at the returned point agrees with the breakdown
    assert bd.rate == (1.0 - math.exp(-mu_opt)) * (1.0 - 2.0 * mu_opt)


def test_optimum_is_stable_across_grid_sizes():
    results = [
        optimize_mu(300.0, DEFAULTS, grid_size=g)[0]
        for g in (64, 96, 128, 200)
    ]
    for mu in results[1:]:
        assert abs(mu - results[0]) / results[0] <= 1e-4


def test_beyond_cutoff_returns_zero_rate_at_grid_minimum():
    mu_opt, bd = optimize_mu(1000.0, DEFAULTS)
    assert bd.rate == 0.0
    assert mu_opt == MU_MIN


def test_optimizer_rejects_bad_configuration():
    with pytest.raises(ParameterError, match="grid_size"):
        optimize_mu(100.0, DEFAULTS, grid_size=8)
    with pytest.raises(ParameterError, match="refine_iters"):
        optimize_mu(100.0, DEFAULTS, refine_iters=0)


def test_optimizer_beats_its_own_coarse_grid():
    # refinement may only improve on the best coarse point
    for distance in (0.0, 150.0, 300.0, 450.0):
        mu_opt, bd = optimize_mu(distance, DEFAULTS)
        ratio = (MU_MAX / MU_MIN) ** (1.0 / 63)
        coarse = [MU_MIN * ratio**i for i in range(63)] + [MU_MAX]
        best_coarse = max(
            key_rate(mu, distance, DEFAULTS).rate for mu in coarse)
        assert bd.rate >= best_coarse - 1e-15
        assert MU_MIN <= mu_opt <= MU_MAX


def test_optimizer_is_deterministic():
    one = optimize_mu(250.0, DEFAULTS)
    two = optimize_mu(250.0, DEFAULTS)
    assert one[0] == two[0]
    assert one[1].rate == two[1].rate


def test_scan_grid_and_row_counts():
    table = scan_distances(0.0, 700.0, 10.0, DEFAULTS, [0.02])
    points = table[0.02]
    assert len(points) == 71
    assert points[0].distance == 0.0
    assert points[-1].distance == 700.0
    single = scan_distances(100.0, 100.0, 10.0, DEFAULTS, [0.02, 0.04])
    assert {len(rows) for rows in single.values()} == {1}


def test_scan_rate_column_positive_then_zero():
    table = scan_distances(0.0, 700.0, 10.0, DEFAULTS, [0.02])
    rates = [p.rate for p in table[0.02]]
    assert rates[0] > 0.0
    assert rates[-1] == 0.0
    # non-increasing within tolerance, and no resurrection after cutoff
    assert all(b <= a + 1e-15 for a, b in zip(rates, rates[1:]))
    first_zero = rates.index(0.0)
    assert all(r == 0.0 for r in rates[first_zero:])


def test_scan_columns_match_reference_curves():
    table = scan_distances(0.0, 200.0, 100.0, DEFAULTS, [0.02, 0.052])
    for e_d, points in table.items():
        params = SystemParams(misalignment=e_d)
        for p in points:
            assert p.plob == plob_bound(p.distance, params)
            assert p.repeaterless == repeaterless_bound(p.distance, params)
            bd = key_rate(p.mu_opt, p.distance, params)
            assert p.rate == bd.rate
            assert p.gain == bd.gain
            assert p.qber == bd.qber


def test_scan_is_thread_count_invariant():
    seq = scan_distances(0.0, 100.0, 50.0, DEFAULTS, [0.02, 0.04])
    par = scan_distances(0.0, 100.0, 50.0, DEFAULTS, [0.02, 0.04], threads=4)
    for e_d in seq:
        for a, b in zip(seq[e_d], par[e_d]):
            assert a == b


def test_scan_validates_arguments():
    with pytest.raises(ParameterError, match="l_min"):
        scan_distances(-1.0, 100.0, 10.0, DEFAULTS, [0.02])
    with pytest.raises(ParameterError, match="step"):
        scan_distances(0.0, 100.0, 0.0, DEFAULTS, [0.02])
    with pytest.raises(ParameterError, match="at least one e_d"):
        scan_distances(0.0, 100.0, 10.0, DEFAULTS, [])
    with pytest.raises(ParameterError, match="threads"):
        scan_distances(0.0, 100.0, 10.0, DEFAULTS, [0.02], threads=0)


def test_find_crossover_exists_at_low_misalignment():
    crossing = find_crossover(DEFAULTS)
    assert crossing is not None
    assert 0.0 < crossing < 800.0
    # consistency with a direct scan around the reported distance
    params = DEFAULTS
    _, above = optimize_mu(crossing + 10.0, params)
    assert above.rate > plob_bound(crossing + 10.0, params)
    _, below = optimize_mu(max(0.0, crossing - 10.0), params)
    assert below.rate <= plob_bound(max(0.0, crossing - 10.0), params)
    # the returned endpoint itself clears the bound
    _, at = optimize_mu(crossing, params)
    assert at.rate > plob_bound(crossing, params)


def test_find_crossover_none_at_high_misalignment():
    assert find_crossover(SystemParams(misalignment=0.20)) is None


def test_find_crossover_is_deterministic():
    assert find_crossover(DEFAULTS) == find_crossover(DEFAULTS)


def test_maximize_rate_handles_raw_transmittance():
    mu_opt, bd = maximize_rate_at_transmittance(0.3, DEFAULTS)
    audit = np.linspace(MU_MIN, MU_MAX, 20_001)
    best = max(rate_at_transmittance(m, 0.3, DEFAULTS).rate for m in audit)
    assert bd.rate >= best - 1e-12
