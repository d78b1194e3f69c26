import numpy as np
import pytest

from casplit.engine import RunResult
from casplit.metrics import (
    RunSummary,
    buffer_throughput_correlation,
    pearson,
    utilization_ratio,
)


def stub_run(mode, deliveries, arrival_mode="per_slot", completed=False,
             completion_slot=None, policy="x", seed=1):
    d = np.array(deliveries, dtype=np.int64)
    n = len(d)
    return RunResult(
        mode=mode, policy=policy, seed=seed, l=int(d.sum()),
        arrival_mode=arrival_mode, t_slots=n, completed=completed,
        completion_slot=completion_slot, total_delivered=int(d.sum()),
        delivered=d, a_p=np.zeros(n, dtype=np.int8),
        a_s=np.zeros(n, dtype=np.int8), b=np.zeros(n, dtype=np.int64),
    )


def summary(mode, deliveries, **kw):
    return RunSummary.from_result(stub_run(mode, deliveries, **kw), "scn")


def test_eta_direct_arithmetic():
    ca = summary("ca", [1350])
    p = summary("pcc", [500])
    s = summary("scc", [1000])
    report = utilization_ratio(ca, p, s, window=1)
    assert report.eta == pytest.approx(0.90)


def test_eta_upper_bound_when_ca_matches_sum():
    ca = summary("ca", [30, 30])
    p = summary("pcc", [10, 10])
    s = summary("scc", [20, 20])
    assert utilization_ratio(ca, p, s).eta == pytest.approx(1.0)


def test_eta_zero_denominator_is_undefined_not_crash():
    report = utilization_ratio(summary("ca", [0, 0]), summary("pcc", [0, 0]),
                               summary("scc", [0, 0]))
    assert report.undefined and report.eta is None


def test_eta_burst_window_is_completion_time():
    ca = summary("ca", [5, 5, 0, 0], arrival_mode="burst", completed=True,
                 completion_slot=1)
    p = summary("pcc", [3, 3, 3, 3])
    s = summary("scc", [3, 3, 3, 3])
    report = utilization_ratio(ca, p, s)
    assert report.window == 2
    assert report.eta == pytest.approx(10 / 12)


def test_eta_rejects_mismatched_runs():
    ca = summary("ca", [1])
    other = RunSummary.from_result(stub_run("pcc", [1], seed=2), "scn")
    with pytest.raises(ValueError):
        utilization_ratio(ca, other, summary("scc", [1]))


def test_pearson_perfect_anticorrelation():
    xs = [1, 2, 3, 4]
    ys = [8, 6, 4, 2]
    assert pearson(xs, ys) == pytest.approx(-1.0)


def test_correlation_undefined_for_constant_series():
    assert buffer_throughput_correlation([(1.0, 5.0), (2.0, 5.0), (3.0, 5.0)]) is None


def test_correlation_needs_three_points():
    with pytest.raises(ValueError):
        buffer_throughput_correlation([(1.0, 2.0), (2.0, 1.0)])


def test_stationary_sweep_negative_correlation_and_antimonotone():
    from casplit.experiments import stationary_sweep_suite

    out = stationary_sweep_suite()
    assert out["pearson"] is not None and out["pearson"] <= -0.5
    rows = sorted(out["rows"], key=lambda r: -r[2])  # mean |B| descending
    throughputs = [r[1] for r in rows]
    assert all(b >= a - 1e-9 for a, b in zip(throughputs, throughputs[1:]))
