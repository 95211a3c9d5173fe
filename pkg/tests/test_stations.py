import math

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st
from scipy import stats

from paramdep.outcomes import eval_A, eval_B
from paramdep.regions import N_CLOCK, SETTING_PAIRS, supported_cell
from paramdep.stations import (
    CYCLIC,
    UNIFORM_RANDOM,
    Records,
    Schedule,
    bit_error_rate,
    blind_advantage,
    blind_decode,
    estimate_correlation,
    instrument_distribution,
    message_schedule,
    random_schedule,
    read_records,
    run_experiment,
    signal_decode,
    uniform_stream,
    write_records,
)


@hsettings(max_examples=40, deadline=None)
@given(st.integers(0, 2**63), st.integers(0, 3), st.integers(0, 50), st.integers(0, 50))
def test_stream_is_counter_based(seed, stream, start, count):
    whole = uniform_stream(seed, stream, 0, start + count)
    assert np.array_equal(uniform_stream(seed, stream, start, count), whole[start:])
    assert np.all((whole >= 0) & (whole < 1))


def test_streams_differ_by_key():
    assert not np.array_equal(uniform_stream(1, 1, 0, 8), uniform_stream(1, 2, 0, 8))
    assert not np.array_equal(uniform_stream(1, 1, 0, 8), uniform_stream(2, 1, 0, 8))


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        Schedule([[0, 2]])
    with pytest.raises(ValueError):
        Schedule([[0, 1]], clock="SOMETIMES")


def test_cyclic_clock(rc, fns):
    rec = run_experiment(16, Schedule([[0, 1]]), 3, fns, rc)
    assert sorted(rec.m.tolist()) == list(range(N_CLOCK))
    with pytest.raises(ValueError):
        run_experiment(0, Schedule([[0, 1]]), 3, fns, rc)


def test_records_satisfy_invariant(rc, fns):
    rec = run_experiment(3000, random_schedule(3000, 11, clock=UNIFORM_RANDOM), 11, fns, rc)
    for r in rec:
        c = supported_cell(r.m, r.a, r.b, rc)
        assert int(r.u) == c.column and int(r.v) == c.row
        assert r.x == eval_A(r.m, r.a, r.u, fns, rc)
        assert r.y == eval_B(r.m, r.b, r.v, fns, rc)


def test_determinism_and_partitioning(rc, fns):
    sched = random_schedule(5000, 8, clock=UNIFORM_RANDOM)
    whole = run_experiment(5000, sched, 8, fns, rc)
    assert whole.equals(run_experiment(5000, sched, 8, fns, rc))
    parts = run_experiment(1234, sched, 8, fns, rc)
    parts = parts.concat(run_experiment(5000 - 1234, sched, 8, fns, rc, start=1234))
    assert whole.equals(parts)
    assert not whole.equals(run_experiment(5000, sched, 9, fns, rc))


@pytest.mark.parametrize("clock", [CYCLIC, UNIFORM_RANDOM])
def test_cell_occupancy_uniform(rc, fns, clock):
    n = 10**6
    rec = run_experiment(n, Schedule([[1, 0]], clock), 21, fns, rc)
    counts = np.bincount(rec.u.astype(int) * 4 + rec.v.astype(int), minlength=16)
    expected = n / 16
    sd = math.sqrt(n * (1 / 16) * (15 / 16))
    assert np.all(np.abs(counts - expected) <= 4 * sd)
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 <= stats.chi2.ppf(1 - 1e-4, df=15)


def test_uniform_random_clock_is_uniform(rc, fns):
    n = 200_000
    rec = run_experiment(n, Schedule([[0, 0]], UNIFORM_RANDOM), 4, fns, rc)
    counts = np.bincount(rec.m, minlength=N_CLOCK)
    assert np.all(np.abs(counts - n / 16) <= 4 * math.sqrt(n / 16 * 15 / 16))


def make_records(x, y, a=0, b=0):
    n = len(x)
    z = np.zeros(n, dtype=np.int64)
    return Records(np.arange(n), z, np.zeros(n), np.zeros(n), z + a, z + b,
                   np.asarray(x), np.asarray(y))


def test_estimate_correlation_examples():
    est = estimate_correlation(make_records([1, -1, 1], [-1, 1, -1]), 0, 0)
    assert est.estimate == -1 and est.stderr == 0 and est.n == 3
    with pytest.warns(RuntimeWarning):
        single = estimate_correlation(make_records([1], [1]), 0, 0)
    assert single == (1.0, 0.0, 1)
    with pytest.raises(ValueError):
        estimate_correlation(make_records([1], [1]), 1, 1)


def test_correlations_converge(rc, fns):
    n = 400_000
    rec = run_experiment(n, random_schedule(n, 5), 5, fns, rc)
    for a, b in SETTING_PAIRS:
        est = estimate_correlation(rec, a, b)
        assert abs(est.estimate - fns.targets[a, b]) <= 4 * est.stderr
        assert abs(rec.x[(rec.a == a) & (rec.b == b)].mean()) <= 4 / math.sqrt(est.n)


def test_signal_decode(rc, fns):
    rec = run_experiment(10_000, random_schedule(10_000, 2), 2, fns, rc)
    assert bit_error_rate(signal_decode(rec.station1_view(), rc), rec.b) == 0.0

    message = [1, 0, 1, 1, 0, 0, 1, 0]
    rec = run_experiment(8, message_schedule(message, a=1), 77, fns, rc)
    assert signal_decode(rec.station1_view(), rc).tolist() == message

    with pytest.raises(ValueError):
        signal_decode(rec.station1_view(hide_clock=True), rc)


def test_blind_decode(rc, fns):
    n = 10**5
    rec = run_experiment(n, random_schedule(n, 13), 13, fns, rc)
    ber = bit_error_rate(blind_decode(rec.station1_view(hide_clock=True), rc), rec.b)
    assert abs(ber - 0.5) <= 4 * 0.5 / math.sqrt(n)
    assert blind_advantage(rc) == 0.0
    assert bit_error_rate(signal_decode(rec.station1_view(), rc), rec.b) == 0.0


def test_station_views_are_separated(rc, fns):
    rec = run_experiment(10, Schedule([[0, 1]]), 1, fns, rc)
    one, two = rec.station1_view(), rec.station2_view()
    assert set(one._fields) == {"index", "m", "u", "a", "x"}
    assert set(two._fields) == {"index", "m", "v", "b", "y"}
    assert rec.station1_view(hide_clock=True).m is None


def test_instrument_distribution(rc, fns):
    n = 200_000
    rec = run_experiment(n, random_schedule(n, 17), 17, fns, rc)
    for m in range(N_CLOCK):
        for a in (0, 1):
            d0 = instrument_distribution(rec, m, a, 0)
            d1 = instrument_distribution(rec, m, a, 1)
            assert d0.max() == 1 and d1.max() == 1
            assert np.argmax(d0) != np.argmax(d1)
            assert np.argmax(d0) == supported_cell(m, a, 0, rc).column
            assert np.array_equal(d0, instrument_distribution(rec, m, a, 0, exact=True, rc=rc))
    for a, b in SETTING_PAIRS:
        pooled = instrument_distribution(rec, None, a, b)
        k = ((rec.a == a) & (rec.b == b)).sum()
        assert np.all(np.abs(pooled - 0.25) <= 4 * math.sqrt(0.25 * 0.75 / k))
        assert np.all(instrument_distribution(rec, None, a, b, exact=True, rc=rc) == 0.25)
    with pytest.raises(ValueError):
        instrument_distribution(rec.select(rec.a == 5), 0, 0, 0)


def test_record_export_round_trip(tmp_path, rc, fns):
    rec = run_experiment(500, random_schedule(500, 3, UNIFORM_RANDOM), 3, fns, rc)
    path = tmp_path / "runs.csv"
    write_records(rec, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "index,m,u,v,a,b,x,y"
    assert len(lines) == 501
    assert read_records(path).equals(rec)
