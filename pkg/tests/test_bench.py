import pytest

from semifb.bench import (
    BenchMemoryError,
    BenchRecord,
    estimate_memory,
    run_bench,
    scaling_fit,
    to_csv,
    to_json,
)


def small(**kw):
    args = dict(states=20, arcs=40, frames=30, reps=3, batch=2)
    args.update(kw)
    return run_bench(**args)


def test_record_fields():
    r = small()
    assert len(r.times) == 3
    assert r.median_s == sorted(r.times)[1]
    assert r.spread_s == max(r.times) - min(r.times)
    assert r.nnz_per_s == pytest.approx(40 * 2 * 30 * 3 / sum(r.times))


def test_needs_three_reps():
    with pytest.raises(ValueError):
        small(reps=2)


def test_too_few_frames():
    with pytest.raises(ValueError, match="too few"):
        small(frames=3)


def test_memory_guard():
    need = estimate_memory(20, 2, 30)
    with pytest.raises(BenchMemoryError) as info:
        small(max_memory=need - 1)
    assert info.value.required == need
    small(max_memory=need)


def rec(arcs, batch, t):
    return BenchRecord("alignment", 1, arcs, batch, 1, 3, t, 0.0, 1.0)


def test_scaling_fit_exact_line():
    slope, intercept, r2 = scaling_fit([rec(10, b, 0.5 + 0.01 * 10 * b) for b in (1, 2, 4, 8)])
    assert slope == pytest.approx(0.01)
    assert intercept == pytest.approx(0.5)
    assert r2 == pytest.approx(1.0)


def test_scaling_fit_flags_nonlinear():
    assert scaling_fit([rec(10, b, b**3) for b in (1, 2, 4, 8)])[2] < 0.95


def test_serialization():
    records = [rec(10, 1, 0.1), rec(10, 2, 0.2)]
    assert to_csv(records).splitlines()[0].startswith("kind,K,arcs,batch")
    assert len(to_csv(records).splitlines()) == 3
    assert '"median_s": 0.2' in to_json(records)
