"""Simulation driver: counting semantics, replication, row emission."""

import math

import numpy as np
import pytest

from layercache import (
    CSV_COLUMNS,
    Catalog,
    ConfigurationError,
    NextAccessIndex,
    approx_to_rows,
    derive_popularity,
    replicate,
    run_simulation,
    sample_trace,
    solve_characteristic_time,
    sweep,
    write_csv,
)
from layercache.workload import Trace

from conftest import random_catalog


def make_trace(pairs, seed=None):
    objects = np.array([d for d, _ in pairs], dtype=np.int64)
    versions = np.array([v for _, v in pairs], dtype=np.int64)
    return Trace(objects=objects, versions=versions, seed=seed)


def small_catalog():
    return Catalog(
        layer_size=np.array([[1.0, 1.0], [1.0, 2.0], [2.0, 1.0]]),
        rate=np.array([[0.3, 0.2], [0.2, 0.1], [0.1, 0.1]]),
    )


def test_runs_are_deterministic():
    cat = small_catalog()
    pop = derive_popularity(cat)
    trace = sample_trace(pop, 2000, np.random.default_rng(5), seed=5)
    a = run_simulation("llru", cat, 3.0, trace)
    b = run_simulation("llru", cat, 3.0, trace)
    assert np.array_equal(a.hits, b.hits)
    assert np.array_equal(a.presence_hits, b.presence_hits)
    assert a.bytes_evicted == b.bytes_evicted


def test_everything_fits_oracle():
    """B = catalog total: layered hit iff an earlier request reached v."""
    cat = small_catalog()
    pop = derive_popularity(cat)
    trace = sample_trace(pop, 3000, np.random.default_rng(9), seed=9)
    seen_max = {}
    seen_exact = set()
    lr_hits = mr_hits = 0
    for d, v in zip(trace.objects.tolist(), trace.versions.tolist()):
        if seen_max.get(d, 0) >= v:
            lr_hits += 1
        if (d, v) in seen_exact:
            mr_hits += 1
        seen_max[d] = max(seen_max.get(d, 0), v)
        seen_exact.add((d, v))
    # MR keeps every version as its own blob, so its no-eviction budget
    # is the sum of all version sizes rather than the layer total
    budgets = {"llru": cat.total_size, "llfu": cat.total_size,
               "mrlru": float(cat.mr_size.sum())}
    for policy, expected in (("llru", lr_hits), ("llfu", lr_hits), ("mrlru", mr_hits)):
        report = run_simulation(policy, cat, budgets[policy], trace)
        assert report.total_hits == expected, policy
        assert report.bytes_evicted == 0.0


def test_warmup_drops_leading_requests():
    cat = Catalog(layer_size=np.ones((5, 1)), rate=np.full((5, 1), 0.2))
    pairs = [(d, 1) for d in range(5)] * 2
    trace = make_trace(pairs)
    full = run_simulation("llru", cat, 5.0, trace)
    assert full.hit_rate == 0.5  # five cold misses, five repeats
    warm = run_simulation("llru", cat, 5.0, trace, warmup_fraction=0.5)
    assert warm.num_requests == 5
    assert warm.total_requests == 5
    assert warm.hit_rate == 1.0
    with pytest.raises(ConfigurationError):
        run_simulation("llru", cat, 5.0, trace, warmup_fraction=1.0)
    with pytest.raises(ConfigurationError):
        run_simulation("llru", cat, 5.0, trace, warmup_fraction=-0.1)


def test_unknown_policy_rejected():
    cat = small_catalog()
    with pytest.raises(ConfigurationError):
        run_simulation("clock", cat, 2.0, make_trace([(0, 1)]))


def test_empty_trace_yields_empty_report():
    cat = small_catalog()
    report = run_simulation("llru", cat, 2.0, make_trace([]))
    assert report.num_requests == 0
    assert report.total_requests == 0
    assert report.hit_rate == 0.0
    assert report.to_rows("s")[0]["hits"] == 0


def test_oversize_requests_bypass_without_state_change():
    """A version too large for the cache misses and must not evict."""
    cat = Catalog(layer_size=np.array([[0.5, 5.0]]), rate=np.array([[0.6, 0.4]]))
    trace = make_trace([(0, 2), (0, 1), (0, 1), (0, 2)])
    report = run_simulation("llru", cat, 1.0, trace)
    assert report.requests.tolist() == [[2, 2]]
    assert report.hits.tolist() == [[1, 0]]  # only the repeated v=1 hits
    assert report.bytes_evicted == 0.0


def test_single_version_collapse_llru_equals_mrlru():
    rng = np.random.default_rng(31)
    cat = Catalog(layer_size=np.ones((6, 1)), rate=rng.uniform(0.1, 1.0, (6, 1)))
    pop = derive_popularity(cat)
    trace = sample_trace(pop, 4000, rng, seed=1)
    for B in (1.0, 2.0, 4.0):
        a = run_simulation("llru", cat, B, trace)
        b = run_simulation("mrlru", cat, B, trace)
        assert np.array_equal(a.hits, b.hits)


def test_layer_accounting_identities():
    cat = small_catalog()
    pop = derive_popularity(cat)
    trace = sample_trace(pop, 1500, np.random.default_rng(2), seed=2)
    report = run_simulation("llfu", cat, 3.0, trace)
    suffix = report.requests[:, ::-1].cumsum(axis=1)[:, ::-1]
    assert np.array_equal(report.layer_requests(), suffix)
    assert np.all(report.presence_hits <= suffix)
    # presence is monotone: layer l present implies layer l-1 present
    assert np.all(np.diff(report.presence_hits, axis=1) <= 0)
    probs = report.layer_hit_prob()
    touched = suffix > 0
    assert np.all((probs[touched] >= 0) & (probs[touched] <= 1))


def test_version_hit_prob_nan_for_unasked_cells():
    cat = small_catalog()
    report = run_simulation("llru", cat, 2.0, make_trace([(0, 1), (0, 1)]))
    probs = report.version_hit_prob()
    assert probs[0, 0] == 0.5
    assert math.isnan(probs[1, 1])


def test_lbelady_accepts_prebuilt_index():
    cat = small_catalog()
    pop = derive_popularity(cat)
    trace = sample_trace(pop, 800, np.random.default_rng(7), seed=7)
    idx = NextAccessIndex(trace, cat.num_versions)
    with_idx = run_simulation("lbelady", cat, 2.0, trace, next_index=idx)
    without = run_simulation("lbelady", cat, 2.0, trace)
    assert np.array_equal(with_idx.hits, without.hits)


def test_replicate_summary_statistics():
    cat = small_catalog()
    summary = replicate("llru", cat, 3.0, 500, seeds=(11, 12, 13))
    assert summary.replications == 3
    assert summary.seeds == (11, 12, 13)
    rates = np.array([r.hit_rate for r in summary.reports])
    assert summary.hit_rate_mean == pytest.approx(rates.mean())
    assert summary.hit_rate_se == pytest.approx(rates.std(ddof=1) / math.sqrt(3))
    assert {r.seed for r in summary.reports} == {11, 12, 13}


def test_replicate_single_seed_has_nan_se():
    cat = small_catalog()
    summary = replicate("llru", cat, 3.0, 200, seeds=(1,))
    assert math.isnan(summary.hit_rate_se)
    with pytest.raises(ConfigurationError):
        replicate("llru", cat, 3.0, 200, seeds=())


def test_sweep_matches_individual_runs():
    cat = small_catalog()
    rows = sweep(["llru"], cat, [3.0], 500, seeds=(11, 12, 13))
    agg = [r for r in rows if r["kind"] == "aggregate"]
    assert len(agg) == 3
    summary = replicate("llru", cat, 3.0, 500, seeds=(11, 12, 13))
    by_seed = {r.seed: r.hit_rate for r in summary.reports}
    for row in agg:
        assert row["hit_rate"] == by_seed[row["seed"]]
        assert row["scenario_id"] == "scenario"
        assert row["policy"] == "llru"
        assert row["N"] == 500


def test_sweep_rejects_unknown_policy():
    with pytest.raises(ConfigurationError):
        sweep(["llru", "arc"], small_catalog(), [2.0], 100, seeds=(1,))


def test_sweep_named_scenarios():
    cats = [("a", small_catalog()), ("b", small_catalog())]
    rows = sweep(["mrlru"], cats, [2.0, 3.0], 300, seeds=(5,))
    ids = {(r["scenario_id"], r["B"]) for r in rows}
    assert ids == {("a", 2.0), ("a", 3.0), ("b", 2.0), ("b", 3.0)}


def test_static_optimal_monotone_in_capacity():
    rng = np.random.default_rng(3)
    cat = random_catalog(rng)
    pop = derive_popularity(cat)
    trace = sample_trace(pop, 2000, rng, seed=4)
    rates = [run_simulation("static-opt", cat, B, trace).hit_rate
             for B in (1.0, 2.0, 4.0, 8.0)]
    assert all(a <= b + 1e-12 for a, b in zip(rates, rates[1:]))


def test_static_report_hits_follow_placement():
    cat = small_catalog()
    trace = make_trace([(0, 1), (0, 2), (1, 1), (2, 1), (0, 1)])
    report = run_simulation("static-opt", cat, 2.0, trace)
    probs = report.version_hit_prob()
    asked = report.requests > 0
    assert set(np.unique(probs[asked])) <= {0.0, 1.0}  # all or nothing per cell


def test_to_rows_kind_selection():
    cat = small_catalog()
    pop = derive_popularity(cat)
    trace = sample_trace(pop, 400, np.random.default_rng(21), seed=21)
    report = run_simulation("llru", cat, 3.0, trace)
    only_agg = report.to_rows("sc")
    assert len(only_agg) == 1
    assert only_agg[0]["kind"] == "aggregate"
    assert only_agg[0]["seed"] == 21
    full = report.to_rows("sc", detail="all")
    versions = [r for r in full if r["kind"] == "version"]
    layers = [r for r in full if r["kind"] == "layer"]
    assert len(versions) == int((report.requests > 0).sum())
    assert len(layers) == int((report.layer_requests() > 0).sum())
    for r in versions:
        assert r["hits"] <= r["requests"]
        assert r["hit_prob"] == r["hits"] / r["requests"]
    with pytest.raises(ConfigurationError):
        report.to_rows("sc", detail="everything")


def test_approx_rows_schema():
    cat = small_catalog()
    pop = derive_popularity(cat)
    sol = solve_characteristic_time(pop, cat, 3.0)
    rows = approx_to_rows("sc", "llru", sol, pop)
    assert rows[0]["policy"] == "llru-approx"
    assert rows[0]["kind"] == "aggregate"
    assert rows[0]["hit_rate"] == sol.hit_rate(pop)
    assert rows[0]["requests"] == ""
    layer_rows = rows[1:]
    assert len(layer_rows) == 6
    assert layer_rows[0]["hit_prob"] == float(sol.hit_prob[0, 0])
    assert len(approx_to_rows("sc", "llru", sol, pop, detail="aggregate")) == 1
    with pytest.raises(ConfigurationError):
        approx_to_rows("sc", "llru", sol, pop, detail="version")


def test_write_csv_layout(tmp_path):
    rows = [
        {"scenario_id": "s", "policy": "llru", "B": 2.5, "d": 1, "v_or_l": 2,
         "kind": "version", "requests": 10, "hits": 3,
         "hit_prob": 0.123456789012345, "hit_rate": "", "N": 100, "seed": 7},
        {"scenario_id": "s", "policy": "llru", "B": 2.5, "d": "", "v_or_l": "",
         "kind": "aggregate", "requests": 10, "hits": 3, "hit_prob": "",
         "hit_rate": 0.3, "N": 100, "seed": 7},
    ]
    path = tmp_path / "out.csv"
    write_csv(rows, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1] == "s,llru,2.5,1,2,version,10,3,0.123456789,,100,7"
    assert lines[2] == "s,llru,2.5,,,aggregate,10,3,,0.3,100,7"
