"""Trace-driven cache simulation, replication, and CSV emission.

A simulation feeds one trace through one policy at one capacity and
accumulates per-(object, version) request and hit counts plus per-layer
presence hits: a request for (d, v) scores a presence hit for every
layer l <= v that was resident before the access, which is the quantity
the working-set approximation predicts.

The CSV schema shared by every emitter is::

    scenario_id, policy, B, d, v_or_l, kind, requests, hits, hit_prob,
    hit_rate, N, seed

with kind one of "version", "layer", "aggregate"; d and v_or_l are
1-based and empty on aggregate rows; floats carry 10 significant digits.
Analytical predictions reuse the schema with "-approx" appended to the
policy name and empty count columns.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from layercache.catalog import Catalog, ConfigurationError, derive_popularity
from layercache.policies import (
    POLICY_NAMES,
    NextAccessIndex,
    hlfu_static_placement,
    make_policy,
    static_optimal,
)
from layercache.workload import Trace, sample_trace

__all__ = [
    "CSV_COLUMNS",
    "SimReport",
    "ReplicationSummary",
    "run_simulation",
    "replicate",
    "sweep",
    "approx_to_rows",
    "write_csv",
]

CSV_COLUMNS = (
    "scenario_id",
    "policy",
    "B",
    "d",
    "v_or_l",
    "kind",
    "requests",
    "hits",
    "hit_prob",
    "hit_rate",
    "N",
    "seed",
)

_STATIC_POLICIES = ("static-opt", "hlfu-static")


@dataclass(frozen=True)
class SimReport:
    """Hit statistics for one (policy, catalog, capacity, trace) run."""

    policy: str
    capacity: float
    num_requests: int
    requests: np.ndarray
    hits: np.ndarray
    presence_hits: np.ndarray
    bytes_evicted: float
    seed: Optional[int] = None

    def __post_init__(self):
        if np.any(self.hits > self.requests) or np.any(self.hits < 0):
            raise ConfigurationError("per-cell hits must lie in [0, requests]")
        for arr in (self.requests, self.hits, self.presence_hits):
            arr.setflags(write=False)

    @property
    def total_requests(self) -> int:
        return int(self.requests.sum())

    @property
    def total_hits(self) -> int:
        return int(self.hits.sum())

    @property
    def hit_rate(self) -> float:
        """Overall hit fraction; 0.0 for an all-warmup run."""
        total = self.total_requests
        return self.total_hits / total if total else 0.0

    def version_hit_prob(self) -> np.ndarray:
        """Per-(d, v) hit fraction, NaN where the version was never asked."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.requests > 0, self.hits / self.requests, math.nan)

    def layer_requests(self) -> np.ndarray:
        """Per-(d, l) touch counts: requests for any version >= l."""
        return self.requests[:, ::-1].cumsum(axis=1)[:, ::-1]

    def layer_hit_prob(self) -> np.ndarray:
        """Per-(d, l) presence-hit fraction, NaN where never touched."""
        touches = self.layer_requests()
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(touches > 0, self.presence_hits / touches, math.nan)

    def to_rows(self, scenario_id: str, detail: str = "aggregate") -> list:
        """Rows in the shared CSV schema; detail selects the row kinds.

        detail is "aggregate", "version", "layer", or "all"; the
        aggregate row is always included.  Version and layer rows are
        emitted only for cells that were actually requested or touched.
        """
        if detail not in ("aggregate", "version", "layer", "all"):
            raise ConfigurationError("detail must be aggregate, version, layer, or all")
        seed = "" if self.seed is None else self.seed
        common = {"scenario_id": scenario_id, "policy": self.policy, "B": self.capacity,
                  "N": self.num_requests, "seed": seed}
        rows = [dict(common, d="", v_or_l="", kind="aggregate",
                     requests=self.total_requests, hits=self.total_hits,
                     hit_prob="", hit_rate=self.hit_rate)]
        D, V = self.requests.shape
        if detail in ("version", "all"):
            for d in range(D):
                for v in range(V):
                    r = int(self.requests[d, v])
                    if r == 0:
                        continue
                    h = int(self.hits[d, v])
                    rows.append(dict(common, d=d + 1, v_or_l=v + 1, kind="version",
                                     requests=r, hits=h, hit_prob=h / r, hit_rate=""))
        if detail in ("layer", "all"):
            touches = self.layer_requests()
            for d in range(D):
                for l in range(V):
                    r = int(touches[d, l])
                    if r == 0:
                        continue
                    h = int(self.presence_hits[d, l])
                    rows.append(dict(common, d=d + 1, v_or_l=l + 1, kind="layer",
                                     requests=r, hits=h, hit_prob=h / r, hit_rate=""))
        return rows


def _static_report(policy_name: str, catalog: Catalog, B: float, trace: Trace,
                   start: int, resolution: Optional[float]) -> SimReport:
    """Evaluate a static placement against the trace without stepping it."""
    popularity = derive_popularity(catalog)
    if policy_name == "static-opt":
        placement = static_optimal(popularity, catalog, B, resolution=resolution)
        lr_like = True
    else:
        placement = hlfu_static_placement(popularity, catalog, B, resolution=resolution)
        lr_like = False
    D, V = catalog.num_objects, catalog.num_versions
    requests = np.zeros((D, V), dtype=np.int64)
    np.add.at(requests, (trace.objects[start:], trace.versions[start:] - 1), 1)
    hits = requests * placement.x.astype(np.int64)
    presence = np.zeros((D, V), dtype=np.int64)
    layer_touches = requests[:, ::-1].cumsum(axis=1)[:, ::-1]
    if lr_like:
        tops = placement.x.sum(axis=1)
    else:
        tops = np.array([lvl if mode == "lr" else 0
                         for mode, lvl in zip(placement.mode, placement.level)])
    for d in range(D):
        presence[d, : tops[d]] = layer_touches[d, : tops[d]]
    return SimReport(policy=policy_name, capacity=float(B),
                     num_requests=len(trace) - start, requests=requests, hits=hits,
                     presence_hits=presence, bytes_evicted=0.0, seed=trace.seed)


def run_simulation(policy_name: str, catalog: Catalog, B: float, trace: Trace,
                   warmup_fraction: float = 0.0,
                   next_index: Optional[NextAccessIndex] = None,
                   resolution: Optional[float] = None) -> SimReport:
    """Feed the trace through a cold-started policy and count hits.

    ``warmup_fraction`` drops the leading fraction of requests from the
    statistics while still exercising the cache.  Static policies
    ("static-opt", "hlfu-static") are evaluated in closed form against
    the trace's request counts.  An empty trace yields an empty report.
    """
    if policy_name not in POLICY_NAMES:
        raise ConfigurationError(f"unknown policy {policy_name!r}")
    if not 0.0 <= warmup_fraction < 1.0:
        raise ConfigurationError("warmup fraction must lie in [0, 1)")
    if len(trace) == 0:
        zeros = np.zeros((catalog.num_objects, catalog.num_versions), dtype=np.int64)
        return SimReport(policy=policy_name, capacity=float(B), num_requests=0,
                         requests=zeros, hits=zeros.copy(), presence_hits=zeros.copy(),
                         bytes_evicted=0.0, seed=trace.seed)
    start = int(warmup_fraction * len(trace))
    if policy_name in _STATIC_POLICIES:
        return _static_report(policy_name, catalog, B, trace, start, resolution)
    cache = make_policy(policy_name, catalog, B, trace=trace, next_index=next_index)
    D, V = catalog.num_objects, catalog.num_versions
    objects = trace.objects.tolist()
    versions = trace.versions.tolist()
    access = cache.access
    for i in range(start):
        access(objects[i], versions[i])
    hit_count = [0] * (D * V)
    presence_count = [0] * (D * (V + 1))
    for i in range(start, len(objects)):
        d = objects[i]
        v = versions[i]
        hit, present, _ = access(d, v)
        if hit:
            hit_count[d * V + v - 1] += 1
        presence_count[d * (V + 1) + present] += 1
    requests = np.zeros((D, V), dtype=np.int64)
    np.add.at(requests, (trace.objects[start:], trace.versions[start:] - 1), 1)
    hits = np.array(hit_count, dtype=np.int64).reshape(D, V)
    # presence_count[d][m] requests found exactly m leading layers resident;
    # layer l was present for all requests with m >= l.
    pc = np.array(presence_count, dtype=np.int64).reshape(D, V + 1)
    presence = pc[:, ::-1].cumsum(axis=1)[:, ::-1][:, 1:]
    return SimReport(policy=policy_name, capacity=float(B), num_requests=len(objects) - start,
                     requests=requests, hits=hits, presence_hits=presence,
                     bytes_evicted=cache.evicted_bytes, seed=trace.seed)


@dataclass(frozen=True)
class ReplicationSummary:
    """Hit-rate statistics across independently seeded traces."""

    policy: str
    capacity: float
    num_requests: int
    seeds: Tuple[int, ...]
    reports: Tuple[SimReport, ...]
    hit_rate_mean: float
    hit_rate_se: float

    @property
    def replications(self) -> int:
        return len(self.reports)


def _summarize(policy: str, B: float, N: int, seeds, reports) -> ReplicationSummary:
    rates = np.array([r.hit_rate for r in reports])
    se = float(rates.std(ddof=1) / math.sqrt(len(rates))) if len(rates) > 1 else math.nan
    return ReplicationSummary(policy=policy, capacity=float(B), num_requests=N,
                              seeds=tuple(seeds), reports=tuple(reports),
                              hit_rate_mean=float(rates.mean()), hit_rate_se=se)


def _replicate_cell(args):
    policy_name, catalog, B, N, seed, warmup_fraction, resolution = args
    rng = np.random.default_rng(seed)
    popularity = derive_popularity(catalog)
    trace = sample_trace(popularity, N, rng, seed=seed)
    return run_simulation(policy_name, catalog, B, trace,
                          warmup_fraction=warmup_fraction, resolution=resolution)


def replicate(policy_name: str, catalog: Catalog, B: float, N: int,
              seeds: Sequence[int], warmup_fraction: float = 0.0,
              resolution: Optional[float] = None, workers: int = 1) -> ReplicationSummary:
    """Run independently seeded traces and summarize the hit rate.

    The standard error is NaN with a single seed; replications run in
    separate processes when workers > 1.
    """
    if len(seeds) < 1:
        raise ConfigurationError("need at least one seed")
    cells = [(policy_name, catalog, B, N, s, warmup_fraction, resolution) for s in seeds]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_replicate_cell, cells))
    else:
        reports = [_replicate_cell(c) for c in cells]
    return _summarize(policy_name, B, N, seeds, reports)


def _as_scenarios(catalog_family) -> list:
    if isinstance(catalog_family, Catalog):
        return [("scenario", catalog_family)]
    return list(catalog_family)


def sweep(policy_names: Sequence[str], catalog_family, B_grid: Sequence[float],
          N: int, seeds: Sequence[int], detail: str = "aggregate",
          warmup_fraction: float = 0.0, resolution: Optional[float] = None,
          workers: int = 1) -> list:
    """Cartesian sweep over scenarios x policies x capacities x seeds.

    ``catalog_family`` is a single catalog or an iterable of
    (scenario_id, catalog) pairs.  Returns one list of CSV-schema rows.
    In the serial path each (scenario, seed) trace is sampled once and
    shared across policies and capacities, as is the next-access index
    for the offline policy; the parallel path trades that reuse for
    process-level fan-out over cells.
    """
    scenarios = _as_scenarios(catalog_family)
    for name in policy_names:
        if name not in POLICY_NAMES:
            raise ConfigurationError(f"unknown policy {name!r}")
    if workers > 1:
        specs = [(sid, catalog, policy, B, seed)
                 for sid, catalog in scenarios for policy in policy_names
                 for B in B_grid for seed in seeds]
        args = [(policy, catalog, B, N, seed, warmup_fraction, resolution)
                for sid, catalog, policy, B, seed in specs]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_replicate_cell, args))
        rows = []
        for (sid, _catalog, _policy, _B, _seed), report in zip(specs, reports):
            rows.extend(report.to_rows(sid, detail))
        return rows
    rows = []
    for sid, catalog in scenarios:
        popularity = derive_popularity(catalog)
        traces = {}
        indices = {}
        for seed in seeds:
            rng = np.random.default_rng(seed)
            traces[seed] = sample_trace(popularity, N, rng, seed=seed)
            if "lbelady" in policy_names:
                indices[seed] = NextAccessIndex(traces[seed], catalog.num_versions)
        for policy in policy_names:
            for B in B_grid:
                for seed in seeds:
                    report = run_simulation(
                        policy, catalog, B, traces[seed],
                        warmup_fraction=warmup_fraction,
                        next_index=indices.get(seed), resolution=resolution)
                    rows.extend(report.to_rows(sid, detail))
    return rows


def approx_to_rows(scenario_id: str, base_policy: str, solution, popularity,
                   detail: str = "layer") -> list:
    """Analytical predictions in the shared schema, policy "<name>-approx".

    Layer rows carry the predicted per-unit hit probability; the
    aggregate row carries the request-weighted hit rate.  Count columns
    stay empty because nothing was simulated.
    """
    if detail not in ("aggregate", "layer", "all"):
        raise ConfigurationError("detail must be aggregate, layer, or all")
    policy = f"{base_policy}-approx"
    common = {"scenario_id": scenario_id, "policy": policy, "B": solution.capacity,
              "N": "", "seed": "", "requests": "", "hits": ""}
    rows = [dict(common, d="", v_or_l="", kind="aggregate", hit_prob="",
                 hit_rate=solution.hit_rate(popularity))]
    if detail != "aggregate":
        D, V = solution.hit_prob.shape
        for d in range(D):
            for l in range(V):
                rows.append(dict(common, d=d + 1, v_or_l=l + 1, kind="layer",
                                 hit_prob=float(solution.hit_prob[d, l]), hit_rate=""))
    return rows


def _format_cell(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def write_csv(rows: Iterable[dict], path) -> None:
    """Write rows in the fixed column order with 10-significant-digit floats."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(row.get(c, "")) for c in CSV_COLUMNS) + "\n")
