"""Cache state machines and placement policies for layered objects.

All layered policies maintain the layer-prefix property: whenever layer
l+1 of an object is resident, so are layers 1..l.  Residency is tracked
per unit, where a unit is either one LR layer (d, l) or one MR version
(d, v).  Units are encoded as integers for speed: LR layer (d, l) maps to
``d * V + (l - 1)`` and, in hybrid mode, the single MR unit of object d
maps to ``D * V + d``.

Eviction requests that cannot fit even into an empty cache are served in
BYPASS mode: the request counts as a miss and the cache is left untouched.

Online policies expose ``access(d, v) -> (hit, present_prefix, evicted)``
with 0-based object index and 1-based version; ``present_prefix`` is the
number of leading layers of d resident before the access (0 whenever the
object was held as an MR blob), and ``evicted`` is a tuple of
``(kind, d, index)`` unit descriptors with kind "layer" or "mr".
"""

from __future__ import annotations

import heapq
from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional

import numpy as np

from layercache.catalog import Catalog, ConfigurationError, DerivedPopularity, derive_popularity

__all__ = [
    "POLICY_NAMES",
    "Placement",
    "HlfuPlacement",
    "LlruCache",
    "LlfuCache",
    "MrLruCache",
    "HlruCache",
    "LBeladyCache",
    "NextAccessIndex",
    "decay_counts",
    "lbelady_run",
    "hlfu_static_placement",
    "static_optimal",
    "make_policy",
]

POLICY_NAMES = ("llru", "llfu", "lbelady", "mrlru", "hlru", "hlfu-static", "static-opt")

_NO_EVICTIONS = ()

# Every access() returns (hit, present_prefix, evicted).
AccessResult = tuple


def _flat_sizes(catalog: Catalog):
    """Per-layer sizes, LR prefix sums, and MR sizes as flat python lists."""
    delta = [float(x) for x in catalog.layer_size.ravel()]
    slr = [float(x) for x in catalog.lr_size.ravel()]
    smr = [float(x) for x in catalog.mr_size.ravel()]
    return delta, slr, smr


class _LayeredCacheBase:
    """Shared bookkeeping for LR-mode caches (prefix pointers, sizes)."""

    def __init__(self, catalog: Catalog, capacity: float):
        if capacity < 0:
            raise ConfigurationError("cache capacity must be non-negative")
        self.catalog = catalog
        self.capacity = float(capacity)
        self.num_objects = catalog.num_objects
        self.num_versions = catalog.num_versions
        self.delta, self.slr, self.smr = _flat_sizes(catalog)
        # Highest resident layer per object; 0 means nothing resident.
        self.top = [0] * self.num_objects
        self.occupancy = 0.0
        self.evicted_bytes = 0.0

    def resident_units(self):
        """Iterate (d, l) pairs of resident LR layers, l 1-based."""
        for d, k in enumerate(self.top):
            for l in range(1, k + 1):
                yield (d, l)


class LlruCache(_LayeredCacheBase):
    """Layered LRU: evict the least recently touched layers first.

    A request for (d, v) touches layers 1..v; after the touch the layers
    sit at the most-recent end ordered so that lower layers are more
    recent than higher ones, which keeps tail eviction prefix-safe.
    """

    def __init__(self, catalog: Catalog, capacity: float):
        super().__init__(catalog, capacity)
        self.recency = OrderedDict()  # unit -> size, least recent first

    def access(self, d: int, v: int) -> AccessResult:
        V = self.num_versions
        top_d = self.top[d]
        present = top_d if top_d < v else v
        hit = top_d >= v
        evicted = _NO_EVICTIONS
        recency = self.recency
        if not hit:
            base = d * V
            if self.slr[base + v - 1] > self.capacity:
                return (False, present, _NO_EVICTIONS)  # BYPASS
            need = self.slr[base + v - 1] - (self.slr[base + top_d - 1] if top_d else 0.0)
            if self.occupancy + need > self.capacity:
                evicted = self._evict(need, d, v)
            for l in range(top_d + 1, v + 1):
                recency[base + l - 1] = self.delta[base + l - 1]
            self.occupancy += need
            self.top[d] = v
        move = recency.move_to_end
        base = d * V
        for l in range(v, 0, -1):
            move(base + l - 1)
        return (hit, present, evicted)

    def _evict(self, need: float, d: int, v: int):
        # Layers l <= v of the requested object are pinned; they are always
        # touched afterwards, so re-appending the stash is order-safe.
        recency = self.recency
        V = self.num_versions
        cap = self.capacity
        stash = []
        evicted = []
        while self.occupancy + need > cap:
            unit, size = recency.popitem(last=False)
            e, l = divmod(unit, V)
            if e == d and l < v:
                stash.append((unit, size))
                continue
            assert l + 1 == self.top[e], "tail eviction must remove the object's top layer"
            self.top[e] = l
            self.occupancy -= size
            self.evicted_bytes += size
            evicted.append(("layer", e, l + 1))
        for unit, size in stash:
            recency[unit] = size
        return tuple(evicted)


class LlfuCache(_LayeredCacheBase):
    """Layered LFU: evict resident layers in increasing access-count order.

    Counts are kept for every (object, layer) pair, resident or not, and a
    request for (d, v) increments layers 1..v before any eviction
    decision.  Ties are broken by higher layer index, then by least recent
    access, which keeps eviction prefix-safe.
    """

    def __init__(self, catalog: Catalog, capacity: float):
        super().__init__(catalog, capacity)
        self.counts = [0] * (self.num_objects * self.num_versions)
        self.resident = {}  # unit -> size
        self._last_access = [0] * (self.num_objects * self.num_versions)
        self._heap = []
        self._step = 0

    def access(self, d: int, v: int) -> AccessResult:
        V = self.num_versions
        base = d * V
        self._step += 1
        step = self._step
        counts = self.counts
        last = self._last_access
        for l in range(v):
            counts[base + l] += 1
            last[base + l] = step
        top_d = self.top[d]
        present = top_d if top_d < v else v
        hit = top_d >= v
        evicted = _NO_EVICTIONS
        if not hit:
            if self.slr[base + v - 1] > self.capacity:
                self._refresh_heap_entries(base, min(top_d, v))
                return (False, present, _NO_EVICTIONS)  # BYPASS
            need = self.slr[base + v - 1] - (self.slr[base + top_d - 1] if top_d else 0.0)
            if self.occupancy + need > self.capacity:
                evicted = self._evict(need, d, v)
            resident = self.resident
            for l in range(top_d + 1, v + 1):
                unit = base + l - 1
                resident[unit] = self.delta[unit]
            self.occupancy += need
            self.top[d] = v
        self._refresh_heap_entries(base, min(self.top[d], v))
        if len(self._heap) > 8 * len(self.resident) + 256:
            self._rebuild_heap()
        return (hit, present, evicted)

    def _refresh_heap_entries(self, base: int, upto: int):
        push = heapq.heappush
        heap = self._heap
        counts = self.counts
        last = self._last_access
        for l in range(upto):
            unit = base + l
            push(heap, (counts[unit], -l - 1, last[unit], unit))

    def _rebuild_heap(self):
        V = self.num_versions
        counts = self.counts
        last = self._last_access
        self._heap = [
            (counts[u], -(u % V) - 1, last[u], u) for u in self.resident
        ]
        heapq.heapify(self._heap)

    def _evict(self, need: float, d: int, v: int):
        heap = self._heap
        resident = self.resident
        counts = self.counts
        last = self._last_access
        V = self.num_versions
        cap = self.capacity
        evicted = []
        while self.occupancy + need > cap:
            count, negl, la, unit = heapq.heappop(heap)
            size = resident.get(unit)
            if size is None or counts[unit] != count or last[unit] != la:
                continue  # stale entry
            e, l = divmod(unit, V)
            if e == d and l < v:
                continue  # pinned; fresh entry arrives after the touch
            assert l + 1 == self.top[e], "eviction must remove the object's top layer"
            del resident[unit]
            self.top[e] = l
            self.occupancy -= size
            self.evicted_bytes += size
            evicted.append(("layer", e, l + 1))
        return tuple(evicted)

    def decay_counts(self):
        """Subtract the current minimum access count from every count."""
        decayed = decay_counts(self.counts)
        self.counts[:] = decayed
        self._rebuild_heap()
        return self.counts


def decay_counts(counts):
    """Return counts with the common minimum subtracted from each entry.

    Preserves the relative order of all counts; applying it again when the
    minimum is already zero is a no-op.
    """
    counts = list(counts)
    if not counts:
        raise ConfigurationError("need at least one tracked count")
    low = min(counts)
    return [c - low for c in counts]


class MrLruCache:
    """Plain LRU over independent MR versions (no layering, no sharing).

    A cached version u cannot serve a request for version v != u.
    """

    def __init__(self, catalog: Catalog, capacity: float):
        if capacity < 0:
            raise ConfigurationError("cache capacity must be non-negative")
        self.catalog = catalog
        self.capacity = float(capacity)
        self.num_objects = catalog.num_objects
        self.num_versions = catalog.num_versions
        self.smr = [float(x) for x in catalog.mr_size.ravel()]
        self.recency = OrderedDict()  # unit (d*V + v-1) -> size
        self.occupancy = 0.0
        self.evicted_bytes = 0.0

    def access(self, d: int, v: int) -> AccessResult:
        V = self.num_versions
        unit = d * V + v - 1
        recency = self.recency
        if unit in recency:
            recency.move_to_end(unit)
            return (True, 0, _NO_EVICTIONS)
        size = self.smr[unit]
        if size > self.capacity:
            return (False, 0, _NO_EVICTIONS)  # BYPASS
        evicted = []
        while self.occupancy + size > self.capacity:
            old, old_size = recency.popitem(last=False)
            self.occupancy -= old_size
            self.evicted_bytes += old_size
            evicted.append(("mr", old // V, old % V + 1))
        recency[unit] = size
        self.occupancy += size
        return (False, 0, tuple(evicted) if evicted else _NO_EVICTIONS)

    def resident_units(self):
        for unit in self.recency:
            yield (unit // self.num_versions, unit % self.num_versions + 1)


def check_hybrid_feasibility(catalog: Catalog) -> None:
    """Reject catalogs where greedy MR<->LR switching is not worthwhile.

    Requires s_MR(d, v) <= s_LR(d, v) everywhere and, for every v > 1,
    min_u<v s_MR(d, u) + s_MR(d, v) >= s_LR(d, v).
    """
    slr = catalog.lr_size
    smr = catalog.mr_size
    if np.any(smr > slr + 1e-12):
        raise ConfigurationError("hybrid policies need s_MR(d, v) <= s_LR(d, v)")
    if catalog.num_versions > 1:
        cheapest = smr[:, :1]  # MR sizes increase in v, so version 1 is the min
        if np.any(cheapest + smr[:, 1:] < slr[:, 1:] - 1e-12):
            raise ConfigurationError(
                "hybrid policies need min_u s_MR(d, u) + s_MR(d, v) >= s_LR(d, v)"
            )


class HlruCache(_LayeredCacheBase):
    """Greedy hybrid LRU: objects start as MR blobs and switch to LR.

    A first request stores the object as the requested MR version.  When a
    different version of an MR-cached object is requested, the blob is
    replaced by LR layers 1..max(u, v).  LR-held objects behave like LLRU.
    One recency order spans MR blobs and LR layers alike.
    """

    MR_NONE = -1

    def __init__(self, catalog: Catalog, capacity: float):
        check_hybrid_feasibility(catalog)
        super().__init__(catalog, capacity)
        self.recency = OrderedDict()  # unit -> size; MR unit of d is D*V + d
        self.mr_version = [self.MR_NONE] * self.num_objects

    def _mr_unit(self, d: int) -> int:
        return self.num_objects * self.num_versions + d

    def access(self, d: int, v: int) -> AccessResult:
        V = self.num_versions
        base = d * V
        recency = self.recency
        u = self.mr_version[d]
        if u != self.MR_NONE:
            if u == v:
                recency.move_to_end(self._mr_unit(d))
                return (True, 0, _NO_EVICTIONS)
            w = u if u > v else v
            if self.slr[base + w - 1] > self.capacity:
                return (False, 0, _NO_EVICTIONS)  # BYPASS: keep the MR blob
            mr_unit = self._mr_unit(d)
            freed = recency.pop(mr_unit)
            self.occupancy -= freed
            self.mr_version[d] = self.MR_NONE
            evicted = self._install_layers(d, 0, w)
            self._touch_layers(d, w)
            return (False, 0, evicted)
        top_d = self.top[d]
        if top_d:
            present = top_d if top_d < v else v
            if top_d >= v:
                self._touch_layers(d, v)
                return (True, present, _NO_EVICTIONS)
            if self.slr[base + v - 1] > self.capacity:
                return (False, present, _NO_EVICTIONS)  # BYPASS
            evicted = self._install_layers(d, top_d, v)
            self._touch_layers(d, v)
            return (False, present, evicted)
        # Object absent: fetch the requested version as an MR blob.
        size = self.smr[base + v - 1]
        if size > self.capacity:
            return (False, 0, _NO_EVICTIONS)  # BYPASS
        evicted = _NO_EVICTIONS
        if self.occupancy + size > self.capacity:
            evicted = self._evict(size, d, v)
        recency[self._mr_unit(d)] = size
        self.occupancy += size
        self.mr_version[d] = v
        return (False, 0, evicted)

    def _install_layers(self, d: int, top_d: int, v: int):
        base = d * self.num_versions
        need = self.slr[base + v - 1] - (self.slr[base + top_d - 1] if top_d else 0.0)
        evicted = _NO_EVICTIONS
        if self.occupancy + need > self.capacity:
            evicted = self._evict(need, d, v)
        recency = self.recency
        for l in range(top_d + 1, v + 1):
            recency[base + l - 1] = self.delta[base + l - 1]
        self.occupancy += need
        self.top[d] = v
        return evicted

    def _touch_layers(self, d: int, v: int):
        move = self.recency.move_to_end
        base = d * self.num_versions
        for l in range(v, 0, -1):
            move(base + l - 1)

    def _evict(self, need: float, d: int, v: int):
        recency = self.recency
        V = self.num_versions
        DV = self.num_objects * V
        cap = self.capacity
        stash = []
        evicted = []
        while self.occupancy + need > cap:
            unit, size = recency.popitem(last=False)
            if unit >= DV:
                e = unit - DV
                self.occupancy -= size
                self.evicted_bytes += size
                evicted.append(("mr", e, self.mr_version[e]))
                self.mr_version[e] = self.MR_NONE
                continue
            e, l = divmod(unit, V)
            if e == d and l < v:
                stash.append((unit, size))
                continue
            assert l + 1 == self.top[e], "tail eviction must remove the object's top layer"
            self.top[e] = l
            self.occupancy -= size
            self.evicted_bytes += size
            evicted.append(("layer", e, l + 1))
        for unit, size in stash:
            recency[unit] = size
        return tuple(evicted)

    def resident_units(self):
        for d, k in enumerate(self.top):
            for l in range(1, k + 1):
                yield (d, l)

    def resident_mr_units(self):
        for d, u in enumerate(self.mr_version):
            if u != self.MR_NONE:
                yield (d, u)


class NextAccessIndex:
    """Next-touch positions for every layer touched by each trace entry.

    For the request at position t (touching layers 1..v of object d),
    ``entries(t)[l - 1]`` is the smallest position > t whose request
    touches layer l of d, or ``len(trace)`` when no such request exists.
    """

    def __init__(self, trace, num_versions: int):
        objects = trace.objects.tolist()
        versions = trace.versions.tolist()
        n = len(objects)
        self.num_requests = n
        self.num_versions = num_versions
        offsets = [0] * (n + 1)
        acc = 0
        for t in range(n):
            offsets[t + 1] = acc = acc + versions[t]
        flat = [0] * acc
        last = {}
        for t in range(n - 1, -1, -1):
            d = objects[t]
            base = offsets[t]
            dbase = d * num_versions
            for l in range(versions[t]):
                key = dbase + l
                flat[base + l] = last.get(key, n)
                last[key] = t
        self._offsets = offsets
        self._flat = flat

    def entries(self, t: int):
        """List of next-touch positions for layers 1..v of the request at t."""
        return self._flat[self._offsets[t] : self._offsets[t + 1]]


class LBeladyCache(_LayeredCacheBase):
    """Layered Belady: evict layers whose next touch is farthest away.

    Offline policy bound to one trace; ``access`` must be fed the trace in
    order.  Never-again units (next touch beyond the trace end) go first,
    with ties broken by higher layer index, then larger object index.
    """

    def __init__(self, catalog: Catalog, capacity: float, trace, index: Optional[NextAccessIndex] = None):
        super().__init__(catalog, capacity)
        self.trace = trace
        self.index = index if index is not None else NextAccessIndex(trace, catalog.num_versions)
        if self.index.num_versions != catalog.num_versions:
            raise ConfigurationError("next-access index was built for a different catalog shape")
        self.resident = {}  # unit -> size
        self._fcur = [0] * (self.num_objects * self.num_versions)
        self._heap = []
        self._pos = 0

    def access(self, d: int, v: int) -> AccessResult:
        t = self._pos
        assert t < self.index.num_requests, "access past the end of the bound trace"
        self._pos = t + 1
        V = self.num_versions
        base = d * V
        top_d = self.top[d]
        present = top_d if top_d < v else v
        hit = top_d >= v
        evicted = _NO_EVICTIONS
        nxt = self.index.entries(t)
        if not hit:
            if self.slr[base + v - 1] > self.capacity:
                self._update_future(base, min(top_d, v), nxt)
                return (False, present, _NO_EVICTIONS)  # BYPASS
            need = self.slr[base + v - 1] - (self.slr[base + top_d - 1] if top_d else 0.0)
            if self.occupancy + need > self.capacity:
                evicted = self._evict(need, d, v)
            resident = self.resident
            for l in range(top_d + 1, v + 1):
                resident[base + l - 1] = self.delta[base + l - 1]
            self.occupancy += need
            self.top[d] = v
        self._update_future(base, v, nxt)
        if len(self._heap) > 8 * len(self.resident) + 256:
            self._rebuild_heap()
        return (hit, present, evicted)

    def _update_future(self, base: int, upto: int, nxt):
        push = heapq.heappush
        heap = self._heap
        fcur = self._fcur
        V = self.num_versions
        d = base // V
        for l in range(upto):
            unit = base + l
            f = nxt[l]
            fcur[unit] = f
            if unit in self.resident:
                push(heap, (-f, -l - 1, -d, unit))

    def _rebuild_heap(self):
        V = self.num_versions
        fcur = self._fcur
        self._heap = [(-fcur[u], -(u % V) - 1, -(u // V), u) for u in self.resident]
        heapq.heapify(self._heap)

    def _evict(self, need: float, d: int, v: int):
        heap = self._heap
        resident = self.resident
        fcur = self._fcur
        V = self.num_versions
        cap = self.capacity
        evicted = []
        while self.occupancy + need > cap:
            negf, negl, negd, unit = heapq.heappop(heap)
            size = resident.get(unit)
            if size is None or fcur[unit] != -negf:
                continue  # stale entry
            e, l = divmod(unit, V)
            if e == d and l < v:
                continue  # pinned; a fresh entry arrives with the touch
            assert l + 1 == self.top[e], "eviction must remove the object's top layer"
            del resident[unit]
            self.top[e] = l
            self.occupancy -= size
            self.evicted_bytes += size
            evicted.append(("layer", e, l + 1))
        return tuple(evicted)


@dataclass(frozen=True)
class Placement:
    """Static cache contents as per-(object, version) indicators.

    ``x[d, v-1] = 1`` means version v of object d is covered.  The prefix
    constraint x(d, v-1) >= x(d, v) always holds, so each row is described
    by the largest covered version.
    """

    x: np.ndarray
    value: float
    total_size: float

    def __post_init__(self):
        self.x.setflags(write=False)

    def hit_fraction(self, popularity: DerivedPopularity) -> float:
        """Rate-weighted fraction of requests the placement serves."""
        return self.value / popularity.total_rate


@dataclass(frozen=True)
class HlfuPlacement:
    """Hybrid static contents: one representation choice per object.

    ``mode[d]`` is "none", "mr", or "lr"; ``level[d]`` is the cached MR
    version or the top LR layer.  Objects cached in exactly one version
    end as MR, objects covered in two or more versions end as LR.
    """

    mode: tuple
    level: tuple
    x: np.ndarray
    value: float
    total_size: float

    def __post_init__(self):
        self.x.setflags(write=False)

    def hit_fraction(self, popularity: DerivedPopularity) -> float:
        return self.value / popularity.total_rate


def _auto_resolution(sizes: np.ndarray, capacity: float) -> float:
    """Coarsest grid that represents every given size exactly, else capacity/2000."""
    for r in (1.0, 0.5, 0.25, 0.2, 0.125, 0.1, 0.05, 0.025, 0.02, 0.0125, 0.01, 0.005):
        scaled = sizes / r
        if np.allclose(scaled, np.round(scaled), atol=1e-9):
            return r
    return max(capacity, 1.0) / 2000.0


def static_optimal(
    popularity: DerivedPopularity,
    catalog: Catalog,
    capacity: float,
    resolution: Optional[float] = None,
    max_cells: int = 2_000_000,
) -> Placement:
    """Exact hit-rate-optimal static placement under the prefix constraint.

    Per object the choice is a version prefix v in {0..V} with value
    sum_{u<=v} lambda(d, u) and cost s_LR(d, v): a multiple-choice
    knapsack solved by dynamic programming over the budget quantized to
    ``resolution``-sized cells.  Costs are rounded up to the grid, so the
    result is always feasible; it is exactly optimal whenever all sizes
    are multiples of the resolution.  By default the coarsest grid that
    represents every prefix size exactly is used, falling back to
    capacity/2000 when no such grid exists.
    """
    if capacity < 0:
        raise ConfigurationError("capacity must be non-negative")
    if resolution is None:
        resolution = _auto_resolution(catalog.lr_size.ravel(), capacity)
    elif resolution <= 0:
        raise ConfigurationError("resolution must be strictly positive")
    D, V = catalog.num_objects, catalog.num_versions
    cells = int(np.floor(capacity / resolution + 1e-9))
    if cells + 1 > max_cells or D * (cells + 1) > 64 * max_cells:
        raise ConfigurationError(
            "size grid too fine: the DP table would exceed the memory cap; "
            "coarsen the resolution"
        )
    cost_cells = np.ceil(catalog.lr_size / resolution - 1e-9).astype(np.int64)
    values = np.cumsum(catalog.rate, axis=1)
    dp = np.zeros(cells + 1)
    choice = np.zeros((D, cells + 1), dtype=np.int16)
    for d in range(D):
        best = dp.copy()
        pick = choice[d]
        for v in range(1, V + 1):
            c = int(cost_cells[d, v - 1])
            if c > cells:
                break  # prefix costs only grow with v
            cand = dp[: cells + 1 - c] + values[d, v - 1]
            better = cand > best[c:]
            best[c:][better] = cand[better]
            pick[c:][better] = v
        dp = best
    x = np.zeros((D, V), dtype=np.int8)
    j = cells
    for d in range(D - 1, -1, -1):
        v = int(choice[d, j])
        if v:
            x[d, :v] = 1
            j -= int(cost_cells[d, v - 1])
    value = float((catalog.rate * x).sum())
    tops = x.sum(axis=1)
    total = float(sum(catalog.lr_size[d, t - 1] for d, t in enumerate(tops) if t))
    assert total <= capacity + 1e-9
    return Placement(x=x, value=value, total_size=total)


def hlfu_static_placement(
    popularity: DerivedPopularity,
    catalog: Catalog,
    capacity: float,
    resolution: Optional[float] = None,
    max_cells: int = 2_000_000,
) -> HlfuPlacement:
    """Best static hybrid placement with one representation per object.

    Per object the candidates are: cache nothing, cache a single version
    v as MR (value lambda(d, v), cost s_MR(d, v)), or cache the LR prefix
    up to some v >= 2 (value sum_{u<=v} lambda(d, u), cost s_LR(d, v)).
    Under the size relations enforced by :func:`check_hybrid_feasibility`
    holding several MR blobs of one object can never beat one of these
    candidates, so the choice reduces to the same knapsack DP used by
    :func:`static_optimal`.  Ties prefer MR; together with leaving the
    v = 1 prefix to its MR twin this keeps the defining shape: an object
    covered in exactly one version is held as MR, otherwise as LR.
    """
    check_hybrid_feasibility(catalog)
    if capacity < 0:
        raise ConfigurationError("capacity must be non-negative")
    D, V = catalog.num_objects, catalog.num_versions
    rate = catalog.rate
    slr = catalog.lr_size
    smr = catalog.mr_size
    if resolution is None:
        # The DP only ever bills MR sizes and LR prefixes of length >= 2.
        billed = np.concatenate([smr.ravel(), slr[:, 1:].ravel()])
        resolution = _auto_resolution(billed, capacity)
    elif resolution <= 0:
        raise ConfigurationError("resolution must be strictly positive")
    cells = int(np.floor(capacity / resolution + 1e-9))
    if cells + 1 > max_cells or D * (cells + 1) > 64 * max_cells:
        raise ConfigurationError(
            "size grid too fine: the DP table would exceed the memory cap; "
            "coarsen the resolution"
        )
    mr_cells = np.ceil(smr / resolution - 1e-9).astype(np.int64)
    lr_cells = np.ceil(slr / resolution - 1e-9).astype(np.int64)
    values = np.cumsum(rate, axis=1)
    dp = np.zeros(cells + 1)
    # Choice codes: 0 none, v for MR version v, V + v for the LR prefix v.
    choice = np.zeros((D, cells + 1), dtype=np.int16)
    for d in range(D):
        best = dp.copy()
        pick = choice[d]
        # MR candidates go first; LR must win strictly, so ties keep MR.
        for v in range(1, V + 1):
            c = int(mr_cells[d, v - 1])
            if c > cells:
                break  # MR sizes grow with v
            cand = dp[: cells + 1 - c] + rate[d, v - 1]
            better = cand > best[c:]
            best[c:][better] = cand[better]
            pick[c:][better] = v
        for v in range(2, V + 1):
            c = int(lr_cells[d, v - 1])
            if c > cells:
                break  # prefix costs only grow with v
            cand = dp[: cells + 1 - c] + values[d, v - 1]
            better = cand > best[c:]
            best[c:][better] = cand[better]
            pick[c:][better] = V + v
        dp = best
    mode = ["none"] * D
    level = [0] * D
    j = cells
    for d in range(D - 1, -1, -1):
        k = int(choice[d, j])
        if not k:
            continue
        if k <= V:
            mode[d], level[d] = "mr", k
            j -= int(mr_cells[d, k - 1])
        else:
            mode[d], level[d] = "lr", k - V
            j -= int(lr_cells[d, k - V - 1])
    x = np.zeros((D, V), dtype=np.int8)
    total = 0.0
    value = 0.0
    for d in range(D):
        if mode[d] == "mr":
            x[d, level[d] - 1] = 1
            total += smr[d, level[d] - 1]
            value += rate[d, level[d] - 1]
        elif mode[d] == "lr":
            x[d, : level[d]] = 1
            total += slr[d, level[d] - 1]
            value += rate[d, : level[d]].sum()
    assert total <= capacity + 1e-9
    return HlfuPlacement(
        mode=tuple(mode), level=tuple(level), x=x, value=float(value), total_size=float(total)
    )


def lbelady_run(trace, catalog: Catalog, capacity: float, index: Optional[NextAccessIndex] = None):
    """Run the offline layered Belady policy over a full trace.

    Returns the :class:`layercache.sim.SimReport` with per-(d, v) hit
    counts; an empty trace yields an empty report.
    """
    from layercache.sim import run_simulation

    return run_simulation("lbelady", catalog, capacity, trace, next_index=index)


def make_policy(
    name: str,
    catalog: Catalog,
    capacity: float,
    trace=None,
    next_index: Optional[NextAccessIndex] = None,
):
    """Construct the named online cache policy.

    "lbelady" additionally needs the trace it will be fed.  The static
    policies ("static-opt", "hlfu-static") are placements, not stepped
    caches; build them via their own functions.
    """
    if name == "llru":
        return LlruCache(catalog, capacity)
    if name == "llfu":
        return LlfuCache(catalog, capacity)
    if name == "mrlru":
        return MrLruCache(catalog, capacity)
    if name == "hlru":
        return HlruCache(catalog, capacity)
    if name == "lbelady":
        if trace is None:
            raise ConfigurationError("lbelady is offline and needs the full trace")
        return LBeladyCache(catalog, capacity, trace, index=next_index)
    raise ConfigurationError(f"unknown online policy {name!r}")
