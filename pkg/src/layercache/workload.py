"""IRM workload generation: popularity laws, splits, sizes, and traces.

All stochastic operations take a :class:`numpy.random.Generator` and are
bit-reproducible given the same seed and parameters.  Samplers whose law
is only constrained up to marginals (the uniform decreasing version split
and the random integer layer composition) are documented in terms of the
exact construction used so results can be regenerated elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from layercache.catalog import ConfigurationError, DerivedPopularity

__all__ = [
    "Trace",
    "zipf_object_popularity",
    "split_versions_uniform_decreasing",
    "split_versions_two",
    "split_versions_three",
    "parametric_version_popularity",
    "parametric_layer_sizes",
    "random_layer_sizes",
    "sample_trace",
    "save_trace",
    "load_trace",
]


@dataclass(frozen=True)
class Trace:
    """A finite sequence of requests: 0-based objects, 1-based versions.

    ``timestamps`` is optional and only filled when Poisson arrival times
    were requested; the embedded jump chain is what every policy observes.
    """

    objects: np.ndarray
    versions: np.ndarray
    seed: Optional[int] = None
    timestamps: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.objects.shape != self.versions.shape:
            raise ValueError("objects and versions must have the same length")
        if len(self.objects) and (self.objects.min() < 0 or self.versions.min() < 1):
            raise ValueError("need objects >= 0 and versions >= 1")
        self.objects.setflags(write=False)
        self.versions.setflags(write=False)

    def __len__(self) -> int:
        return self.objects.shape[0]


def zipf_object_popularity(num_objects: int, exponent: float) -> np.ndarray:
    """Truncated Zipf object probabilities q(d) ~ d^(-exponent), d = 1..D."""
    if num_objects < 1:
        raise ConfigurationError("need at least one object")
    if exponent < 0:
        raise ConfigurationError("Zipf exponent must be non-negative")
    weights = np.arange(1, num_objects + 1, dtype=float) ** (-exponent)
    return weights / weights.sum()


def _descending_simplex_point(unit_cuts: np.ndarray) -> np.ndarray:
    """Differences of sorted cut points on (0, 1), sorted descending."""
    edges = np.concatenate(([0.0], np.sort(unit_cuts), [1.0]))
    return np.sort(np.diff(edges))[::-1]


def split_versions_uniform_decreasing(q_d: float, num_versions: int, rng) -> np.ndarray:
    """Split an object probability into strictly decreasing version shares.

    Draws a uniform point of the (V-1)-simplex by cutting (0, 1) at V-1
    i.i.d. uniform points, then sorts the pieces in descending order and
    scales by ``q_d``.  Zero-width pieces (probability zero, but possible
    in floating point) are rejected and redrawn.
    """
    if q_d <= 0:
        raise ConfigurationError("object probability must be strictly positive")
    if num_versions < 1:
        raise ConfigurationError("need at least one version")
    if num_versions == 1:
        return np.array([q_d])
    while True:
        parts = _descending_simplex_point(rng.random(num_versions - 1))
        if np.all(np.diff(parts) < 0) and parts[-1] > 0:
            return q_d * parts


def split_versions_two(q_d: float, alpha: float) -> np.ndarray:
    """Two-version split: fraction ``alpha`` for version 1, rest for 2."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError("alpha must lie in [0, 1]")
    return q_d * np.array([alpha, 1.0 - alpha])


def split_versions_three(q_d: float, zeta: float, eta: float) -> np.ndarray:
    """Three-version split (zeta, eta, 1 - zeta - eta) of ``q_d``."""
    if zeta < 0 or eta < 0 or zeta + eta > 1.0 + 1e-12:
        raise ConfigurationError("need zeta, eta >= 0 with zeta + eta <= 1")
    return q_d * np.array([zeta, eta, max(1.0 - zeta - eta, 0.0)])


def parametric_version_popularity(num_versions: int, m: float) -> np.ndarray:
    """Version weights (V - v + 1)^m, v = 1..V, normalized to sum 1."""
    if num_versions < 1:
        raise ConfigurationError("need at least one version")
    weights = np.arange(num_versions, 0, -1, dtype=float) ** m
    return weights / weights.sum()


def parametric_layer_sizes(num_versions: int, n: float) -> np.ndarray:
    """Layer sizes l^n, l = 1..V, normalized to a unit total object size.

    Positive exponents back-load size into the refinement layers,
    negative exponents front-load it into the base layer.
    """
    if num_versions < 1:
        raise ConfigurationError("need at least one version")
    weights = np.arange(1, num_versions + 1, dtype=float) ** n
    return weights / weights.sum()


def _composition_from_cuts(cuts, total: int) -> np.ndarray:
    """Integer parts induced by distinct cut points in 1..total-1."""
    edges = np.concatenate(([0], np.sort(np.asarray(cuts, dtype=int)), [total]))
    return np.diff(edges)


def random_layer_sizes(num_versions: int, total: int, rng) -> np.ndarray:
    """Uniform random composition of ``total`` into V integer parts >= 1.

    Sampled by drawing V-1 distinct cut points from 1..total-1 (uniform
    over compositions), sorting, and differencing.
    """
    if total < num_versions:
        raise ConfigurationError("total size must be at least one unit per layer")
    if num_versions == 1:
        return np.array([total])
    cuts = rng.choice(np.arange(1, total), size=num_versions - 1, replace=False)
    return _composition_from_cuts(cuts, total)


def sample_trace(
    popularity: DerivedPopularity,
    num_requests: int,
    rng,
    with_timestamps: bool = False,
    seed: Optional[int] = None,
) -> Trace:
    """Sample an i.i.d. IRM trace of (object, version) requests.

    Each request is drawn with probability q(d, v).  When timestamps are
    requested, arrival times follow a Poisson process with the catalog's
    total rate; the request sequence itself is identical either way.
    ``seed`` is recorded on the trace for reporting only; randomness comes
    from ``rng``.
    """
    if num_requests < 1:
        raise ConfigurationError("need at least one request")
    q = popularity.version_prob
    num_objects, num_versions = q.shape
    flat = rng.choice(num_objects * num_versions, size=num_requests, p=q.ravel())
    timestamps = None
    if with_timestamps:
        timestamps = np.cumsum(rng.exponential(1.0 / popularity.total_rate, num_requests))
    return Trace(
        objects=(flat // num_versions).astype(np.int64),
        versions=(flat % num_versions + 1).astype(np.int64),
        seed=seed,
        timestamps=timestamps,
    )


def save_trace(trace: Trace, path) -> None:
    """Persist a trace as newline-delimited "d,v" records (both 1-based)."""
    with open(path, "w") as fh:
        for d, v in zip(trace.objects, trace.versions):
            fh.write(f"{d + 1},{v}\n")


def load_trace(path) -> Trace:
    """Load a trace written by :func:`save_trace`."""
    data = np.loadtxt(path, dtype=np.int64, delimiter=",", ndmin=2)
    return Trace(objects=data[:, 0] - 1, versions=data[:, 1])
