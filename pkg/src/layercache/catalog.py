"""Data model for catalogs of layered / multi-representation objects.

A catalog describes D objects, each available in V versions.  Under the
layered representation (LR), version v of object d is the stack of layers
1..v and occupies the prefix sum of the per-layer sizes.  Under multiple
representations (MR), each version is an independent blob with its own
strictly increasing size.  Request rates are given per (object, version);
everything else (probabilities, per-layer suffix rates) is derived here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConfigurationError",
    "Catalog",
    "DerivedPopularity",
    "OverheadModel",
    "derive_popularity",
    "lr_version_size",
    "apply_overhead",
]


class ConfigurationError(ValueError):
    """Raised when catalog or scenario data violates a model constraint."""


def _as_matrix(a, name):
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ConfigurationError(f"{name} must be a 2-D (objects x versions) matrix")
    return m


@dataclass(frozen=True)
class Catalog:
    """Immutable description of the object population.

    Parameters
    ----------
    layer_size : (D, V) array
        Incremental LR layer sizes delta(d, l) >= 0.  Layer sizes need not
        be monotone in l; a zero-size layer is treated as co-resident with
        the layer below it.
    rate : (D, V) array
        Request rate lambda(d, v) >= 0 per (object, version).  Every object
        must attract some requests.
    mr_size : (D, V) array, optional
        MR version sizes, strictly increasing in v.  Defaults to the LR
        prefix sums (i.e. zero MR/LR overhead), which requires every layer
        size to be positive.
    """

    layer_size: np.ndarray
    rate: np.ndarray
    mr_size: np.ndarray = None

    def __post_init__(self):
        layer_size = _as_matrix(self.layer_size, "layer_size")
        rate = _as_matrix(self.rate, "rate")
        if layer_size.shape != rate.shape:
            raise ConfigurationError("layer_size and rate must have the same shape")
        if np.any(layer_size < 0):
            raise ConfigurationError("layer sizes must be non-negative")
        if np.any(rate < 0):
            raise ConfigurationError("request rates must be non-negative")
        if np.any(rate.sum(axis=1) <= 0):
            raise ConfigurationError("every object needs a strictly positive request rate")
        if self.mr_size is None:
            mr_size = np.cumsum(layer_size, axis=1)
        else:
            mr_size = _as_matrix(self.mr_size, "mr_size")
            if mr_size.shape != layer_size.shape:
                raise ConfigurationError("mr_size must have the same shape as layer_size")
        if np.any(mr_size <= 0) or np.any(np.diff(mr_size, axis=1) <= 0):
            raise ConfigurationError("MR sizes must be positive and strictly increasing in v")
        for name, value in (("layer_size", layer_size), ("rate", rate), ("mr_size", mr_size)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def num_objects(self) -> int:
        return self.layer_size.shape[0]

    @property
    def num_versions(self) -> int:
        return self.layer_size.shape[1]

    @property
    def lr_size(self) -> np.ndarray:
        """Prefix-sum matrix s_LR(d, v) of cumulative version sizes."""
        return np.cumsum(self.layer_size, axis=1)

    @property
    def total_size(self) -> float:
        """Total LR size of the whole catalog."""
        return float(self.layer_size.sum())

    def to_json(self) -> str:
        doc = {
            "num_objects": self.num_objects,
            "num_versions": self.num_versions,
            "layer_size": self.layer_size.tolist(),
            "mr_size": self.mr_size.tolist(),
            "rate": self.rate.tolist(),
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Catalog":
        doc = json.loads(text)
        cat = cls(
            layer_size=np.asarray(doc["layer_size"], dtype=float),
            rate=np.asarray(doc["rate"], dtype=float),
            mr_size=np.asarray(doc["mr_size"], dtype=float),
        )
        if cat.num_objects != doc["num_objects"] or cat.num_versions != doc["num_versions"]:
            raise ConfigurationError("declared dimensions do not match the matrices")
        return cat


@dataclass(frozen=True)
class DerivedPopularity:
    """Popularity quantities derived from a catalog's rate matrix.

    Attributes
    ----------
    total_rate : float
        Aggregate request rate over all objects and versions.
    object_prob : (D,) array
        q(d), probability that a request is for object d.
    version_prob : (D, V) array
        q(d, v), probability that a request is for object d in version v.
    layer_rate : (D, V) array
        gamma(d, l), total rate of requests that touch layer l of d
        (row-wise suffix sums of the rate matrix).
    layer_prob : (D, V) array
        p(d, l) = gamma(d, l) / total_rate.
    """

    total_rate: float
    object_prob: np.ndarray
    version_prob: np.ndarray
    layer_rate: np.ndarray
    layer_prob: np.ndarray

    def __post_init__(self):
        for name in ("object_prob", "version_prob", "layer_rate", "layer_prob"):
            getattr(self, name).setflags(write=False)


def derive_popularity(catalog: Catalog) -> DerivedPopularity:
    """Compute all derived popularity quantities for a catalog.

    Raises :class:`ConfigurationError` if the total request rate is zero
    (the Catalog constructor already rejects this for well-formed input,
    but raw matrices passed around internally are re-checked).
    """
    rate = np.asarray(catalog.rate, dtype=float)
    total = float(rate.sum())
    if total <= 0:
        raise ConfigurationError("total request rate must be strictly positive")
    # Suffix sums over versions: gamma(d, l) = sum_{v >= l} lambda(d, v).
    layer_rate = np.flip(np.cumsum(np.flip(rate, axis=1), axis=1), axis=1)
    return DerivedPopularity(
        total_rate=total,
        object_prob=rate.sum(axis=1) / total,
        version_prob=rate / total,
        layer_rate=layer_rate,
        layer_prob=layer_rate / total,
    )


def lr_version_size(catalog: Catalog, d: int, v: int) -> float:
    """Cache space occupied by version v of object d under LR.

    Indices are 1-based; version v occupies the prefix sum of layers 1..v.
    """
    if not (1 <= d <= catalog.num_objects and 1 <= v <= catalog.num_versions):
        raise IndexError(f"object/version ({d}, {v}) out of range")
    return float(catalog.layer_size[d - 1, : v].sum())


def apply_overhead(mr_sizes, overhead_percent: float) -> np.ndarray:
    """Derive LR layer sizes from MR version sizes and a percent overhead.

    The LR prefix sums come out as (1 + o/100) * s_MR(d, v), so the first
    layer carries the full size of version 1 and each further layer the
    inflated increment between consecutive MR versions.

    Parameters
    ----------
    mr_sizes : (D, V) or (V,) array
        Strictly increasing MR version sizes.
    overhead_percent : float
        Percent size penalty of LR over MR, o >= 0.

    Returns
    -------
    (D, V) or (V,) array of incremental layer sizes.
    """
    if overhead_percent < 0:
        raise ConfigurationError("overhead percent must be non-negative")
    mr = np.asarray(mr_sizes, dtype=float)
    if np.any(mr <= 0) or np.any(np.diff(mr, axis=-1) <= 0):
        raise ConfigurationError("MR sizes must be positive and strictly increasing in v")
    scaled = (1.0 + overhead_percent / 100.0) * mr
    return np.diff(scaled, axis=-1, prepend=0.0)


@dataclass(frozen=True)
class OverheadModel:
    """Percent overhead o of LR over MR: s_LR(d, v) = (1 + o/100) s_MR(d, v)."""

    overhead_percent: float = 0.0

    def __post_init__(self):
        if self.overhead_percent < 0:
            raise ConfigurationError("overhead percent must be non-negative")

    def lr_from_mr(self, mr_sizes) -> np.ndarray:
        """Cumulative LR version sizes implied by the MR sizes."""
        return (1.0 + self.overhead_percent / 100.0) * np.asarray(mr_sizes, dtype=float)

    def layer_sizes_from_mr(self, mr_sizes) -> np.ndarray:
        """Incremental LR layer sizes implied by the MR sizes."""
        return apply_overhead(mr_sizes, self.overhead_percent)
