"""Configuration-driven experiment runner with figure presets.

A configuration is one JSON document::

    {
      "mode": "simulate" | "approx" | "compare" | "asymptotic",
      "scenario": { ... catalog recipe, optional "sweep" and "variants" ... },
      "policies": ["llru", ...],
      "B_grid": [10, 20, 100],
      "num_requests": 1000000,
      "seed": 4,
      "replications": 5,
      "warmup_fraction": 0.0,
      "detail": "aggregate" | "version" | "layer" | "all",
      "output": "fig4.csv"
    }

All randomness flows from the one top-level seed: the catalog recipe uses
``seed * 1000`` and replication k samples its trace with seed
``seed * 1000 + k``.  Scenario recipes name their parameters after the
conventional symbols: ``alpha`` (two-version request split), ``zeta`` and
``eta`` (three-version split), ``m`` (parametric version-popularity
exponent), ``rho`` and ``kappa`` (layer-size shares), ``n`` (parametric
layer-size exponent), ``beta`` and ``overhead`` (first-version size and
percent layering overhead).  A ``sweep`` maps parameter names to value
lists (cartesian product); ``variants`` lists partial scenario overrides
merged one at a time.  Swept three-way shares honor an optional
``feasibility_floor``: combinations leaving any share below the floor are
skipped.

Simulated and analytical rows share one CSV schema; analytical rows carry
the policy name with an "-approx" suffix and empty count columns.  Every
run writes a sidecar ``<output>.meta.json`` echoing the resolved
configuration.  The environment variable LAYERCACHE_WORKERS (an integer)
is the only environment override and sets the process fan-out.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from itertools import product
from typing import List, Optional

import numpy as np

from layercache import __version__
from layercache.analysis import (
    ScalingModel,
    ScalingModel2D,
    asymptotic_hit_theorem1,
    asymptotic_hit_theorem2,
    mr_approximation,
    solve_characteristic_time,
)
from layercache.catalog import Catalog, ConfigurationError, derive_popularity
from layercache.policies import POLICY_NAMES, hlfu_static_placement, static_optimal
from layercache.sim import CSV_COLUMNS, approx_to_rows, sweep, write_csv
from layercache.workload import (
    parametric_layer_sizes,
    parametric_version_popularity,
    random_layer_sizes,
    split_versions_uniform_decreasing,
    zipf_object_popularity,
)

__all__ = [
    "ExperimentConfig",
    "ConfigValidationError",
    "figure_preset",
    "run_config",
    "main",
    "PRESET_NAMES",
]

MODES = ("simulate", "approx", "asymptotic", "compare")
SPLIT_RULES = ("uniform-decreasing", "two-way", "two-way-odd-even", "three-way", "parametric")
SIZE_RULES = ("random-integer", "two-way", "three-way", "parametric", "equal", "mr-overhead")
_ANALYTIC_POLICIES = ("llru", "mrlru", "static-opt", "hlfu-static")


class ConfigValidationError(ConfigurationError):
    """Carries the full list of offending fields."""

    def __init__(self, errors: List[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    scenario: dict
    output: str
    policies: tuple = ()
    B_grid: tuple = ()
    num_requests: int = 1_000_000
    seed: int = 1
    replications: int = 1
    warmup_fraction: float = 0.0
    detail: str = "aggregate"

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigValidationError([f"{k}: unknown field" for k in unknown])
        kwargs = dict(raw)
        if "policies" in kwargs:
            kwargs["policies"] = tuple(kwargs["policies"])
        if "B_grid" in kwargs:
            kwargs["B_grid"] = tuple(float(b) for b in kwargs["B_grid"])
        missing = [k for k in ("mode", "scenario", "output") if k not in kwargs]
        if missing:
            raise ConfigValidationError([f"{k}: required" for k in missing])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "scenario": self.scenario,
            "output": self.output,
            "policies": list(self.policies),
            "B_grid": list(self.B_grid),
            "num_requests": self.num_requests,
            "seed": self.seed,
            "replications": self.replications,
            "warmup_fraction": self.warmup_fraction,
            "detail": self.detail,
        }

    def trace_seeds(self) -> List[int]:
        return [self.seed * 1000 + k for k in range(1, self.replications + 1)]

    def catalog_seed(self) -> int:
        return self.seed * 1000

    def validate(self) -> List[str]:
        """Return every offending field as "path: problem" (empty if valid)."""
        errors: List[str] = []
        if self.mode not in MODES:
            errors.append(f"mode: must be one of {', '.join(MODES)}")
        if not self.output:
            errors.append("output: required")
        if not isinstance(self.scenario, dict):
            errors.append("scenario: must be a mapping")
            return errors
        if self.mode == "asymptotic":
            errors.extend(_validate_asymptotic(self.scenario.get("asymptotic")))
            return errors
        errors.extend(_validate_scenario(self.scenario))
        if not self.policies:
            errors.append("policies: at least one required")
        for p in self.policies:
            if p not in POLICY_NAMES:
                errors.append(f"policies: unknown policy {p!r}")
            elif self.mode == "approx" and p not in _ANALYTIC_POLICIES:
                errors.append(
                    f"policies: {p!r} has no analytical form; use simulate or compare"
                )
        if not self.B_grid:
            errors.append("B_grid: at least one capacity required")
        for b in self.B_grid:
            if b < 0 or (self.mode != "simulate" and b <= 0):
                errors.append(f"B_grid: capacity {b!r} out of range")
        if self.mode in ("simulate", "compare"):
            if self.num_requests < 1:
                errors.append("num_requests: must be >= 1")
            if self.replications < 1:
                errors.append("replications: must be >= 1")
        if not isinstance(self.seed, int):
            errors.append("seed: must be an integer")
        if not 0.0 <= self.warmup_fraction < 1.0:
            errors.append("warmup_fraction: must lie in [0, 1)")
        if self.detail not in ("aggregate", "version", "layer", "all"):
            errors.append("detail: must be aggregate, version, layer, or all")
        return errors


def _validate_scenario(s: dict) -> List[str]:
    errors: List[str] = []
    D = s.get("num_objects")
    if not isinstance(D, int) or D < 1:
        errors.append("scenario.num_objects: must be a positive integer")
    z = s.get("zipf_exponent")
    if not isinstance(z, (int, float)) or z < 0:
        errors.append("scenario.zipf_exponent: must be a non-negative number")
    floor = s.get("feasibility_floor", 0.0)
    if not isinstance(floor, (int, float)) or not 0 <= floor < 0.5:
        errors.append("scenario.feasibility_floor: must lie in [0, 0.5)")
    variants = s.get("variants", [{}])
    sweep_spec = s.get("sweep", {})
    if not isinstance(sweep_spec, dict):
        errors.append("scenario.sweep: must map parameter names to value lists")
        sweep_spec = {}
    for key, values in sweep_spec.items():
        if key not in _SWEEP_TARGETS:
            errors.append(f"scenario.sweep.{key}: unknown sweep parameter")
        elif not isinstance(values, (list, tuple)) or not values:
            errors.append(f"scenario.sweep.{key}: must be a non-empty list")
    if not isinstance(variants, list) or not variants:
        errors.append("scenario.variants: must be a non-empty list of overrides")
        variants = [{}]
    probe_values = {k: v[0] for k, v in sweep_spec.items()
                    if isinstance(v, (list, tuple)) and v}
    for i, variant in enumerate(variants):
        if not isinstance(variant, dict):
            errors.append(f"scenario.variants[{i}]: must be a mapping")
            continue
        merged = _merge_scenario(s, variant)
        merged = _apply_sweep_values(merged, probe_values)
        errors.extend(_validate_versions(merged.get("versions")))
        errors.extend(_validate_sizes(merged.get("sizes"), merged.get("versions")))
    return errors


def _validate_versions(vs) -> List[str]:
    errors: List[str] = []
    if not isinstance(vs, dict):
        return ["scenario.versions: must be a mapping"]
    V = vs.get("count")
    if not isinstance(V, int) or V < 1:
        errors.append("scenario.versions.count: must be a positive integer")
        return errors
    if V == 1:
        return errors
    rule = vs.get("split")
    if rule not in SPLIT_RULES:
        errors.append(f"scenario.versions.split: must be one of {', '.join(SPLIT_RULES)}")
        return errors
    if rule in ("two-way", "two-way-odd-even"):
        if V != 2:
            errors.append("scenario.versions.count: two-way splits need exactly 2 versions")
        a = vs.get("alpha")
        if not isinstance(a, (int, float)) or not 0.0 <= a <= 1.0:
            errors.append("scenario.versions.alpha: must lie in [0, 1]")
    elif rule == "three-way":
        if V != 3:
            errors.append("scenario.versions.count: three-way splits need exactly 3 versions")
        zeta, eta = vs.get("zeta"), vs.get("eta")
        for name, val in (("zeta", zeta), ("eta", eta)):
            if not isinstance(val, (int, float)) or val < 0:
                errors.append(f"scenario.versions.{name}: must be a non-negative number")
        if (isinstance(zeta, (int, float)) and isinstance(eta, (int, float))
                and zeta + eta > 1.0 + 1e-12):
            errors.append("scenario.versions.zeta: zeta + eta must not exceed 1")
    elif rule == "parametric":
        if not isinstance(vs.get("m"), (int, float)):
            errors.append("scenario.versions.m: must be a number")
    return errors


def _validate_sizes(sz, vs) -> List[str]:
    errors: List[str] = []
    if not isinstance(sz, dict):
        return ["scenario.sizes: must be a mapping"]
    rule = sz.get("rule")
    if rule not in SIZE_RULES:
        return [f"scenario.sizes.rule: must be one of {', '.join(SIZE_RULES)}"]
    V = vs.get("count") if isinstance(vs, dict) else None
    if rule == "mr-overhead":
        beta = sz.get("beta")
        if not isinstance(beta, (int, float)) or not 0.0 < beta < 1.0:
            errors.append("scenario.sizes.beta: must lie strictly between 0 and 1")
        o = sz.get("overhead")
        if not isinstance(o, (int, float)) or o < 0:
            errors.append("scenario.sizes.overhead: must be a non-negative percent")
        if V not in (None, 2):
            errors.append("scenario.sizes.rule: mr-overhead needs exactly 2 versions")
        return errors
    total = sz.get("total")
    if not isinstance(total, (int, float)) or total <= 0:
        errors.append("scenario.sizes.total: must be a positive number")
    if rule == "two-way":
        rho = sz.get("rho")
        if not isinstance(rho, (int, float)) or not 0.0 < rho < 1.0:
            errors.append("scenario.sizes.rho: must lie strictly between 0 and 1")
        if V not in (None, 2):
            errors.append("scenario.sizes.rule: two-way sizes need exactly 2 versions")
    elif rule == "three-way":
        rho, kappa = sz.get("rho"), sz.get("kappa")
        ok = True
        for name, val in (("rho", rho), ("kappa", kappa)):
            if not isinstance(val, (int, float)) or val <= 0:
                errors.append(f"scenario.sizes.{name}: must be a positive number")
                ok = False
        if ok and rho + kappa >= 1.0 - 1e-12:
            errors.append("scenario.sizes.rho: rho + kappa must stay below 1")
        if V not in (None, 3):
            errors.append("scenario.sizes.rule: three-way sizes need exactly 3 versions")
    elif rule == "parametric":
        # negative exponents front-load size into the base layer
        if not isinstance(sz.get("n"), (int, float)):
            errors.append("scenario.sizes.n: must be a number")
    elif rule == "random-integer":
        if not isinstance(total, int) or (V is not None and total < V):
            errors.append(
                "scenario.sizes.total: random integer sizes need an integer total >= versions"
            )
    return errors


def _validate_asymptotic(a) -> List[str]:
    errors: List[str] = []
    if not isinstance(a, dict):
        return ["scenario.asymptotic: required for asymptotic mode"]
    theorem = a.get("theorem")
    if theorem not in (1, 2):
        errors.append("scenario.asymptotic.theorem: must be 1 or 2")
    b = a.get("b")
    if not isinstance(b, (int, float)) or b <= 0:
        errors.append("scenario.asymptotic.b: must be a positive cache fraction")
    fe = a.get("f_exponent")
    if not isinstance(fe, (int, float)) or fe <= 0:
        errors.append("scenario.asymptotic.f_exponent: must be a positive number")
    points = a.get("num_points", 50)
    if not isinstance(points, int) or points < 2:
        errors.append("scenario.asymptotic.num_points: must be an integer >= 2")
    if theorem == 1:
        g = a.get("g_profile")
        if (not isinstance(g, (list, tuple)) or not g
                or any(not isinstance(x, (int, float)) or x < 0 for x in g)
                or abs(sum(g) - 1.0) > 1e-9):
            errors.append("scenario.asymptotic.g_profile: must be probabilities summing to 1")
    elif theorem == 2:
        ge = a.get("g_exponent")
        if not isinstance(ge, (int, float)) or ge <= 0:
            errors.append("scenario.asymptotic.g_exponent: must be a positive number")
        if a.get("variant", "suffix") not in ("suffix", "density"):
            errors.append("scenario.asymptotic.variant: must be suffix or density")
    return errors


# Sweep parameter name -> (section, field) inside the scenario.
_SWEEP_TARGETS = {
    "alpha": ("versions", "alpha"),
    "zeta": ("versions", "zeta"),
    "eta": ("versions", "eta"),
    "m": ("versions", "m"),
    "num_versions": ("versions", "count"),
    "rho": ("sizes", "rho"),
    "kappa": ("sizes", "kappa"),
    "n": ("sizes", "n"),
    "beta": ("sizes", "beta"),
    "overhead": ("sizes", "overhead"),
}


def _merge_scenario(base: dict, variant: dict) -> dict:
    merged = {k: v for k, v in base.items() if k not in ("sweep", "variants")}
    for key, value in variant.items():
        if key == "id":
            continue
        merged[key] = value
    return merged


def _apply_sweep_values(scenario: dict, values: dict) -> dict:
    out = dict(scenario)
    for key, value in values.items():
        section, fieldname = _SWEEP_TARGETS[key]
        out[section] = dict(out.get(section, {}))
        out[section][fieldname] = value
    return out


def _format_value(v) -> str:
    if isinstance(v, float):
        return format(v, ".4g")
    return str(v)


def _feasible(scenario: dict) -> bool:
    """Apply the share floor to swept three-way splits and sizes."""
    floor = scenario.get("feasibility_floor", 0.0)
    if floor <= 0:
        return True
    vs = scenario.get("versions", {})
    if vs.get("split") == "three-way":
        zeta, eta = vs.get("zeta", 0.0), vs.get("eta", 0.0)
        if min(zeta, eta, 1.0 - zeta - eta) < floor - 1e-9:
            return False
    sz = scenario.get("sizes", {})
    if sz.get("rule") == "three-way":
        rho, kappa = sz.get("rho", 0.0), sz.get("kappa", 0.0)
        if min(rho, kappa, 1.0 - rho - kappa) < floor - 1e-9:
            return False
    return True


def expand_scenarios(scenario: dict, catalog_seed: Optional[int] = None) -> list:
    """Resolve variants and sweeps into (scenario_id, resolved dict) pairs."""
    base_id = scenario.get("id", "scenario")
    variants = scenario.get("variants", [{}])
    sweep_spec = scenario.get("sweep", {})
    keys = list(sweep_spec)
    out = []
    for variant in variants:
        merged = _merge_scenario(scenario, variant)
        if catalog_seed is not None and "catalog_seed" not in merged:
            merged["catalog_seed"] = catalog_seed
        vid = base_id if "id" not in variant else f"{base_id}:{variant['id']}"
        for combo in product(*(sweep_spec[k] for k in keys)):
            values = dict(zip(keys, combo))
            resolved = _apply_sweep_values(merged, values)
            if not _feasible(resolved):
                continue
            sid = vid + "".join(f":{k}={_format_value(v)}" for k, v in values.items())
            out.append((sid, resolved))
    if not out:
        raise ConfigValidationError(
            ["scenario.sweep: no feasible parameter combination survives the floor"]
        )
    return out


def build_catalog(scenario: dict) -> Catalog:
    """Materialize one resolved scenario into a catalog (total rate 1)."""
    D = scenario["num_objects"]
    obj = zipf_object_popularity(D, scenario["zipf_exponent"])
    vs = scenario["versions"]
    V = vs["count"]
    rng = np.random.default_rng(scenario.get("catalog_seed"))
    if V == 1:
        q = obj[:, None]
    else:
        rule = vs["split"]
        if rule == "uniform-decreasing":
            q = np.stack([split_versions_uniform_decreasing(p, V, rng) for p in obj])
        elif rule == "two-way":
            a = vs["alpha"]
            q = np.outer(obj, [a, 1.0 - a])
        elif rule == "two-way-odd-even":
            a = vs["alpha"]
            q = np.outer(obj, [0.5, 0.5])
            odd = np.arange(1, D + 1) % 2 == 1
            q[odd] = np.outer(obj[odd], [a, 1.0 - a])
        elif rule == "three-way":
            zeta, eta = vs["zeta"], vs["eta"]
            q = np.outer(obj, [zeta, eta, max(1.0 - zeta - eta, 0.0)])
        else:  # parametric
            q = np.outer(obj, parametric_version_popularity(V, vs["m"]))
    sz = scenario["sizes"]
    rule = sz["rule"]
    mr = None
    if rule == "mr-overhead":
        beta, o = sz["beta"], sz["overhead"]
        factor = 1.0 + o / 100.0
        delta = np.tile([factor * beta, factor * (1.0 - beta)], (D, 1))
        mr = np.tile([beta, 1.0], (D, 1))
    elif rule == "random-integer":
        delta = np.stack([random_layer_sizes(V, sz["total"], rng) for _ in range(D)])
        delta = delta.astype(float)
    elif rule == "two-way":
        rho, total = sz["rho"], sz["total"]
        delta = np.tile([rho * total, (1.0 - rho) * total], (D, 1))
    elif rule == "three-way":
        rho, kappa, total = sz["rho"], sz["kappa"], sz["total"]
        delta = np.tile(
            [rho * total, kappa * total, (1.0 - rho - kappa) * total], (D, 1)
        )
    elif rule == "parametric":
        delta = np.tile(parametric_layer_sizes(V, sz["n"]) * sz["total"], (D, 1))
    else:  # equal
        delta = np.full((D, V), sz["total"] / V)
    return Catalog(layer_size=delta, rate=q, mr_size=mr)


def _approx_rows(sid: str, catalog: Catalog, policies, B_grid, detail: str) -> list:
    popularity = derive_popularity(catalog)
    detail = "layer" if detail in ("version", "all", "layer") else "aggregate"
    rows = []
    for B in B_grid:
        for policy in policies:
            if policy == "llru":
                sol = solve_characteristic_time(popularity, catalog, B)
                rows.extend(approx_to_rows(sid, "llru", sol, popularity, detail))
            elif policy == "mrlru":
                sol = mr_approximation(popularity, catalog, B)
                rows.extend(approx_to_rows(sid, "mrlru", sol, popularity, detail))
            elif policy in ("static-opt", "hlfu-static"):
                if policy == "static-opt":
                    placement = static_optimal(popularity, catalog, B)
                else:
                    placement = hlfu_static_placement(popularity, catalog, B)
                rows.append({
                    "scenario_id": sid, "policy": f"{policy}-approx", "B": float(B),
                    "d": "", "v_or_l": "", "kind": "aggregate", "requests": "",
                    "hits": "", "hit_prob": "",
                    "hit_rate": placement.hit_fraction(popularity), "N": "", "seed": "",
                })
    return rows


def _power_pair(exponent: float):
    f = lambda x: x**exponent

    def f_prime(x: float) -> float:
        return exponent * max(x, 1e-300) ** (exponent - 1.0)

    return f, f_prime


def _asymptotic_rows(config: ExperimentConfig) -> list:
    a = config.scenario["asymptotic"]
    sid = config.scenario.get("id", "asymptotic")
    points = a.get("num_points", 50)
    quad_tol = a.get("quad_tol", 1e-8)
    f, f_prime = _power_pair(a["f_exponent"])
    rows = []
    if a["theorem"] == 1:
        profile = list(a["g_profile"])
        V = len(profile)
        model = ScalingModel(
            f_prime=f_prime,
            g=lambda v, x: profile[v - 1],
            delta=lambda x, l: 1.0 / V,
            num_versions=V,
            f=f,
        )
        h = asymptotic_hit_theorem1(model, a["b"], quad_tol)
        policy = "theorem1-approx"
        for i in range(1, points + 1):
            x = (i - 0.5) / points
            for l in range(1, V + 1):
                rows.append({
                    "scenario_id": sid, "policy": policy, "B": a["b"], "d": i,
                    "v_or_l": l, "kind": "layer", "requests": "", "hits": "",
                    "hit_prob": h(x, l), "hit_rate": "", "N": "", "seed": "",
                })
    else:
        G, g_prime = _power_pair(a["g_exponent"])
        variant = a.get("variant", "suffix")
        model = ScalingModel2D(
            f_prime=f_prime, big_g=G, g_prime=g_prime,
            delta=lambda x, y: 1.0, f=f,
        )
        h = asymptotic_hit_theorem2(model, a["b"], quad_tol, variant=variant)
        policy = f"theorem2-{variant}-approx"
        for i in range(1, points + 1):
            x = (i - 0.5) / points
            for j in range(1, points + 1):
                y = (j - 0.5) / points
                rows.append({
                    "scenario_id": sid, "policy": policy, "B": a["b"], "d": i,
                    "v_or_l": j, "kind": "layer", "requests": "", "hits": "",
                    "hit_prob": h(x, y), "hit_rate": "", "N": "", "seed": "",
                })
    return rows


def _workers() -> int:
    raw = os.environ.get("LAYERCACHE_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigValidationError(["LAYERCACHE_WORKERS: must be an integer"]) from None


def run_config(config: ExperimentConfig) -> List[str]:
    """Execute a validated configuration; returns the written file paths."""
    errors = config.validate()
    if errors:
        raise ConfigValidationError(errors)
    if config.mode == "asymptotic":
        rows = _asymptotic_rows(config)
        resolved = {"scenarios": [config.scenario.get("id", "asymptotic")]}
    else:
        pairs = expand_scenarios(config.scenario, catalog_seed=config.catalog_seed())
        catalogs = [(sid, build_catalog(resolved)) for sid, resolved in pairs]
        rows = []
        if config.mode in ("simulate", "compare"):
            rows.extend(sweep(
                list(config.policies), catalogs, list(config.B_grid),
                config.num_requests, config.trace_seeds(), detail=config.detail,
                warmup_fraction=config.warmup_fraction, workers=_workers(),
            ))
        if config.mode == "approx":
            analytic = list(config.policies)
        elif config.mode == "compare":
            analytic = [p for p in config.policies if p in ("llru", "mrlru")]
        else:
            analytic = []
        for sid, catalog in catalogs:
            if analytic:
                rows.extend(_approx_rows(sid, catalog, analytic,
                                         list(config.B_grid), config.detail))
        resolved = {
            "scenarios": [sid for sid, _ in pairs],
            "trace_seeds": config.trace_seeds(),
            "catalog_seed": config.catalog_seed(),
        }
    write_csv(rows, config.output)
    meta_path = config.output + ".meta.json"
    meta = {
        "config": config.to_dict(),
        "resolved": resolved,
        "csv_columns": list(CSV_COLUMNS),
        "version": __version__,
    }
    if config.mode == "asymptotic":
        meta["notes"] = (
            "d indexes the x grid and v_or_l the layer (theorem 1) or y grid "
            "(theorem 2); coordinate = (index - 0.5) / num_points"
        )
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    return [config.output, meta_path]


def _grid(start: float, stop: float, count: int) -> List[float]:
    return [round(start + i * (stop - start) / (count - 1), 10) for i in range(count)]


def figure_preset(name: str) -> ExperimentConfig:
    """Fully resolved, seeded configurations reproducing the figure data."""
    if name not in PRESETS:
        raise ConfigValidationError([f"preset: unknown name {name!r}"])
    return ExperimentConfig.from_dict(PRESETS[name]())


def _preset_fig2() -> dict:
    return {
        "mode": "compare",
        "scenario": {
            "id": "fig2",
            "num_objects": 100,
            "zipf_exponent": 0.8,
            "catalog_seed": 2000,
            "versions": {"count": 4, "split": "uniform-decreasing"},
            "sizes": {"rule": "random-integer", "total": 240},
        },
        "policies": ["llru"],
        "B_grid": _grid(2400.0, 24000.0, 10),
        "num_requests": 5_000_000,
        "seed": 2,
        "replications": 1,
        "detail": "layer",
        "output": "fig2.csv",
    }


def _preset_fig3a() -> dict:
    return {
        "mode": "approx",
        "scenario": {
            "id": "fig3a",
            "num_objects": 100,
            "zipf_exponent": 0.8,
            "versions": {"count": 2, "split": "two-way", "alpha": 0.5},
            "sizes": {"rule": "mr-overhead", "beta": 0.5, "overhead": 0.0},
            "sweep": {"overhead": [0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0, 22.5, 25.0]},
        },
        "policies": ["llru", "mrlru"],
        "B_grid": [10.0, 20.0, 100.0],
        "seed": 3,
        "output": "fig3a.csv",
    }


def _preset_fig3b() -> dict:
    return {
        "mode": "compare",
        "scenario": {
            "id": "fig3b",
            "num_objects": 100,
            "zipf_exponent": 0.8,
            "versions": {"count": 2, "split": "two-way", "alpha": 0.5},
            "sizes": {"rule": "mr-overhead", "beta": 0.5, "overhead": 5.0},
            "sweep": {
                "overhead": [5.0, 25.0],
                "alpha": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            },
        },
        "policies": ["llru", "mrlru", "hlru", "hlfu-static"],
        "B_grid": [100.0],
        "num_requests": 1_000_000,
        "seed": 31,
        "replications": 1,
        "detail": "aggregate",
        "output": "fig3b.csv",
    }


def _preset_fig3c() -> dict:
    preset = _preset_fig3b()
    preset["scenario"]["id"] = "fig3c"
    preset["scenario"]["versions"]["split"] = "two-way-odd-even"
    preset["seed"] = 32
    preset["output"] = "fig3c.csv"
    return preset


def _preset_fig4() -> dict:
    return {
        "mode": "compare",
        "scenario": {
            "id": "fig4",
            "num_objects": 100,
            "zipf_exponent": 0.8,
            "versions": {"count": 2, "split": "two-way", "alpha": 0.99},
            "sizes": {"rule": "two-way", "rho": 0.5, "total": 1.0},
        },
        "policies": ["lbelady", "llfu", "llru", "static-opt"],
        "B_grid": _grid(5.0, 100.0, 20),
        "num_requests": 1_000_000,
        "seed": 4,
        "replications": 5,
        "detail": "aggregate",
        "output": "fig4.csv",
    }


def _preset_fig5() -> dict:
    return {
        "mode": "compare",
        "scenario": {
            "id": "fig5",
            "num_objects": 100,
            "zipf_exponent": 0.8,
            "versions": {"count": 2, "split": "two-way", "alpha": 0.99},
            "sizes": {"rule": "two-way", "rho": 0.5, "total": 1.0},
            "variants": [
                {"id": "one-version", "versions": {"count": 1},
                 "sizes": {"rule": "equal", "total": 1.0}},
                {"id": "alpha=0.99",
                 "versions": {"count": 2, "split": "two-way", "alpha": 0.99}},
                {"id": "alpha=0.9",
                 "versions": {"count": 2, "split": "two-way", "alpha": 0.9}},
                {"id": "alpha=0.5",
                 "versions": {"count": 2, "split": "two-way", "alpha": 0.5}},
            ],
        },
        "policies": ["lbelady", "llfu", "llru", "static-opt"],
        "B_grid": _grid(5.0, 100.0, 20),
        "num_requests": 1_000_000,
        "seed": 5,
        "replications": 1,
        "detail": "aggregate",
        "output": "fig5.csv",
    }


def _preset_fig6() -> dict:
    return {
        "mode": "compare",
        "scenario": {
            "id": "fig6",
            "num_objects": 100,
            "zipf_exponent": 0.8,
            "versions": {"count": 2, "split": "two-way", "alpha": 0.5},
            "sizes": {"rule": "two-way", "rho": 0.5, "total": 1.0},
            "sweep": {"alpha": [round(0.05 * i, 10) for i in range(1, 20)]},
        },
        "policies": ["llru"],
        "B_grid": [10.0, 20.0, 40.0],
        "num_requests": 200_000,
        "seed": 6,
        "replications": 4,
        "detail": "all",
        "output": "fig6.csv",
    }


def _preset_fig7() -> dict:
    grid = [round(0.1 * i, 10) for i in range(1, 10)]
    return {
        "mode": "approx",
        "scenario": {
            "id": "fig7",
            "num_objects": 100,
            "zipf_exponent": 0.8,
            "versions": {"count": 2, "split": "two-way", "alpha": 0.5},
            "sizes": {"rule": "two-way", "rho": 0.5, "total": 1.0},
            "sweep": {"alpha": grid, "rho": grid},
        },
        "policies": ["llru"],
        "B_grid": [20.0],
        "seed": 7,
        "output": "fig7.csv",
    }


def _preset_fig8() -> dict:
    grid = [round(0.1 * i, 10) for i in range(1, 9)]
    return {
        "mode": "approx",
        "scenario": {
            "id": "fig8",
            "num_objects": 100,
            "zipf_exponent": 0.8,
            "feasibility_floor": 0.1,
            "versions": {"count": 3, "split": "three-way", "zeta": 0.3, "eta": 0.3},
            "sizes": {"rule": "three-way", "rho": 0.2, "kappa": 0.4, "total": 1.0},
            "variants": [
                {"id": "small-first-layer",
                 "sizes": {"rule": "three-way", "rho": 0.2, "kappa": 0.4, "total": 1.0}},
                {"id": "large-first-layer",
                 "sizes": {"rule": "three-way", "rho": 0.6, "kappa": 0.2, "total": 1.0}},
            ],
            "sweep": {"zeta": grid, "eta": grid},
        },
        "policies": ["llru"],
        "B_grid": [80.0],
        "seed": 8,
        "output": "fig8.csv",
    }


def _preset_fig9() -> dict:
    grid = [round(0.1 * i, 10) for i in range(1, 9)]
    third = 1.0 / 3.0
    return {
        "mode": "approx",
        "scenario": {
            "id": "fig9",
            "num_objects": 100,
            "zipf_exponent": 0.8,
            "feasibility_floor": 0.1,
            "versions": {"count": 3, "split": "three-way", "zeta": third, "eta": third},
            "sizes": {"rule": "three-way", "rho": 0.3, "kappa": 0.3, "total": 1.0},
            "variants": [
                {"id": "uniform-popularity",
                 "versions": {"count": 3, "split": "three-way", "zeta": third, "eta": third}},
                {"id": "skewed-popularity",
                 "versions": {"count": 3, "split": "three-way", "zeta": 0.8, "eta": 0.1}},
            ],
            "sweep": {"rho": grid, "kappa": grid},
        },
        "policies": ["llru"],
        "B_grid": [80.0],
        "seed": 9,
        "output": "fig9.csv",
    }


def _preset_fig11() -> dict:
    return {
        "mode": "approx",
        "scenario": {
            "id": "fig11",
            "num_objects": 100,
            "zipf_exponent": 0.8,
            "versions": {"count": 2, "split": "parametric", "m": 1.0},
            "sizes": {"rule": "parametric", "n": 1.0, "total": 1.0},
            "sweep": {
                "m": [0.5, 1.0, 2.0],
                "n": [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0],
                "num_versions": [1, 2, 3, 4, 5, 6, 7, 8],
            },
        },
        "policies": ["llru"],
        "B_grid": [20.0],
        "seed": 11,
        "output": "fig11.csv",
    }


PRESETS = {
    "fig2": _preset_fig2,
    "fig3a": _preset_fig3a,
    "fig3b": _preset_fig3b,
    "fig3c": _preset_fig3c,
    "fig4": _preset_fig4,
    "fig5": _preset_fig5,
    "fig6": _preset_fig6,
    "fig7": _preset_fig7,
    "fig8": _preset_fig8,
    "fig9": _preset_fig9,
    "fig11": _preset_fig11,
}
PRESET_NAMES = tuple(PRESETS)


def _load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigValidationError([f"config: file not found: {path}"]) from None
    except json.JSONDecodeError as exc:
        raise ConfigValidationError([f"config: invalid JSON: {exc}"]) from None
    if not isinstance(raw, dict):
        raise ConfigValidationError(["config: top level must be a mapping"])
    return ExperimentConfig.from_dict(raw)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="layercache",
        description="Cache simulation and analysis for layered data objects.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in ("simulate", "approx", "asymptotic", "compare"):
        p = sub.add_parser(cmd, help=f"run a config in {cmd} mode")
        p.add_argument("config", help="path to a JSON configuration")
    p = sub.add_parser("preset", help="write a named figure preset config")
    p.add_argument("name", help=f"one of: {', '.join(PRESET_NAMES)}")
    p.add_argument("--out", default=".", help="directory for <name>.json")
    p = sub.add_parser("validate", help="check a config and report every problem")
    p.add_argument("config", help="path to a JSON configuration")
    args = parser.parse_args(argv)
    try:
        if args.command == "preset":
            config = figure_preset(args.name)
            path = os.path.join(args.out, f"{args.name}.json")
            os.makedirs(args.out, exist_ok=True)
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
            print(path)
            return 0
        config = _load_config(args.config)
        if args.command == "validate":
            errors = config.validate()
            if errors:
                for e in errors:
                    print(e, file=sys.stderr)
                return 2
            print("ok")
            return 0
        config = replace(config, mode=args.command)
        for path in run_config(config):
            print(path)
        return 0
    except ConfigValidationError as exc:
        for e in exc.errors:
            print(e, file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures exit 1 by contract
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
