"""Working-set approximations and continuum limits for layered LRU.

The central object is the characteristic time t*(B): the horizon at which
the expected working set (total size of distinct units touched) first
fills the cache.  Per-unit hit probabilities follow as the chance the
unit is touched again within that horizon.  Two arrival models are
supported: "discrete-bernoulli" counts time in request slots, so a unit
with per-slot touch probability p has hit probability
1 - (1 - p)^(t* - 1); "continuous-poisson" uses arrival rates gamma and
1 - exp(-gamma t*).

Large-catalog limits replace the finite fixed point by an integral
equation over object popularity shape F and per-version profile g (one
scaling dimension) or a version shape G (two scaling dimensions); the
evaluators here solve the integral fixed point and return closed-form
hit surfaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from layercache.catalog import Catalog, ConfigurationError, DerivedPopularity

__all__ = [
    "ApproxSolution",
    "ScalingModel",
    "ScalingModel2D",
    "WorkingSetSample",
    "adaptive_simpson",
    "asymptotic_hit_theorem1",
    "asymptotic_hit_theorem2",
    "expected_working_set",
    "finite_catalog_from_scaling",
    "mr_approximation",
    "per_unit_characteristic_time",
    "sample_working_set_variance",
    "solve_characteristic_time",
    "variance_bound",
]

DISCRETE = "discrete-bernoulli"
POISSON = "continuous-poisson"

_MODE_ALIASES = {
    "discrete": DISCRETE,
    "bernoulli": DISCRETE,
    DISCRETE: DISCRETE,
    "poisson": POISSON,
    "continuous": POISSON,
    POISSON: POISSON,
}


def _canonical_mode(mode: str) -> str:
    try:
        return _MODE_ALIASES[mode]
    except KeyError:
        raise ConfigurationError(
            f"unknown mode {mode!r}; use {DISCRETE!r} or {POISSON!r}"
        ) from None


@dataclass(frozen=True)
class ApproxSolution:
    """A characteristic time with the per-unit hit probabilities it implies.

    ``hit_prob[d, l]`` indexes layers for the layered solvers and versions
    for the MR baseline.  ``characteristic_time`` is real-valued (time
    slots in discrete mode) or ``math.inf`` when the cache holds every
    unit with positive demand.
    """

    characteristic_time: float
    hit_prob: np.ndarray
    mode: str
    residual: float
    capacity: float
    touch_prob: np.ndarray
    unit_size: np.ndarray

    def __post_init__(self):
        for arr in (self.hit_prob, self.touch_prob, self.unit_size):
            arr.setflags(write=False)

    def hit_rate(self, popularity: DerivedPopularity) -> float:
        """Request-weighted hit fraction implied by the solution."""
        return float((popularity.version_prob * self.hit_prob).sum())

    def to_csv(self, path) -> None:
        """Write per-unit rows (d, l, p, delta, hit_prob), 1-based indices."""
        t = format(self.characteristic_time, ".10g")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(
                f"# B={self.capacity:.10g} mode={self.mode} "
                f"t_star={t} residual={self.residual:.10g}\n"
            )
            fh.write("d,l,p,delta,hit_prob\n")
            D, V = self.hit_prob.shape
            for d in range(D):
                for l in range(V):
                    fh.write(
                        f"{d + 1},{l + 1},{self.touch_prob[d, l]:.10g},"
                        f"{self.unit_size[d, l]:.10g},{self.hit_prob[d, l]:.10g}\n"
                    )


def _occupancy_terms(sizes: np.ndarray, probs: np.ndarray, mode: str):
    """Return f(t) -> per-unit expected resident size, vectorized in units."""
    if mode == DISCRETE:
        # (1 - p)^(t - 1) via exp((t - 1) log(1 - p)); p = 1 clipped so the
        # term vanishes for t > 1 instead of producing 0 * inf.
        logq = np.log1p(-np.minimum(probs, 1.0 - 1e-15))

        def terms(t: float) -> np.ndarray:
            return sizes * -np.expm1((t - 1.0) * logq)

    else:

        def terms(t: float) -> np.ndarray:
            return sizes * -np.expm1(-probs * t)

    return terms


def expected_working_set(
    popularity: DerivedPopularity, catalog: Catalog, t: float, mode: str = DISCRETE
) -> float:
    """Expected total size of distinct units touched up to horizon t.

    Discrete mode counts request slots (t >= 1, zero at t = 1); Poisson
    mode takes t >= 0 in continuous time and uses layer arrival rates.
    """
    mode = _canonical_mode(mode)
    if mode == DISCRETE:
        if t < 1:
            raise ConfigurationError("discrete horizons start at t = 1")
        probs = popularity.layer_prob
    else:
        if t < 0:
            raise ConfigurationError("continuous horizons start at t = 0")
        probs = popularity.layer_rate
    terms = _occupancy_terms(catalog.layer_size.ravel(), probs.ravel(), mode)
    return float(terms(float(t)).sum())


def _solve_root(terms, B: float, mode: str, tol: float):
    """Root of sum(terms(t)) = B by bracket doubling then bisection.

    Caller guarantees a finite root exists (B below the reachable total).
    Returns (t, residual).
    """
    lo = 1.0 if mode == DISCRETE else 0.0
    hi = 2.0 if mode == DISCRETE else 1.0
    for _ in range(200):
        if terms(hi).sum() >= B:
            break
        lo = hi
        hi *= 2.0
    else:
        return math.inf, math.inf
    target = tol * max(1.0, B)
    mid = hi
    for _ in range(500):
        mid = 0.5 * (lo + hi)
        r = float(terms(mid).sum())
        if abs(r - B) <= target or (hi - lo) <= 1e-15 * max(1.0, hi):
            break
        if r < B:
            lo = mid
        else:
            hi = mid
    return mid, abs(float(terms(mid).sum()) - B)


def _fixed_point_solution(
    sizes: np.ndarray,
    probs: np.ndarray,
    B: float,
    mode: str,
    tol: float,
    shape,
    capacity: float,
) -> ApproxSolution:
    """Shared solver: units are bare (size, prob-or-rate) pairs."""
    if B <= 0:
        raise ConfigurationError("cache capacity must be strictly positive")
    if tol <= 0:
        raise ConfigurationError("tolerance must be strictly positive")
    flat_sizes = np.asarray(sizes, dtype=float).ravel()
    flat_probs = np.asarray(probs, dtype=float).ravel()
    active = flat_probs > 0
    reachable = float(flat_sizes[active].sum())
    if B >= reachable:
        hit = np.where(active, 1.0, 0.0).reshape(shape)
        return ApproxSolution(
            characteristic_time=math.inf,
            hit_prob=hit,
            mode=mode,
            residual=0.0,
            capacity=capacity,
            touch_prob=flat_probs.reshape(shape).copy(),
            unit_size=flat_sizes.reshape(shape).copy(),
        )
    terms = _occupancy_terms(flat_sizes, flat_probs, mode)
    t_star, residual = _solve_root(terms, B, mode, tol)
    if mode == DISCRETE:
        logq = np.log1p(-np.minimum(flat_probs, 1.0 - 1e-15))
        hit = -np.expm1((t_star - 1.0) * logq)
    else:
        hit = -np.expm1(-flat_probs * t_star)
    hit[~active] = 0.0
    return ApproxSolution(
        characteristic_time=t_star,
        hit_prob=hit.reshape(shape),
        mode=mode,
        residual=residual,
        capacity=capacity,
        touch_prob=flat_probs.reshape(shape).copy(),
        unit_size=flat_sizes.reshape(shape).copy(),
    )


def solve_characteristic_time(
    popularity: DerivedPopularity,
    catalog: Catalog,
    B: float,
    mode: str = DISCRETE,
    tol: float = 1e-9,
) -> ApproxSolution:
    """Working-set approximation for layered LRU at capacity B.

    Finds the unique t* with expected_working_set(t*) = B (the map is
    continuous and strictly increasing while below the reachable total)
    and evaluates per-layer hit probabilities at that horizon.  When B
    covers every unit with positive demand, t* = inf and those units get
    hit probability 1; zero-demand units always get 0.
    """
    mode = _canonical_mode(mode)
    probs = popularity.layer_prob if mode == DISCRETE else popularity.layer_rate
    return _fixed_point_solution(
        catalog.layer_size, probs, B, mode, tol, catalog.layer_size.shape, B
    )


def per_unit_characteristic_time(
    popularity: DerivedPopularity,
    catalog: Catalog,
    B: float,
    d: int,
    l: int,
    mode: str = DISCRETE,
    tol: float = 1e-9,
) -> float:
    """Characteristic time seen by layer l of object d (both 1-based).

    Same fixed point as :func:`solve_characteristic_time` but with the
    unit's own layers k >= l excluded from the working-set sum, since the
    target unit cannot evict itself and its upper layers leave with it.
    Returns ``math.inf`` when the excluded working set never reaches B.
    """
    mode = _canonical_mode(mode)
    if B <= 0:
        raise ConfigurationError("cache capacity must be strictly positive")
    if not (1 <= d <= catalog.num_objects and 1 <= l <= catalog.num_versions):
        raise IndexError("object or layer index out of range")
    probs = popularity.layer_prob if mode == DISCRETE else popularity.layer_rate
    keep = np.ones(catalog.layer_size.shape, dtype=bool)
    keep[d - 1, l - 1 :] = False
    sizes = catalog.layer_size[keep].ravel()
    kept_probs = probs[keep].ravel()
    active = kept_probs > 0
    if B >= float(sizes[active].sum()):
        return math.inf
    terms = _occupancy_terms(sizes, kept_probs, mode)
    t, _residual = _solve_root(terms, B, mode, tol)
    return t


def mr_approximation(
    popularity: DerivedPopularity,
    catalog_mr: Union[Catalog, np.ndarray],
    B: float,
    mode: str = DISCRETE,
    tol: float = 1e-9,
) -> ApproxSolution:
    """Working-set approximation with independent whole versions as units.

    ``catalog_mr`` is either a catalog (its per-version MR sizes are
    used) or a bare (D, V) array of version sizes.  ``hit_prob`` indexes
    versions, not layers.
    """
    mode = _canonical_mode(mode)
    if isinstance(catalog_mr, Catalog):
        sizes = catalog_mr.mr_size
    else:
        sizes = np.asarray(catalog_mr, dtype=float)
    if sizes.shape != popularity.version_prob.shape:
        raise ConfigurationError("version sizes and popularity shapes differ")
    if mode == DISCRETE:
        probs = popularity.version_prob
    else:
        probs = popularity.version_prob * popularity.total_rate
    return _fixed_point_solution(sizes, probs, B, mode, tol, sizes.shape, B)


def variance_bound(D: int, V: int, delta_max: float) -> float:
    """Upper bound on the working-set size variance at any horizon.

    Equals (D V / 4 + D V (V - 1)) delta_max^2: one Bernoulli quarter per
    unit plus a covariance allowance for the coupling of a layer with the
    V - 1 other layers of its object.
    """
    if D < 1 or V < 1:
        raise ConfigurationError("need at least one object and one version")
    if delta_max <= 0:
        raise ConfigurationError("delta_max must be strictly positive")
    return (D * V / 4 + D * V * (V - 1)) * delta_max**2


@dataclass(frozen=True)
class WorkingSetSample:
    """Per-replication working-set sizes at one horizon."""

    t: float
    sizes: np.ndarray
    mean: float
    variance: float

    def __post_init__(self):
        self.sizes.setflags(write=False)


def sample_working_set_variance(
    popularity: DerivedPopularity,
    catalog: Catalog,
    t: int,
    replications: int,
    rng: np.random.Generator,
) -> WorkingSetSample:
    """Monte Carlo distribution of the working-set size after t - 1 slots.

    Each replication draws t - 1 requests from the version distribution in
    one multinomial; layer l of object d counts as touched when any
    request hits a version >= l, which preserves the coupling between the
    layers of one object and, through the shared slot count, across
    objects.  Variance is the unbiased (n - 1) estimator.
    """
    if replications < 2:
        raise ConfigurationError("need at least two replications for a variance")
    if t < 1:
        raise ConfigurationError("discrete horizons start at t = 1")
    D, V = catalog.num_objects, catalog.num_versions
    q = popularity.version_prob.ravel()
    trials = int(t) - 1
    # Cumulative layer sizes: touched-up-to-version v contributes s_LR(d, v).
    slr = np.concatenate([np.zeros((D, 1)), catalog.lr_size], axis=1)
    sizes = np.empty(replications)
    chunk = max(1, 4_000_000 // max(1, D * V))
    done = 0
    while done < replications:
        n = min(chunk, replications - done)
        counts = rng.multinomial(trials, q, size=n).reshape(n, D, V)
        touched = counts[:, :, ::-1].cumsum(axis=2)[:, :, ::-1] > 0
        max_version = touched.sum(axis=2)  # layers touched form a prefix
        sizes[done : done + n] = slr[np.arange(D)[None, :], max_version].sum(axis=1)
        done += n
    return WorkingSetSample(
        t=float(t),
        sizes=sizes,
        mean=float(sizes.mean()),
        variance=float(sizes.var(ddof=1)),
    )


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-8,
    max_depth: int = 30,
) -> float:
    """Adaptive Simpson quadrature of f on [a, b] to absolute tolerance.

    Interval halving stops when the Richardson error estimate drops below
    the local tolerance or the subdivision depth cap is reached; smooth
    integrands converge long before the cap.
    """
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, fa, m, fm, b, fb, whole, tol, depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = left + right - whole
        if depth >= max_depth or abs(err) <= 15.0 * tol:
            return left + right + err / 15.0
        return recurse(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1) + recurse(
            m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1
        )

    return recurse(a, fa, m, fm, b, fb, whole, tol, 0)


@dataclass(frozen=True)
class ScalingModel:
    """Continuum description of a catalog growing in the object dimension.

    F is the object-popularity shape on [0, 1] (F(0) = 0, F(1) = 1,
    increasing), supplied with its derivative; g(v; x) is the per-version
    probability profile at relative object position x; delta(x, l) the
    layer-size field.  ``b`` is the cache size per object and may be
    supplied here or to the evaluator.
    """

    f_prime: Callable[[float], float]
    g: Callable[[int, float], float]
    delta: Callable[[float, int], float]
    num_versions: int
    f: Optional[Callable[[float], float]] = None
    b: Optional[float] = None

    def __post_init__(self):
        if self.num_versions < 1:
            raise ConfigurationError("need at least one version")
        for x in (0.15, 0.5, 0.85):
            total = sum(self.g(v, x) for v in range(1, self.num_versions + 1))
            if abs(total - 1.0) > 1e-6:
                raise ConfigurationError(
                    f"version profile must sum to 1 (got {total:.8f} at x={x})"
                )
        if self.f is not None:
            if abs(self.f(0.0)) > 1e-9 or abs(self.f(1.0) - 1.0) > 1e-9:
                raise ConfigurationError("F must satisfy F(0) = 0 and F(1) = 1")

    def version_suffix(self, l: int, x: float) -> float:
        """Probability that a request at position x touches layer l."""
        return sum(self.g(v, x) for v in range(l, self.num_versions + 1))


@dataclass(frozen=True)
class ScalingModel2D:
    """Continuum description growing in both object and version dimensions.

    G is the version-popularity shape (same endpoint conditions as F) with
    derivative g_prime; delta(x, y) is the layer-size field over relative
    object and layer positions.  ``b`` is the cache size per unit (object
    times version cell).
    """

    f_prime: Callable[[float], float]
    big_g: Callable[[float], float]
    g_prime: Callable[[float], float]
    delta: Callable[[float, float], float]
    f: Optional[Callable[[float], float]] = None
    b: Optional[float] = None

    def __post_init__(self):
        for name, fn in (("F", self.f), ("G", self.big_g)):
            if fn is not None and (abs(fn(0.0)) > 1e-9 or abs(fn(1.0) - 1.0) > 1e-9):
                raise ConfigurationError(f"{name} must satisfy {name}(0) = 0 and {name}(1) = 1")


class AsymptoticHit:
    """Limit hit-probability surface, callable as h(x, l) or h(x, y)."""

    def __init__(self, tau_star: float, exponent: Callable[..., float]):
        self.tau_star = tau_star
        self._exponent = exponent

    def __call__(self, x, *rest):
        return 1.0 - math.exp(-self.tau_star * self._exponent(x, *rest))


def _solve_tau(occupied: Callable[[float], float], b: float, total: float) -> float:
    """Root of occupied(tau) = b; occupied is increasing with limit total."""
    if not 0 < b < total:
        raise ConfigurationError(
            f"cache fraction must lie strictly between 0 and the total mass {total:.6g}"
        )
    lo, hi = 0.0, 1.0
    for _ in range(200):
        if occupied(hi) >= b:
            break
        lo = hi
        hi *= 2.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if occupied(mid) < b:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def asymptotic_hit_theorem1(
    model: ScalingModel, b: Optional[float] = None, quad_tol: float = 1e-8
) -> AsymptoticHit:
    """Limit per-layer hit probabilities for a catalog growing in objects.

    Solves the integral fixed point for the scaled characteristic time
    tau* at cache-per-object b and returns the surface
    h(x, l) = 1 - exp(-tau* F'(x) sum_{v >= l} g(v; x)).  The exponent
    uses the suffix mass of the version profile: layer l is touched by
    requests for versions l and above, matching the finite-catalog touch
    probability p(d, l).
    """
    if b is None:
        b = model.b
    if b is None:
        raise ConfigurationError("cache fraction b is required")
    V = model.num_versions

    def occupied(tau: float) -> float:
        total = 0.0
        for l in range(1, V + 1):
            total += adaptive_simpson(
                lambda x: model.delta(x, l)
                * -math.expm1(-tau * model.f_prime(x) * model.version_suffix(l, x)),
                0.0,
                1.0,
                quad_tol / V,
            )
        return total

    mass = sum(
        adaptive_simpson(lambda x: model.delta(x, l), 0.0, 1.0, quad_tol / V)
        for l in range(1, V + 1)
    )
    tau_star = _solve_tau(occupied, b, mass)
    return AsymptoticHit(
        tau_star, lambda x, l: model.f_prime(x) * model.version_suffix(l, x)
    )


def asymptotic_hit_theorem2(
    model: ScalingModel2D,
    b: Optional[float] = None,
    quad_tol: float = 1e-8,
    variant: str = "suffix",
) -> AsymptoticHit:
    """Limit hit surface for a catalog growing in objects and versions.

    The "suffix" variant uses exponent F'(x) (1 - G(y)): a layer at
    relative depth y is touched by the request mass above it, matching
    the finite-catalog p(d, l).  The "density" variant uses F'(x) G'(y)
    instead, reading the version shape pointwise; it is retained for
    comparison because the two differ except under uniform G.
    """
    if b is None:
        b = model.b
    if b is None:
        raise ConfigurationError("cache fraction b is required")
    if variant == "suffix":
        exponent = lambda x, y: model.f_prime(x) * (1.0 - model.big_g(y))
    elif variant == "density":
        exponent = lambda x, y: model.f_prime(x) * model.g_prime(y)
    else:
        raise ConfigurationError("variant must be 'suffix' or 'density'")

    def occupied(tau: float) -> float:
        def inner(x: float) -> float:
            return adaptive_simpson(
                lambda y: model.delta(x, y) * -math.expm1(-tau * exponent(x, y)),
                0.0,
                1.0,
                quad_tol * 0.5,
            )

        return adaptive_simpson(inner, 0.0, 1.0, quad_tol * 0.5)

    mass = adaptive_simpson(
        lambda x: adaptive_simpson(lambda y: model.delta(x, y), 0.0, 1.0, quad_tol * 0.5),
        0.0,
        1.0,
        quad_tol * 0.5,
    )
    tau_star = _solve_tau(occupied, b, mass)
    return AsymptoticHit(tau_star, exponent)


def finite_catalog_from_scaling(
    model: Union[ScalingModel, ScalingModel2D],
    num_objects: int,
    num_versions: Optional[int] = None,
) -> Catalog:
    """Materialize a finite catalog from a continuum description.

    Object d receives request mass F(d/D) - F((d-1)/D); versions follow
    g(v; d/D) for the one-dimensional model or G-increments for the
    two-dimensional one.  Layer sizes sample the delta field at cell
    midcoordinates (d/D, l) or (d/D, l/V).  Requires the model to carry F
    itself, not just its derivative.
    """
    D = num_objects
    if D < 1:
        raise ConfigurationError("need at least one object")
    if model.f is None:
        raise ConfigurationError("materializing a catalog needs F itself")
    F = model.f
    fdiff = np.array([F(d / D) - F((d - 1) / D) for d in range(1, D + 1)])
    if isinstance(model, ScalingModel):
        if num_versions is not None and num_versions != model.num_versions:
            raise ConfigurationError("the one-dimensional model has a fixed version count")
        V = model.num_versions
        g = np.array([[model.g(v, d / D) for v in range(1, V + 1)] for d in range(1, D + 1)])
        rate = fdiff[:, None] * g
        delta = np.array(
            [[model.delta(d / D, l) for l in range(1, V + 1)] for d in range(1, D + 1)]
        )
    else:
        if num_versions is None:
            raise ConfigurationError("the two-dimensional model needs a version count")
        V = num_versions
        G = model.big_g
        gdiff = np.array([G(v / V) - G((v - 1) / V) for v in range(1, V + 1)])
        rate = fdiff[:, None] * gdiff[None, :]
        delta = np.array(
            [[model.delta(d / D, l / V) for l in range(1, V + 1)] for d in range(1, D + 1)]
        )
    return Catalog(layer_size=delta, rate=rate)
