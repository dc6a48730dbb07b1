"""Fixed-point and continuum-limit solvers against closed-form oracles.

Wherever a case has an analytic answer (symmetric populations, single
units, separable continuum integrands) the expected value is computed
here from the formula directly, with scipy doing the independent root
finding and quadrature.
"""

import math

import numpy as np
import pytest
from scipy import integrate, optimize

from layercache import (
    Catalog,
    ConfigurationError,
    ScalingModel,
    ScalingModel2D,
    asymptotic_hit_theorem1,
    asymptotic_hit_theorem2,
    derive_popularity,
    expected_working_set,
    finite_catalog_from_scaling,
    mr_approximation,
    per_unit_characteristic_time,
    sample_working_set_variance,
    solve_characteristic_time,
    variance_bound,
)
from layercache.analysis import DISCRETE, POISSON, adaptive_simpson


def demo_catalog():
    return Catalog(
        layer_size=np.array([[1.0, 2.0], [3.0, 1.0]]),
        rate=np.array([[0.5, 0.25], [0.2, 0.05]]),
    )


def test_expected_working_set_discrete_oracle():
    """Hand-evaluated Bernoulli occupancy at horizon t = 3."""
    cat = demo_catalog()
    pop = derive_popularity(cat)
    expected = (
        1.0 * (1 - 0.25**2)
        + 2.0 * (1 - 0.75**2)
        + 3.0 * (1 - 0.75**2)
        + 1.0 * (1 - 0.95**2)
    )
    assert expected_working_set(pop, cat, 3.0) == pytest.approx(expected, abs=1e-12)
    assert expected_working_set(pop, cat, 1.0) == 0.0


def test_expected_working_set_poisson_oracle():
    cat = demo_catalog()
    pop = derive_popularity(cat)
    t = 2.0
    expected = (
        1.0 * (1 - math.exp(-0.75 * t))
        + 2.0 * (1 - math.exp(-0.25 * t))
        + 3.0 * (1 - math.exp(-0.25 * t))
        + 1.0 * (1 - math.exp(-0.05 * t))
    )
    assert expected_working_set(pop, cat, t, mode=POISSON) == pytest.approx(expected)
    assert expected_working_set(pop, cat, 0.0, mode=POISSON) == 0.0


def test_expected_working_set_rejects_bad_horizons():
    cat = demo_catalog()
    pop = derive_popularity(cat)
    with pytest.raises(ConfigurationError):
        expected_working_set(pop, cat, 0.5)
    with pytest.raises(ConfigurationError):
        expected_working_set(pop, cat, -0.1, mode=POISSON)
    with pytest.raises(ConfigurationError):
        expected_working_set(pop, cat, 2.0, mode="weird")


def test_single_unit_hit_prob_is_fill_fraction():
    """One unit: occupancy delta * h = B forces h = B / delta exactly."""
    cat = Catalog(layer_size=np.array([[2.0]]), rate=np.array([[1.0]]))
    pop = derive_popularity(cat)
    for mode in (DISCRETE, POISSON):
        for B in (0.5, 1.0, 1.5):
            sol = solve_characteristic_time(pop, cat, B, mode=mode)
            assert sol.hit_prob[0, 0] == pytest.approx(B / 2.0, abs=1e-8)
            assert sol.residual <= 1e-9 * max(1.0, B)


def test_equiprobable_population_closed_form():
    """D symmetric unit objects: h = B/D and t* has a log closed form."""
    for D, B in ((10, 3.0), (100, 40.0)):
        cat = Catalog(layer_size=np.ones((D, 1)), rate=np.full((D, 1), 1.0 / D))
        pop = derive_popularity(cat)
        sol = solve_characteristic_time(pop, cat, B)
        assert np.allclose(sol.hit_prob, B / D, atol=1e-8)
        t_expected = 1.0 + math.log(1.0 - B / D) / math.log(1.0 - 1.0 / D)
        assert sol.characteristic_time == pytest.approx(t_expected, rel=1e-6)
        poisson = solve_characteristic_time(pop, cat, B, mode=POISSON)
        assert np.allclose(poisson.hit_prob, B / D, atol=1e-8)


def test_mode_aliases_accepted():
    cat = demo_catalog()
    pop = derive_popularity(cat)
    a = solve_characteristic_time(pop, cat, 2.0, mode="bernoulli")
    b = solve_characteristic_time(pop, cat, 2.0, mode="discrete")
    c = solve_characteristic_time(pop, cat, 2.0, mode=DISCRETE)
    assert a.characteristic_time == b.characteristic_time == c.characteristic_time
    p = solve_characteristic_time(pop, cat, 2.0, mode="poisson")
    assert p.mode == POISSON


def test_capacity_covering_all_demand():
    """B at the reachable total: t* = inf, h = 1 on requested units only."""
    cat = Catalog(
        layer_size=np.ones((1, 2)),
        rate=np.array([[1.0, 0.0]]),
        mr_size=np.array([[1.0, 2.0]]),
    )
    pop = derive_popularity(cat)
    sol = solve_characteristic_time(pop, cat, 2.0)
    assert sol.characteristic_time == math.inf
    assert sol.hit_prob[0, 0] == 1.0
    assert sol.hit_prob[0, 1] == 0.0  # never requested, never cached
    assert sol.residual == 0.0


def test_solver_input_validation():
    cat = demo_catalog()
    pop = derive_popularity(cat)
    with pytest.raises(ConfigurationError):
        solve_characteristic_time(pop, cat, 0.0)
    with pytest.raises(ConfigurationError):
        solve_characteristic_time(pop, cat, 1.0, tol=0.0)


def test_per_unit_time_two_symmetric_objects():
    """Excluding one object leaves a single unit with p = 1/2."""
    cat = Catalog(layer_size=np.ones((2, 1)), rate=np.full((2, 1), 0.5))
    pop = derive_popularity(cat)
    t = per_unit_characteristic_time(pop, cat, 0.5, 1, 1)
    assert t == pytest.approx(2.0, abs=1e-6)  # 1 - (1/2)^(t-1) = 1/2
    t_poisson = per_unit_characteristic_time(pop, cat, 0.5, 1, 1, mode=POISSON)
    assert t_poisson == pytest.approx(2.0 * math.log(2.0), abs=1e-6)


def test_per_unit_time_excludes_upper_layers():
    cat = Catalog(layer_size=np.ones((2, 2)), rate=np.full((2, 2), 0.25))
    pop = derive_popularity(cat)
    B = 1.0

    def excluded_occupancy(t, probs):
        return sum(1.0 - (1.0 - p) ** (t - 1.0) for p in probs)

    # excluding (1, 1) also removes (1, 2): the other object remains
    t1 = per_unit_characteristic_time(pop, cat, B, 1, 1)
    expect1 = optimize.brentq(
        lambda t: excluded_occupancy(t, [0.5, 0.25]) - B, 1.0 + 1e-9, 50.0
    )
    assert t1 == pytest.approx(expect1, rel=1e-6)
    # excluding only (1, 2) keeps (1, 1) in the sum
    t2 = per_unit_characteristic_time(pop, cat, B, 1, 2)
    expect2 = optimize.brentq(
        lambda t: excluded_occupancy(t, [0.5, 0.5, 0.25]) - B, 1.0 + 1e-9, 50.0
    )
    assert t2 == pytest.approx(expect2, rel=1e-6)
    assert t2 < t1  # more competitors fill the cache sooner


def test_per_unit_time_degenerate_and_bounds():
    cat = Catalog(layer_size=np.ones((1, 1)), rate=np.ones((1, 1)))
    pop = derive_popularity(cat)
    assert per_unit_characteristic_time(pop, cat, 0.5, 1, 1) == math.inf
    with pytest.raises(IndexError):
        per_unit_characteristic_time(pop, cat, 0.5, 0, 1)
    with pytest.raises(IndexError):
        per_unit_characteristic_time(pop, cat, 0.5, 1, 2)


def test_mr_approximation_single_version_matches_layered():
    cat = Catalog(layer_size=np.array([[1.0], [2.0], [3.0]]), rate=np.array([[0.5], [0.3], [0.2]]))
    pop = derive_popularity(cat)
    lr = solve_characteristic_time(pop, cat, 2.5)
    mr = mr_approximation(pop, cat, 2.5)
    assert mr.characteristic_time == pytest.approx(lr.characteristic_time)
    assert np.allclose(mr.hit_prob, lr.hit_prob)


def test_mr_approximation_accepts_bare_sizes():
    cat = demo_catalog()
    pop = derive_popularity(cat)
    via_catalog = mr_approximation(pop, cat, 2.0)
    via_array = mr_approximation(pop, np.asarray(cat.mr_size), 2.0)
    assert via_array.characteristic_time == via_catalog.characteristic_time
    with pytest.raises(ConfigurationError):
        mr_approximation(pop, np.ones((3, 3)), 2.0)


def test_variance_bound_values():
    assert variance_bound(1, 1, 1.0) == 0.25
    assert variance_bound(10, 2, 0.5) == pytest.approx(6.25)
    with pytest.raises(ConfigurationError):
        variance_bound(0, 1, 1.0)
    with pytest.raises(ConfigurationError):
        variance_bound(1, 1, 0.0)


def test_working_set_sampler_is_unbiased():
    cat = demo_catalog()
    pop = derive_popularity(cat)
    t = 6.0
    sample = sample_working_set_variance(pop, cat, t, 5000, np.random.default_rng(17))
    assert sample.t == t
    assert sample.sizes.shape == (5000,)
    se = math.sqrt(sample.variance / 5000)
    assert abs(sample.mean - expected_working_set(pop, cat, t)) < 3 * se
    assert sample.variance <= variance_bound(2, 2, 3.0)


def test_working_set_sampler_validation():
    cat = demo_catalog()
    pop = derive_popularity(cat)
    with pytest.raises(ConfigurationError):
        sample_working_set_variance(pop, cat, 5.0, 1, np.random.default_rng(0))
    with pytest.raises(ConfigurationError):
        sample_working_set_variance(pop, cat, 0.5, 10, np.random.default_rng(0))


def test_adaptive_simpson_polynomials_and_quad_agreement():
    assert adaptive_simpson(lambda x: x * x, 0.0, 1.0) == pytest.approx(1 / 3, abs=1e-10)
    assert adaptive_simpson(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-8)
    mine = adaptive_simpson(lambda x: math.exp(-x * x), 0.0, 2.0)
    ref, _ = integrate.quad(lambda x: math.exp(-x * x), 0.0, 2.0)
    assert mine == pytest.approx(ref, abs=1e-7)


def uniform_model(V=1, profile=None):
    profile = profile or [1.0]
    return ScalingModel(
        f_prime=lambda x: 1.0,
        g=lambda v, x: profile[v - 1],
        delta=lambda x, l: 1.0 / len(profile),
        num_versions=len(profile),
        f=lambda x: x,
    )


def test_theorem1_uniform_single_version():
    """Uniform popularity, one version: h(x) = b for every x."""
    h = asymptotic_hit_theorem1(uniform_model(), 0.3)
    for x in (0.05, 0.5, 0.95):
        assert h(x, 1) == pytest.approx(0.3, abs=1e-6)
    assert h.tau_star == pytest.approx(-math.log(0.7), rel=1e-6)


def test_theorem1_two_version_profile_oracle():
    """Constant profile makes the occupancy integral elementary."""
    g2 = 0.3
    model = uniform_model(profile=[0.7, 0.3])
    b = 0.4
    tau = optimize.brentq(
        lambda t: 0.5 * (1 - math.exp(-t)) + 0.5 * (1 - math.exp(-g2 * t)) - b,
        1e-9,
        100.0,
    )
    h = asymptotic_hit_theorem1(model, b)
    assert h.tau_star == pytest.approx(tau, rel=1e-6)
    for x in (0.25, 0.8):
        assert h(x, 1) == pytest.approx(1 - math.exp(-tau), abs=1e-6)
        assert h(x, 2) == pytest.approx(1 - math.exp(-g2 * tau), abs=1e-6)


def test_theorem1_validation():
    with pytest.raises(ConfigurationError):
        ScalingModel(
            f_prime=lambda x: 1.0,
            g=lambda v, x: 0.45,
            delta=lambda x, l: 0.5,
            num_versions=2,
        )
    with pytest.raises(ConfigurationError):
        ScalingModel(
            f_prime=lambda x: 1.0,
            g=lambda v, x: 1.0,
            delta=lambda x, l: 1.0,
            num_versions=1,
            f=lambda x: 0.9 * x,
        )
    with pytest.raises(ConfigurationError):
        asymptotic_hit_theorem1(uniform_model())  # b nowhere
    with pytest.raises(ConfigurationError):
        asymptotic_hit_theorem1(uniform_model(), 1.0)  # b must stay below the mass


def flat_model2d():
    return ScalingModel2D(
        f_prime=lambda x: 1.0,
        big_g=lambda y: y,
        g_prime=lambda y: 1.0,
        delta=lambda x, y: 1.0,
        f=lambda x: x,
    )


def test_theorem2_suffix_oracle():
    """Exponent (1 - y) integrates to 1 - (1 - e^-tau)/tau."""
    b = 0.35
    tau = optimize.brentq(
        lambda t: 1.0 - (1.0 - math.exp(-t)) / t - b, 1e-9, 100.0
    )
    h = asymptotic_hit_theorem2(flat_model2d(), b)
    assert h.tau_star == pytest.approx(tau, rel=1e-5)
    for y in (0.2, 0.9):
        assert h(0.5, y) == pytest.approx(1 - math.exp(-tau * (1 - y)), abs=1e-5)


def test_theorem2_density_variant():
    """Uniform G makes the density exponent constant: h = b everywhere."""
    h = asymptotic_hit_theorem2(flat_model2d(), 0.45, variant="density")
    for x, y in ((0.1, 0.3), (0.7, 0.8)):
        assert h(x, y) == pytest.approx(0.45, abs=1e-6)
    with pytest.raises(ConfigurationError):
        asymptotic_hit_theorem2(flat_model2d(), 0.45, variant="nope")


def test_theorem2_density_quadratic_oracle():
    model = ScalingModel2D(
        f_prime=lambda x: 1.0,
        big_g=lambda y: y * y,
        g_prime=lambda y: 2.0 * y,
        delta=lambda x, y: 1.0,
        f=lambda x: x,
    )
    b = 0.3
    tau = optimize.brentq(
        lambda t: 1.0 - (1.0 - math.exp(-2.0 * t)) / (2.0 * t) - b, 1e-9, 100.0
    )
    h = asymptotic_hit_theorem2(model, b, variant="density")
    assert h.tau_star == pytest.approx(tau, rel=1e-5)
    assert h(0.4, 0.5) == pytest.approx(1 - math.exp(-2.0 * tau * 0.5), abs=1e-5)


def test_scaling_model_2d_endpoint_validation():
    with pytest.raises(ConfigurationError):
        ScalingModel2D(
            f_prime=lambda x: 1.0,
            big_g=lambda y: 0.5 * y,
            g_prime=lambda y: 0.5,
            delta=lambda x, y: 1.0,
            f=lambda x: x,
        )


def test_finite_catalog_from_scaling_1d():
    model = ScalingModel(
        f_prime=lambda x: 2.0 * x,
        g=lambda v, x: 1.0,
        delta=lambda x, l: 1.0,
        num_versions=1,
        f=lambda x: x * x,
    )
    cat = finite_catalog_from_scaling(model, 4)
    assert np.allclose(cat.rate[:, 0], [1 / 16, 3 / 16, 5 / 16, 7 / 16])
    assert np.all(cat.layer_size == 1.0)
    with pytest.raises(ConfigurationError):
        finite_catalog_from_scaling(model, 4, num_versions=3)


def test_finite_catalog_from_scaling_2d():
    cat = finite_catalog_from_scaling(flat_model2d(), 3, num_versions=2)
    assert cat.rate.shape == (3, 2)
    assert np.allclose(cat.rate.sum(), 1.0)
    assert np.allclose(cat.rate[:, 0], cat.rate[:, 1])  # uniform G increments
    with pytest.raises(ConfigurationError):
        finite_catalog_from_scaling(flat_model2d(), 3)  # version count required


def test_finite_catalog_needs_f():
    model = ScalingModel(
        f_prime=lambda x: 1.0,
        g=lambda v, x: 1.0,
        delta=lambda x, l: 1.0,
        num_versions=1,
    )
    with pytest.raises(ConfigurationError):
        finite_catalog_from_scaling(model, 5)


def test_solution_csv_export(tmp_path):
    cat = demo_catalog()
    pop = derive_popularity(cat)
    sol = solve_characteristic_time(pop, cat, 2.0)
    path = tmp_path / "solution.csv"
    sol.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# B=2 mode=discrete-bernoulli t_star=")
    assert "residual=" in lines[0]
    assert lines[1] == "d,l,p,delta,hit_prob"
    assert len(lines) == 2 + 4
    d, l, p, delta, h = lines[2].split(",")
    assert (d, l) == ("1", "1")
    assert float(p) == pytest.approx(0.75)
    assert float(delta) == 1.0
    assert float(h) == pytest.approx(sol.hit_prob[0, 0])


def test_solution_hit_rate_weighting():
    cat = demo_catalog()
    pop = derive_popularity(cat)
    sol = solve_characteristic_time(pop, cat, 2.0)
    # request-weighted: version v needs layers 1..v, so use the version's
    # own probability against its top layer probability estimate
    manual = float((pop.version_prob * sol.hit_prob).sum())
    assert sol.hit_rate(pop) == pytest.approx(manual)
