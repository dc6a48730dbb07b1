"""Caching of layered and multi-representation data objects.

A small numpy-based toolkit for studying caches that hold data objects
stored either as cumulative layers (version v = layers 1..v) or as
independent per-version blobs.  It provides:

* a catalog data model (per-layer sizes, per-version sizes and request
  rates, derived popularities),
* IRM workload generators (Zipf object popularity, version splits,
  layer-size profiles, trace sampling),
* layered caching policies (LLRU, LLFU, LBelady, MRLRU, greedy hybrids,
  and an exact static-optimal placement),
* the working-set (characteristic-time) approximation for LLRU with its
  continuum-limit evaluators and a working-set variance bound,
* a trace-driven simulator with CSV reporting, and
* experiment presets that regenerate the datasets behind each study.
"""

from layercache.catalog import (
    Catalog,
    ConfigurationError,
    DerivedPopularity,
    OverheadModel,
    apply_overhead,
    derive_popularity,
    lr_version_size,
)
from layercache.workload import (
    Trace,
    parametric_layer_sizes,
    parametric_version_popularity,
    random_layer_sizes,
    sample_trace,
    split_versions_three,
    split_versions_two,
    split_versions_uniform_decreasing,
    zipf_object_popularity,
)
from layercache.policies import (
    HlfuPlacement,
    LBeladyCache,
    LlfuCache,
    LlruCache,
    HlruCache,
    MrLruCache,
    NextAccessIndex,
    POLICY_NAMES,
    Placement,
    check_hybrid_feasibility,
    hlfu_static_placement,
    lbelady_run,
    make_policy,
    static_optimal,
)
from layercache.analysis import (
    ApproxSolution,
    ScalingModel,
    ScalingModel2D,
    WorkingSetSample,
    asymptotic_hit_theorem1,
    asymptotic_hit_theorem2,
    expected_working_set,
    finite_catalog_from_scaling,
    mr_approximation,
    per_unit_characteristic_time,
    sample_working_set_variance,
    solve_characteristic_time,
    variance_bound,
)
from layercache.sim import (
    CSV_COLUMNS,
    ReplicationSummary,
    SimReport,
    approx_to_rows,
    replicate,
    run_simulation,
    sweep,
    write_csv,
)

__version__ = "0.1.0"

from layercache.cli import (  # noqa: E402  (needs __version__ above)
    ExperimentConfig,
    PRESET_NAMES,
    figure_preset,
    run_config,
)
