"""Confidence intervals for critical points in piecewise-linear field ensembles.

The pipeline: classify each ensemble member's vertices as minimum,
maximum, saddle, or regular on the triangulated grid (`critical`),
count occurrences per vertex, turn counts into Jeffreys interval
estimates (`stats`), and render the per-vertex summaries as sunburst
glyph maps (`render`).  `synth` fits a Gaussian model to a seed
ensemble and draws synthetic ensembles for validation; `cli` wires it
all into the `cpci` command.
"""

from .critical import (
    CriticalType,
    TYPE_CODES,
    TypeCounts,
    classify_field,
    classify_vertex,
    compare_vertices,
    count_types,
)
from .grid import (
    Ensemble,
    GridTopology,
    ParseError,
    VertexLink,
    build_link,
    load_ensemble,
    save_ensemble,
)
from .render import (
    GlyphGeometry,
    GlyphStyle,
    SECTORS,
    SectorGeometry,
    glyph_geometry,
    glyph_radius,
    render_glyph,
    render_map,
)
from .stats import (
    ConfidenceLevel,
    CoverageReport,
    DEFAULT_LEVEL,
    IntervalEstimate,
    ProbabilitySummary,
    beta_quantile,
    coverage_experiment,
    jeffreys_interval,
    point_estimate,
    regularized_incomplete_beta,
    summarize,
)
from .synth import (
    MomentModel,
    estimate_moments,
    ground_truth_probabilities,
    load_moment_model,
    sample_ensemble,
    save_moment_model,
)

__version__ = "0.1.0"

__all__ = [
    "CriticalType",
    "TYPE_CODES",
    "TypeCounts",
    "classify_field",
    "classify_vertex",
    "compare_vertices",
    "count_types",
    "Ensemble",
    "GridTopology",
    "ParseError",
    "VertexLink",
    "build_link",
    "load_ensemble",
    "save_ensemble",
    "GlyphGeometry",
    "GlyphStyle",
    "SECTORS",
    "SectorGeometry",
    "glyph_geometry",
    "glyph_radius",
    "render_glyph",
    "render_map",
    "ConfidenceLevel",
    "CoverageReport",
    "DEFAULT_LEVEL",
    "IntervalEstimate",
    "ProbabilitySummary",
    "beta_quantile",
    "coverage_experiment",
    "jeffreys_interval",
    "point_estimate",
    "regularized_incomplete_beta",
    "summarize",
    "MomentModel",
    "estimate_moments",
    "ground_truth_probabilities",
    "load_moment_model",
    "sample_ensemble",
    "save_moment_model",
    "__version__",
]
