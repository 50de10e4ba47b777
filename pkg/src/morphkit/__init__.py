"""Face-morph generation and recognition-vulnerability evaluation toolkit.

Two halves, joined by file formats: a generation side that builds
landmark-warp or latent-interpolation morphs from pair protocols, and
an evaluation side that scores scenario manifests against embedding
CSVs and reports MMPMR/FMR/FNMR at a solved threshold.
"""

__version__ = "0.1.0"

from .adapters import LineJsonAdapter
from .errors import AdapterError, FormatError, GeometryError, MorphkitError
from .landmarks import (
    AlignmentTemplate,
    LandmarkSet,
    align_to_template,
    augment_border_points,
    detect_landmarks_external,
    format_points_text,
    load_points_file,
    parse_points_text,
    weighted_mean_landmarks,
)
from .latent import LatentVector, lerp_latent, project, synthesize, synthesize_many
from .metrics import (
    DirectionMetrics,
    ReportCell,
    VulnerabilityReport,
    evaluate,
    fmr,
    fnmr,
    load_report_csv,
    merge_reports,
    mmpmr,
    render_report,
    render_report_csv,
    threshold_at_fmr,
)
from .morph import (
    MorphConfig,
    MorphResult,
    affine_from_triangles,
    generate_set,
    morph_output_name,
    morph_pair,
    warp_piecewise,
    write_manifest,
)
from .protocols import (
    GENUINE,
    MORPH_ATTACK,
    MORPHS_AS_PROBES,
    MORPHS_AS_REFERENCES,
    ZERO_EFFORT,
    PairProtocol,
    Probe,
    ReferenceModel,
    ScenarioManifest,
    Trial,
    enumerate_trials,
    load_pair_protocol,
    load_scenario_manifest,
)
from .raster import Raster, blend, load_image, sample_bilinear, save_image
from .scoring import (
    EmbeddingRecord,
    MorphGroup,
    ScoreSet,
    cosine_score,
    extract_embeddings_external,
    parse_embeddings,
    reference_model,
    score_trials,
    write_score_dump,
)
from .triangulation import OUTSIDE_HULL, TriangleMesh, barycentric, delaunay, locate
from .util import alpha_weights, canonical_json, config_hash, round_half_away, sha256_file

__all__ = [
    "AdapterError", "AlignmentTemplate", "DirectionMetrics", "EmbeddingRecord",
    "FormatError", "GENUINE", "GeometryError", "LandmarkSet", "LatentVector",
    "LineJsonAdapter", "MORPHS_AS_PROBES", "MORPHS_AS_REFERENCES", "MORPH_ATTACK",
    "MorphConfig", "MorphGroup", "MorphResult", "MorphkitError", "OUTSIDE_HULL",
    "PairProtocol", "Probe", "Raster", "ReferenceModel", "ReportCell",
    "ScenarioManifest", "ScoreSet", "TriangleMesh", "Trial", "VulnerabilityReport",
    "ZERO_EFFORT", "affine_from_triangles", "align_to_template", "alpha_weights",
    "augment_border_points", "barycentric", "blend", "canonical_json",
    "config_hash", "cosine_score", "delaunay", "detect_landmarks_external",
    "enumerate_trials", "evaluate", "extract_embeddings_external", "fmr", "fnmr",
    "format_points_text", "generate_set", "lerp_latent", "load_image",
    "load_pair_protocol", "load_points_file", "load_report_csv",
    "load_scenario_manifest", "locate", "merge_reports", "mmpmr", "morph_output_name",
    "morph_pair", "parse_embeddings", "parse_points_text", "project",
    "reference_model", "render_report", "render_report_csv", "round_half_away",
    "sample_bilinear", "save_image", "score_trials", "sha256_file", "synthesize",
    "synthesize_many", "threshold_at_fmr", "warp_piecewise",
    "weighted_mean_landmarks", "write_manifest", "write_score_dump",
]
