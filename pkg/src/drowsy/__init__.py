"""Streaming driver-drowsiness inference from facial-landmark streams.

Converts timestamped 2-D landmark frames into calibrated fatigue metrics
(eye/mouth aspect ratios, PERCLOS, head-drop ratio) and debounced alert
events, with personalized per-driver thresholds, a synthetic-session
generator, and an evaluation harness comparing generalized thresholds,
personalized thresholds, and external classifier streams.
"""

from .calibration import (
    CalibrationConfig,
    CalibrationProfile,
    calibrate,
    generalized_profile,
)
from .errors import (
    CalibrationError,
    ConfigError,
    DrowsyError,
    EvalError,
    GeometryError,
    MissingLabelError,
    NoDataError,
    ParseError,
    PerclosUndefinedError,
    SchemeMapError,
    ScriptError,
    StreamOrderError,
    VersionError,
)
from .landmarks import (
    DLIB68,
    DLIB68_MAP,
    MESH468,
    MESH468_MAP,
    SEMANTIC,
    SEMANTIC_MAP,
    LandmarkFrame,
    SchemeMap,
    SemanticPoints,
    builtin_scheme_map,
    frame_from_semantic,
    to_semantic,
)
from .metrics import (
    MetricSample,
    PerclosWindow,
    compute_binocular_ear,
    compute_ear,
    compute_head_drop,
    compute_mar,
    metric_sample,
    perclos,
    samples_from_frames,
)
from .pipeline import (
    AlertEvent,
    ClassifierSource,
    FrameRecord,
    Pipeline,
    PipelineConfig,
    SessionResult,
    SessionSummary,
    SmoothingBuffer,
    run_session,
)
from .synth import (
    DriverParams,
    FrameLabel,
    GroundTruth,
    ScriptEvent,
    SessionScript,
    generate,
    generate_population,
    iter_frames,
    iter_session,
)

__version__ = "0.1.0"

__all__ = [
    "AlertEvent",
    "CalibrationConfig",
    "CalibrationError",
    "CalibrationProfile",
    "ClassifierSource",
    "ConfigError",
    "DLIB68",
    "DLIB68_MAP",
    "DriverParams",
    "DrowsyError",
    "EvalError",
    "FrameLabel",
    "FrameRecord",
    "GeometryError",
    "GroundTruth",
    "LandmarkFrame",
    "MESH468",
    "MESH468_MAP",
    "MetricSample",
    "MissingLabelError",
    "NoDataError",
    "ParseError",
    "PerclosUndefinedError",
    "PerclosWindow",
    "Pipeline",
    "PipelineConfig",
    "SchemeMap",
    "SchemeMapError",
    "ScriptError",
    "ScriptEvent",
    "SEMANTIC",
    "SEMANTIC_MAP",
    "SemanticPoints",
    "SessionResult",
    "SessionScript",
    "SessionSummary",
    "SmoothingBuffer",
    "StreamOrderError",
    "VersionError",
    "builtin_scheme_map",
    "calibrate",
    "compute_binocular_ear",
    "compute_ear",
    "compute_head_drop",
    "compute_mar",
    "frame_from_semantic",
    "generate",
    "generate_population",
    "generalized_profile",
    "iter_frames",
    "iter_session",
    "metric_sample",
    "perclos",
    "run_session",
    "samples_from_frames",
    "to_semantic",
]
