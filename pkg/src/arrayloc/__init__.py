"""Fundamental accuracy limits and geometric quality measures for far-field
array localization.

The library computes closed-form equivalent Fisher information matrices and
squared position error bounds for static and moving agents carrying rigid
antenna arrays, grades anchor constellations and array shapes (aperture
function, geometric factors, GDOP), and validates every closed form against
an independent numerical Fisher-information oracle built from the
discretized waveform model.
"""
from .model import (
    SPEED_OF_LIGHT,
    AgentMotion,
    AnchorNode,
    AntennaArray,
    ArrayPose,
    DegenerateGeometryError,
    Diagnostic,
    KnowledgeFlags,
    PathComponent,
    Position2D,
    Scenario,
    anchor_range_bearing,
    antenna_position,
    antenna_position_dynamic,
    antenna_positions,
    validate_scenario,
)
from .signal import (
    ComplexSampleSeries,
    SignalSummary,
    balanced_phase_residual,
    bcc,
    effective_bandwidth,
    first_path_snr,
    read_signal_file,
    recentre,
    snr_from_db,
    summarize,
    trms,
    write_signal_file,
)
from .arrays import (
    ArrayClass,
    ArraySpec,
    average_saaf,
    classify_uoa,
    diameter,
    is_uoa,
    minimum_enclosing_circle,
    saaf,
    saaf_uca,
    saaf_ula,
    uca,
    ula,
)
from .efim import (
    EfimResult,
    IntensityProfile,
    SingularNuisanceError,
    SpebValue,
    efim_dynamic_all_unknown,
    efim_dynamic_known,
    efim_dynamic_orient_dir_unknown,
    efim_position,
    efim_static_full,
    efim_static_orient_known,
    efim_static_orient_unknown,
    intensity,
    intensity_profile,
    position_speb,
    rdm,
    schur_complement,
    speb,
    speb_uoa_closed,
    visual_angle,
)
from .oracle import (
    FimResult,
    ParameterVector,
    TimeGrid,
    effective_poc,
    mean_waveform,
    numerical_fim,
    oracle_efim,
    real_passband_fim,
)
from .geometry import (
    AnchorPlacement,
    GdopModel,
    GeometricFactors,
    OrientationSweep,
    RANK_TABLE_CELLS,
    anchor_optimality_residual,
    efim_rank_requirements,
    gdop,
    geometric_factors,
    gf1,
    gf2,
    optimize_anchor_angles,
    orientation_avg_speb,
    trace_inverse_monotone_check,
)
from .config import ConfigError, ExperimentConfig, load_scenario
from .experiments import ResultTable, emit_csv

__version__ = "0.1.0"
