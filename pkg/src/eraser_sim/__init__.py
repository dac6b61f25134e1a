"""Simulation of an electronic Mach-Zehnder quantum eraser."""

from .engine import (
    FLUX_QUANTUM,
    EraserSetup,
    FieldGeometry,
    TwoParticleState,
    apply_interaction,
    apply_output_stage,
    delta_phi_from_geometry,
    detector_overlap_nu,
    evolve,
    initial_state,
    uv_coefficients,
)
from .observables import (
    BiasConfig,
    DualityReport,
    closed_form_p_alpha,
    cross_correlation,
    current,
    distinguishability,
    duality_check,
    joint_probabilities,
    single_probabilities,
    visibility,
)
from .stochastic import (
    CoincidenceCounts,
    DephasingModel,
    SweepSpec,
    dephased_duality,
    estimate_cross_correlation,
    estimate_probabilities,
    fit_fringe,
    measure_distinguishability_protocol,
    sample_shots,
    sweep,
)
from .unitary import BeamSplitterSpec, Unitary2, build_beam_splitter, check_unitary, loop_phase

__version__ = "0.1.0"

__all__ = [
    "BeamSplitterSpec",
    "BiasConfig",
    "CoincidenceCounts",
    "DephasingModel",
    "DualityReport",
    "EraserSetup",
    "FLUX_QUANTUM",
    "FieldGeometry",
    "SweepSpec",
    "TwoParticleState",
    "Unitary2",
    "apply_interaction",
    "apply_output_stage",
    "build_beam_splitter",
    "check_unitary",
    "closed_form_p_alpha",
    "cross_correlation",
    "current",
    "delta_phi_from_geometry",
    "dephased_duality",
    "detector_overlap_nu",
    "distinguishability",
    "duality_check",
    "estimate_cross_correlation",
    "estimate_probabilities",
    "evolve",
    "fit_fringe",
    "initial_state",
    "joint_probabilities",
    "loop_phase",
    "measure_distinguishability_protocol",
    "sample_shots",
    "single_probabilities",
    "sweep",
    "uv_coefficients",
    "visibility",
]
