"""Probabilities, currents, cross-correlations and the V/D duality pair."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .engine import (
    BASIS,
    DET_LEADS,
    MZI_LEADS,
    EraserSetup,
    TwoParticleState,
    detector_overlap_nu,
    mzi_path_amplitudes,
    uv_coefficients,
)

E_CHARGE = 1.602176634e-19  # C
PLANCK = 6.62607015e-34  # J s
E2_OVER_H = E_CHARGE**2 / PLANCK  # S

DEFAULT_LEADS = ("alpha", "gamma")


class DegenerateVisibilityError(ValueError):
    """Visibility or distinguishability requested where both path weights vanish."""


@dataclass(frozen=True)
class SingleProbabilities:
    p_alpha: float
    p_beta: float
    p_gamma: float
    p_delta: float

    def __getitem__(self, lead: str) -> float:
        return getattr(self, f"p_{lead}")


@dataclass(frozen=True)
class JointProbabilities:
    p_alpha_gamma: float
    p_alpha_delta: float
    p_beta_gamma: float
    p_beta_delta: float

    def __getitem__(self, pair) -> float:
        a, b = pair
        return getattr(self, f"p_{a}_{b}")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f"p_{k}") for k in BASIS])

    @classmethod
    def from_array(cls, p) -> "JointProbabilities":
        return cls(*(float(x) for x in p))

    def marginals(self) -> SingleProbabilities:
        m = self.as_array().reshape(2, 2)
        return SingleProbabilities(*m.sum(axis=1), *m.sum(axis=0))


@dataclass(frozen=True)
class BiasConfig:
    voltage: float = 1.0
    e_sq_over_h: float = E2_OVER_H
    dimensionless_mode: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.voltage) and self.voltage >= 0):
            raise ValueError(f"voltage must be finite and >= 0, got {self.voltage!r}")


@dataclass(frozen=True)
class DualityReport:
    visibility: float
    distinguishability: float
    source: str = "analytic"
    leads: tuple = DEFAULT_LEADS

    @property
    def sum_of_squares(self) -> float:
        return self.visibility**2 + self.distinguishability**2


def single_probabilities(state: TwoParticleState) -> SingleProbabilities:
    return joint_probabilities(state).marginals()


def joint_probabilities(state: TwoParticleState) -> JointProbabilities:
    return JointProbabilities.from_array(np.abs(state.amp) ** 2)


def closed_form_p_alpha(setup: EraserSetup) -> float:
    """Single-lead fringe from the detector overlap.

    ``P_alpha = R1 R2 + T1 T2 + 2 |nu| sqrt(R1 T1 R2 T2) cos(phi - phi_nu)``,
    written with the two path amplitudes so it also covers the beta-bar input
    and fully reflecting/transmitting splitters. The output detector splitter
    does not enter.
    """
    a, b = mzi_path_amplitudes(setup, "alpha")
    nu = detector_overlap_nu(setup.S3, setup.delta_phi, setup.input_det)
    offset = np.angle(b) - np.angle(a) - nu.phase
    return abs(a) ** 2 + abs(b) ** 2 + 2 * abs(a) * abs(b) * nu.magnitude * math.cos(offset)


def closed_form_joint(setup: EraserSetup, pair) -> float:
    """``|a_A u_B + b_A v_B|^2`` with MZI path amplitudes a, b and detector u, v."""
    A, B = pair
    a, b = mzi_path_amplitudes(setup, A)
    u, v = uv_coefficients(setup.S3, setup.S4, setup.delta_phi, setup.input_det).for_lead(B)
    return abs(a * u + b * v) ** 2


def current(p: float, bias: BiasConfig) -> float:
    if bias.dimensionless_mode:
        return float(p)
    return bias.e_sq_over_h * p * bias.voltage


def cross_correlation(pA: float, pB: float, pAB: float, bias: BiasConfig) -> float:
    """Zero-temperature, zero-frequency cross-correlator ``(2e^2/h) eV (P_AB - P_A P_B)``."""
    excess = pAB - pA * pB
    if bias.dimensionless_mode:
        return excess
    return 2.0 * bias.e_sq_over_h * E_CHARGE * bias.voltage * excess


def cross_correlations(state: TwoParticleState, bias: BiasConfig) -> dict:
    joint = joint_probabilities(state)
    single = joint.marginals()
    return {
        (A, B): cross_correlation(single[A], single[B], joint[A, B], bias)
        for A in MZI_LEADS
        for B in DET_LEADS
    }


def path_weights(setup: EraserSetup, pair=DEFAULT_LEADS) -> tuple[float, float, float, float]:
    """Return ``(|a|, |b|, |u|, |v|)`` for the two indistinguishable joint paths."""
    A, B = pair
    if A not in MZI_LEADS or B not in DET_LEADS:
        raise ValueError(f"lead pair must be (alpha|beta, gamma|delta), got {pair!r}")
    a, b = mzi_path_amplitudes(setup, A)
    u, v = uv_coefficients(setup.S3, setup.S4, setup.delta_phi, setup.input_det).for_lead(B)
    return abs(a), abs(b), abs(u), abs(v)


def _vd_from_weights(upper: float, lower: float, cross: float) -> tuple[float, float]:
    """``upper = |a u|^2``, ``lower = |b v|^2``, ``cross = |a u||b v|`` (or its dephased analogue)."""
    den = upper + lower
    if not den > 0:
        raise DegenerateVisibilityError("both path weights vanish; visibility is undefined")
    return 2.0 * cross / den, abs(upper - lower) / den


def visibility(setup: EraserSetup, leads=DEFAULT_LEADS) -> float:
    a, b, u, v = path_weights(setup, leads)
    return _vd_from_weights((a * u) ** 2, (b * v) ** 2, a * u * b * v)[0]


def distinguishability(setup: EraserSetup, leads=DEFAULT_LEADS) -> float:
    a, b, u, v = path_weights(setup, leads)
    return _vd_from_weights((a * u) ** 2, (b * v) ** 2, a * u * b * v)[1]


def duality_check(setup: EraserSetup, leads=DEFAULT_LEADS) -> DualityReport:
    a, b, u, v = path_weights(setup, leads)
    V, D = _vd_from_weights((a * u) ** 2, (b * v) ** 2, a * u * b * v)
    return DualityReport(V, D, "analytic", tuple(leads))


def try_duality(setup: EraserSetup, leads=DEFAULT_LEADS) -> Optional[DualityReport]:
    try:
        return duality_check(setup, leads)
    except DegenerateVisibilityError:
        return None
