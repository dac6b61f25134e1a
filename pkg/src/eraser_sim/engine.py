"""Two-electron state of the interferometer/detector pair.

Basis ordering is shared by every module: index ``2*m + d`` with MZI path
``m`` in (alpha, beta) and detector path ``d`` in (gamma, delta), i.e.
``(alpha gamma, alpha delta, beta gamma, beta delta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .unitary import (
    IDENTITY,
    UNITARITY_TOL,
    Unitary2,
    build_beam_splitter,
    check_unitary,
    loop_phase,
    with_arm_phase,
    with_reflectance,
    wrap_phase,
)

# h/e in SI units (Wb)
FLUX_QUANTUM = 4.135667696e-15

MZI_LEADS = ("alpha", "beta")
DET_LEADS = ("gamma", "delta")
MZI_INPUTS = ("alpha_bar", "beta_bar")
DET_INPUTS = ("gamma_bar", "delta_bar")
BASIS = tuple(f"{m}_{d}" for m in MZI_LEADS for d in DET_LEADS)


@dataclass(frozen=True)
class FieldGeometry:
    H: float
    delta_area: float
    flux_quantum: float = FLUX_QUANTUM

    def __post_init__(self):
        if not (math.isfinite(self.H) and self.H >= 0):
            raise ValueError(f"H must be finite and >= 0, got {self.H!r}")
        if not (math.isfinite(self.delta_area) and self.delta_area >= 0):
            raise ValueError(f"delta_area must be finite and >= 0, got {self.delta_area!r}")
        if not (math.isfinite(self.flux_quantum) and self.flux_quantum > 0):
            raise ValueError("flux_quantum must be positive")


def delta_phi_from_geometry(g: FieldGeometry) -> float:
    """Interaction phase ``2 pi H dA / Phi0``; not range-reduced."""
    return 2.0 * math.pi * (g.H * g.delta_area / g.flux_quantum)


@dataclass(frozen=True)
class EraserSetup:
    """Full device: MZI splitters S1, S2; detector splitters S3, S4.

    ``S4 = identity`` is the single-splitter detector; anything else turns the
    detector into a second interferometer.
    """

    S1: Unitary2
    S2: Unitary2
    S3: Unitary2
    S4: Unitary2 = IDENTITY
    delta_phi: float = 0.0
    input_mzi: str = "alpha_bar"
    input_det: str = "gamma_bar"

    def __post_init__(self):
        for name in ("S1", "S2", "S3", "S4"):
            if not check_unitary(getattr(self, name), UNITARITY_TOL):
                raise ValueError(f"{name} is not unitary within {UNITARITY_TOL}")
        if not math.isfinite(self.delta_phi):
            raise ValueError("delta_phi must be finite")
        if self.input_mzi not in MZI_INPUTS:
            raise ValueError(f"input_mzi must be one of {MZI_INPUTS}, got {self.input_mzi!r}")
        if self.input_det not in DET_INPUTS:
            raise ValueError(f"input_det must be one of {DET_INPUTS}, got {self.input_det!r}")

    @classmethod
    def from_specs(cls, s1, s2, s3, s4=None, delta_phi=0.0, **kw) -> "EraserSetup":
        mats = [build_beam_splitter(s) for s in (s1, s2, s3)]
        S4 = IDENTITY if s4 is None else build_beam_splitter(s4)
        return cls(*mats, S4, delta_phi=delta_phi, **kw)

    @property
    def is_setup1(self) -> bool:
        return self.S4 == IDENTITY

    @property
    def phi(self) -> float:
        return loop_phase(self.S1, self.S2)

    @property
    def phi_d(self) -> float:
        return loop_phase(self.S3, self.S4)

    def with_phi(self, phi: float) -> "EraserSetup":
        """Retune the MZI loop phase by dressing the lower arm of S1."""
        return replace(self, S1=with_arm_phase(self.S1, wrap_phase(phi - self.phi)))

    def with_phi_d(self, phi_d: float) -> "EraserSetup":
        """Retune the detector loop phase by dressing the lower arm of S3."""
        return replace(self, S3=with_arm_phase(self.S3, wrap_phase(phi_d - self.phi_d)))

    def with_reflectance(self, which: int, R: float) -> "EraserSetup":
        name = f"S{which}"
        return replace(self, **{name: with_reflectance(getattr(self, name), R)})


@dataclass(frozen=True, eq=False)
class TwoParticleState:
    amp: np.ndarray = field()

    def __post_init__(self):
        a = np.array(self.amp, dtype=np.complex128).reshape(4)
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "amp", a)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amp) ** 2))

    def as_matrix(self) -> np.ndarray:
        """Amplitudes as a 2x2 array indexed ``[mzi, detector]``."""
        return self.amp.reshape(2, 2)

    def __eq__(self, other):
        if not isinstance(other, TwoParticleState):
            return NotImplemented
        return bool(np.array_equal(self.amp, other.amp))

    __hash__ = None


@dataclass(frozen=True)
class DetectorOverlap:
    nu: complex

    @property
    def magnitude(self) -> float:
        return abs(self.nu)

    @property
    def phase(self) -> float:
        return wrap_phase(float(np.angle(self.nu)))


def initial_state(setup: EraserSetup) -> TwoParticleState:
    mzi = setup.S1.column(MZI_INPUTS.index(setup.input_mzi))
    det = setup.S3.column(DET_INPUTS.index(setup.input_det))
    return TwoParticleState(np.outer(mzi, det).reshape(4))


def apply_interaction(state: TwoParticleState, delta_phi: float) -> TwoParticleState:
    """Controlled phase on the doubly transmitted (beta, delta) component."""
    a = state.amp.copy()
    a[3] *= np.exp(1j * delta_phi)
    return TwoParticleState(a)


def apply_output_stage(state: TwoParticleState, S2: Unitary2, S4: Unitary2) -> TwoParticleState:
    out = S2.matrix @ state.as_matrix() @ S4.matrix.T
    return TwoParticleState(out.reshape(4))


def evolve(setup: EraserSetup) -> TwoParticleState:
    psi = initial_state(setup)
    psi = apply_interaction(psi, setup.delta_phi)
    return apply_output_stage(psi, setup.S2, setup.S4)


def detector_overlap_nu(S3: Unitary2, delta_phi: float, input_det: str = "gamma_bar") -> DetectorOverlap:
    """Overlap <chi_t|chi_r> of the two conditional detector states.

    For the gamma-bar input this is ``R3 + T3 exp(-i delta_phi)``.
    """
    col = S3.column(DET_INPUTS.index(input_det))
    weights = np.abs(col) ** 2
    return DetectorOverlap(complex(weights[0] + weights[1] * np.exp(-1j * delta_phi)))


@dataclass(frozen=True)
class UVCoefficients:
    """Detector amplitudes conditioned on the upper (u) / lower (v) MZI path."""

    u_gamma: complex
    v_gamma: complex
    u_delta: complex
    v_delta: complex

    def for_lead(self, lead: str) -> tuple[complex, complex]:
        if lead == "gamma":
            return self.u_gamma, self.v_gamma
        if lead == "delta":
            return self.u_delta, self.v_delta
        raise ValueError(f"unknown detector lead {lead!r}")


def uv_coefficients(S3: Unitary2, S4: Unitary2, delta_phi: float, input_det: str = "gamma_bar") -> UVCoefficients:
    """``u_B = S4[B,0] r3 + S4[B,1] t3`` and the same with ``t3 -> t3 exp(i delta_phi)``.

    For the gamma lead: ``u = r3 r4 + t3 t4'``, ``v = r3 r4 + t3 t4' e^{i delta_phi}``.
    """
    a, b = S3.column(DET_INPUTS.index(input_det))
    s4 = S4.matrix
    e = np.exp(1j * delta_phi)
    u = s4 @ np.array([a, b])
    v = s4 @ np.array([a, b * e])
    return UVCoefficients(complex(u[0]), complex(v[0]), complex(u[1]), complex(v[1]))


def mzi_path_amplitudes(setup: EraserSetup, lead: str) -> tuple[complex, complex]:
    """Amplitudes (upper path, lower path) for the MZI electron to reach ``lead``.

    For lead alpha with the alpha-bar input these are ``r1 r2`` and ``t1 t2'``.
    """
    upper, lower = setup.S1.column(MZI_INPUTS.index(setup.input_mzi))
    row = MZI_LEADS.index(lead)
    return complex(setup.S2.matrix[row, 0] * upper), complex(setup.S2.matrix[row, 1] * lower)
