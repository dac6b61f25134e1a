"""2x2 unitary scattering matrices for electronic beam splitters.

A splitter maps incoming lead operators onto outgoing ones through

    S = [[r,  t'],
         [t,  r']]

Only ``r`` and ``t`` are physically pinned by a reflectance and two phases;
the primed entries are completed with the canonical form

    S = exp(i g) * [[cos(theta) exp(i pr), -sin(theta) exp(-i pt)],
                    [sin(theta) exp(i pt),  cos(theta) exp(-i pr)]]

with ``cos(theta) = sqrt(R)``, which is unitary by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

UNITARITY_TOL = 1e-12


class DegenerateSplitterError(ValueError):
    """A loop phase was requested from a splitter with a vanishing entry."""


def wrap_phase(x: float) -> float:
    """Reduce an angle to the half-open interval (-pi, pi]."""
    y = math.remainder(x, 2.0 * math.pi)
    if y <= -math.pi:
        y += 2.0 * math.pi
    return y


@dataclass(frozen=True)
class BeamSplitterSpec:
    """Reflectance and phases of one beam splitter (angles in radians)."""

    R: float
    phase_r: float = 0.0
    phase_t: float = 0.0
    phase_global: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.R) or not 0.0 <= self.R <= 1.0:
            raise ValueError(f"reflectance R must lie in [0, 1], got {self.R!r}")
        for name in ("phase_r", "phase_t", "phase_global"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)!r}")

    @property
    def T(self) -> float:
        return 1.0 - self.R


@dataclass(frozen=True, eq=False)
class Unitary2:
    """Immutable 2x2 complex scattering matrix ``[[r, t'], [t, r']]``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix entries must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def r(self) -> complex:
        return complex(self.matrix[0, 0])

    @property
    def t_prime(self) -> complex:
        return complex(self.matrix[0, 1])

    @property
    def t(self) -> complex:
        return complex(self.matrix[1, 0])

    @property
    def r_prime(self) -> complex:
        return complex(self.matrix[1, 1])

    @property
    def R(self) -> float:
        return abs(self.r) ** 2

    @property
    def T(self) -> float:
        return abs(self.t) ** 2

    def column(self, k: int) -> np.ndarray:
        return self.matrix[:, k].copy()

    def __eq__(self, other):
        if not isinstance(other, Unitary2):
            return NotImplemented
        return bool(np.array_equal(self.matrix, other.matrix))

    def __hash__(self):
        return hash(self.matrix.tobytes())

    def __repr__(self):
        return f"Unitary2(r={self.r:.6g}, t'={self.t_prime:.6g}, t={self.t:.6g}, r'={self.r_prime:.6g})"


IDENTITY = Unitary2(np.eye(2))


def build_beam_splitter(spec: BeamSplitterSpec) -> Unitary2:
    c = math.sqrt(spec.R)
    s = math.sqrt(spec.T)
    er = np.exp(1j * spec.phase_r)
    et = np.exp(1j * spec.phase_t)
    m = np.exp(1j * spec.phase_global) * np.array(
        [[c * er, -s * np.conj(et)], [s * et, c * np.conj(er)]]
    )
    return Unitary2(m)


def symmetric_splitter(**phases: float) -> Unitary2:
    """Shortcut for a 50/50 splitter with optional phases."""
    return build_beam_splitter(BeamSplitterSpec(0.5, **phases))


def decompose(U: Unitary2) -> BeamSplitterSpec:
    """Recover canonical-form parameters of ``U``.

    The global phase is only defined modulo pi; the branch picked here is
    compensated in the other phases so that rebuilding reproduces ``U``.
    Phases of vanishing entries are reported as zero.
    """
    m = U.matrix
    g = 0.5 * np.angle(np.linalg.det(m))
    core = m * np.exp(-1j * g)
    r_sq, t_sq = abs(core[0, 0]) ** 2, abs(core[1, 0]) ** 2
    # take the smaller weight directly so sqrt(T) keeps precision near R = 1
    R = r_sq / (r_sq + t_sq) if r_sq <= t_sq else 1.0 - t_sq / (r_sq + t_sq)
    R = min(max(R, 0.0), 1.0)
    if abs(core[0, 0]) > 0:
        pr = float(np.angle(core[0, 0]))
    elif abs(core[1, 1]) > 0:
        pr = -float(np.angle(core[1, 1]))
    else:
        pr = 0.0
    if abs(core[1, 0]) > 0:
        pt = float(np.angle(core[1, 0]))
    elif abs(core[0, 1]) > 0:
        pt = -float(np.angle(-core[0, 1]))
    else:
        pt = 0.0
    return BeamSplitterSpec(R, pr, pt, float(g))


def with_reflectance(U: Unitary2, R: float) -> Unitary2:
    """Same phases as ``U`` but a different reflectance."""
    spec = decompose(U)
    return build_beam_splitter(
        BeamSplitterSpec(R, spec.phase_r, spec.phase_t, spec.phase_global)
    )


def with_arm_phase(U: Unitary2, theta: float) -> Unitary2:
    """Attach an extra phase ``theta`` to the lower output arm of ``U``.

    Both ``t`` and ``r'`` pick up ``exp(i theta)``, so unitarity is kept and
    any loop phase built from ``arg(t)`` shifts by exactly ``theta``.
    """
    return Unitary2(np.diag([1.0, np.exp(1j * theta)]) @ U.matrix)


def check_unitary(U, tol: float = UNITARITY_TOL) -> bool:
    if not tol > 0:
        raise ValueError("tol must be positive")
    m = U.matrix if isinstance(U, Unitary2) else np.asarray(U, dtype=np.complex128)
    dev = np.abs(m @ m.conj().T - np.eye(m.shape[0]))
    return bool(np.max(dev) <= tol)


def loop_phase(S_in: Unitary2, S_out: Unitary2) -> float:
    """Phase enclosed by an interferometer built from two splitters.

    ``arg(t_in) + arg(t'_out) - arg(r_in) - arg(r_out)``, wrapped to (-pi, pi].
    """
    entries = (S_in.t, S_out.t_prime, S_in.r, S_out.r)
    if min(abs(z) for z in entries) == 0.0:
        raise DegenerateSplitterError(
            "loop phase is undefined for a fully reflecting or fully transmitting splitter"
        )
    t_in, t_out, r_in, r_out = (np.angle(z) for z in entries)
    return wrap_phase(float(t_in + t_out - r_in - r_out))
