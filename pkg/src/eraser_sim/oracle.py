"""Independent brute-force reference for the two-electron evolution.

Everything here is written with explicit index loops over the 4-dim product
space so that it shares no code path with ``engine``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .engine import DET_INPUTS, MZI_INPUTS, EraserSetup, evolve
from .observables import (
    closed_form_joint,
    closed_form_p_alpha,
    duality_check,
    joint_probabilities,
    single_probabilities,
)
from .unitary import BeamSplitterSpec


def kron4(A, B) -> list[list[complex]]:
    """Kronecker product of two 2x2 matrices on the (mzi, det) ordering."""
    out = [[0j] * 4 for _ in range(4)]
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    out[2 * i + k][2 * j + l] = complex(A[i][j]) * complex(B[k][l])
    return out


def kron_vec(x, y) -> list[complex]:
    return [complex(x[i]) * complex(y[k]) for i in range(2) for k in range(2)]


def matvec(M, v) -> list[complex]:
    return [sum(M[i][j] * v[j] for j in range(4)) for i in range(4)]


def oracle_state(setup: EraserSetup) -> np.ndarray:
    """``kron(S2, S4) . diag(1, 1, 1, e^{i dphi}) . (col(S1) x col(S3))``."""
    S1, S2, S3, S4 = (s.matrix.tolist() for s in (setup.S1, setup.S2, setup.S3, setup.S4))
    c1 = MZI_INPUTS.index(setup.input_mzi)
    c3 = DET_INPUTS.index(setup.input_det)
    psi = kron_vec([S1[0][c1], S1[1][c1]], [S3[0][c3], S3[1][c3]])
    phase = [1, 1, 1, cmath.exp(1j * setup.delta_phi)]
    psi = [phase[k] * psi[k] for k in range(4)]
    return np.array(matvec(kron4(S2, S4), psi))


def random_spec(rng: np.random.Generator, R_range=(0.0, 1.0)) -> BeamSplitterSpec:
    lo, hi = R_range
    return BeamSplitterSpec(float(rng.uniform(lo, hi)), *(float(x) for x in rng.uniform(-math.pi, math.pi, 3)))


def random_setup(rng: np.random.Generator, geometry: str = "either", R_range=(0.0, 1.0),
                 random_inputs: bool = True) -> EraserSetup:
    """Random device. ``geometry`` is ``"setup1"`` (S4 = identity), ``"setup2"`` or ``"either"``."""
    if geometry == "either":
        geometry = "setup1" if rng.random() < 0.5 else "setup2"
    specs = [random_spec(rng, R_range) for _ in range(3)]
    s4 = random_spec(rng, R_range) if geometry == "setup2" else None
    kw = {}
    if random_inputs:
        kw = {"input_mzi": MZI_INPUTS[int(rng.integers(2))], "input_det": DET_INPUTS[int(rng.integers(2))]}
    return EraserSetup.from_specs(*specs, s4, delta_phi=float(rng.uniform(-math.pi, math.pi)), **kw)


@dataclass(frozen=True)
class CheckResult:
    name: str
    cases: int
    max_error: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tol


def run_suite(n: int = 1000, seed: int = 0, tol: float = 1e-12) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    err = dict.fromkeys(("evolve_vs_oracle", "norm", "closed_form_p_alpha", "closed_form_joint",
                         "marginals", "duality_identity"), 0.0)
    for _ in range(n):
        s = random_setup(rng, R_range=(0.02, 0.98))
        state = evolve(s)
        err["evolve_vs_oracle"] = max(err["evolve_vs_oracle"], float(np.max(np.abs(state.amp - oracle_state(s)))))
        err["norm"] = max(err["norm"], abs(state.norm - 1.0))
        single = single_probabilities(state)
        err["closed_form_p_alpha"] = max(err["closed_form_p_alpha"], abs(closed_form_p_alpha(s) - single.p_alpha))
        joint = joint_probabilities(state)
        for A in ("alpha", "beta"):
            for B in ("gamma", "delta"):
                err["closed_form_joint"] = max(err["closed_form_joint"], abs(closed_form_joint(s, (A, B)) - joint[A, B]))
        brute = np.abs(oracle_state(s)) ** 2
        err["marginals"] = max(err["marginals"], abs(single.p_alpha - brute[0] - brute[1]),
                               abs(single.p_gamma - brute[0] - brute[2]))
        rep = duality_check(s)
        err["duality_identity"] = max(err["duality_identity"], abs(rep.sum_of_squares - 1.0))
    return [CheckResult(k, n, float(v), tol) for k, v in err.items()]
