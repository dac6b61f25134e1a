"""Monte Carlo coincidence counting, parameter sweeps and fringe fitting.

Random streams use numpy's Philox counter-based generator. Every sweep point
(or protocol run) gets its own stream keyed by ``SeedSequence(seed,
spawn_key=(index,))``, so results do not depend on evaluation order or on the
number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .engine import (
    BASIS,
    DET_INPUTS,
    DET_LEADS,
    MZI_INPUTS,
    MZI_LEADS,
    EraserSetup,
    FieldGeometry,
    delta_phi_from_geometry,
    evolve,
    initial_state,
    mzi_path_amplitudes,
    uv_coefficients,
)
from .observables import (
    DEFAULT_LEADS,
    BiasConfig,
    DegenerateVisibilityError,
    DualityReport,
    JointProbabilities,
    SingleProbabilities,
    _vd_from_weights,
    cross_correlation,
    cross_correlations,
    joint_probabilities,
    path_weights,
    try_duality,
)

THREADS_ENV = "ERASER_SIM_THREADS"
SWEEP_PARAMETERS = ("phi", "phi_d", "delta_phi", "R1", "R2", "R3", "R4", "H")


class EmptyCountsError(ValueError):
    pass


class FitError(ValueError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class SweepError(RuntimeError):
    def __init__(self, index, value, cause):
        super().__init__(f"sweep point {index} (value={value!r}) failed: {cause}")
        self.index = index
        self.value = value
        self.cause = cause


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class CoincidenceCounts:
    """Tallies of the four joint outcomes, ordered like ``BASIS``."""

    n: np.ndarray

    def __post_init__(self):
        n = np.array(self.n, dtype=np.int64).reshape(4)
        if np.any(n < 0):
            raise ValueError("counts must be non-negative")
        n.setflags(write=False)
        object.__setattr__(self, "n", n)

    @property
    def total(self) -> int:
        return int(self.n.sum())

    def __getitem__(self, pair) -> int:
        return int(self.n[BASIS.index("_".join(pair))])

    def __eq__(self, other):
        if not isinstance(other, CoincidenceCounts):
            return NotImplemented
        return bool(np.array_equal(self.n, other.n))

    __hash__ = None


def _probability_vector(p) -> np.ndarray:
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    return p / p.sum()


def sample_shots(setup: EraserSetup, n: int, seed: int, stream: int = 0) -> CoincidenceCounts:
    """Draw ``n`` independent two-electron shots and tally joint outcomes.

    The tally of i.i.d. categorical shots is drawn directly from the
    multinomial distribution.
    """
    if n < 0:
        raise ValueError("number of shots must be >= 0")
    p = _probability_vector(joint_probabilities(evolve(setup)).as_array())
    if n == 0:
        return CoincidenceCounts(np.zeros(4, dtype=np.int64))
    return CoincidenceCounts(make_rng(seed, stream).multinomial(n, p))


@dataclass(frozen=True)
class ProbabilityEstimate:
    single: SingleProbabilities
    joint: JointProbabilities
    se_single: SingleProbabilities
    se_joint: JointProbabilities
    total: int


def _binomial_se(p, total):
    return np.sqrt(np.clip(p * (1.0 - p), 0.0, None) / total)


def estimate_probabilities(counts: CoincidenceCounts) -> ProbabilityEstimate:
    total = counts.total
    if total == 0:
        raise EmptyCountsError("cannot estimate probabilities from zero shots")
    joint = counts.n / total
    single = np.concatenate([joint.reshape(2, 2).sum(axis=1), joint.reshape(2, 2).sum(axis=0)])
    return ProbabilityEstimate(
        single=SingleProbabilities(*map(float, single)),
        joint=JointProbabilities.from_array(joint),
        se_single=SingleProbabilities(*map(float, _binomial_se(single, total))),
        se_joint=JointProbabilities.from_array(_binomial_se(joint, total)),
        total=total,
    )


def estimate_cross_correlation(counts: CoincidenceCounts, leads, bias: BiasConfig) -> tuple[float, float]:
    """Sample covariance of the lead-A and lead-B occupation indicators.

    Returns ``(value, standard_error)``. The value is the unbiased estimator
    ``n/(n-1) (p_AB - p_A p_B)``; its variance uses the finite-sample formula
    for a sample covariance with plug-in central moments, which stays
    non-zero at fringe extrema where the linearized error vanishes.
    """
    A, B = leads
    n = counts.total
    if n == 0:
        raise EmptyCountsError("cannot estimate a cross-correlation from zero shots")
    if n < 2:
        raise EmptyCountsError("at least two shots are needed for a covariance estimate")
    est = estimate_probabilities(counts)
    pA, pB, pAB = est.single[A], est.single[B], est.joint[A, B]
    cov = pAB - pA * pB
    # 2x2 table of (X_A, X_B) outcomes
    table = {(1, 1): pAB, (1, 0): pA - pAB, (0, 1): pB - pAB, (0, 0): 1.0 - pA - pB + pAB}
    mu22 = sum(w * (x - pA) ** 2 * (y - pB) ** 2 for (x, y), w in table.items())
    var_a, var_b = pA * (1 - pA), pB * (1 - pB)
    var = mu22 / n - cov**2 * (n - 2) / (n * (n - 1)) + var_a * var_b / (n * (n - 1))
    scale = cross_correlation(0.0, 0.0, 1.0, bias)
    return scale * cov * n / (n - 1), abs(scale) * math.sqrt(max(var, 0.0))


# --------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    grid: Sequence[float]
    base: EraserSetup
    shots: int = 0
    seed: int = 0
    bias: BiasConfig = field(default_factory=BiasConfig)
    delta_area: Optional[float] = None

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}; expected one of {SWEEP_PARAMETERS}")
        grid = tuple(float(x) for x in self.grid)
        if not grid:
            raise ValueError("sweep grid must not be empty")
        diffs = np.diff(grid)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("sweep grid must be strictly ordered")
        object.__setattr__(self, "grid", grid)
        if self.shots < 0:
            raise ValueError("shots must be >= 0")
        if self.parameter == "H" and self.delta_area is None:
            raise ValueError("an H sweep needs delta_area")


@dataclass(frozen=True)
class SweepRow:
    index: int
    value: float
    setup: EraserSetup
    single: SingleProbabilities
    joint: JointProbabilities
    cross: dict
    duality: Optional[DualityReport]
    shots: int = 0
    counts: Optional[CoincidenceCounts] = None
    estimate: Optional[ProbabilityEstimate] = None
    est_cross: Optional[dict] = None


def setup_at(spec: SweepSpec, value: float) -> EraserSetup:
    base, p = spec.base, spec.parameter
    if p == "phi":
        return base.with_phi(value)
    if p == "phi_d":
        return base.with_phi_d(value)
    if p == "delta_phi":
        return replace(base, delta_phi=value)
    if p == "H":
        return replace(base, delta_phi=delta_phi_from_geometry(FieldGeometry(value, spec.delta_area)))
    return base.with_reflectance(int(p[1]), value)


def evaluate_point(setup: EraserSetup, bias: BiasConfig, index: int = 0, value: float = float("nan"),
                   shots: int = 0, seed: int = 0) -> SweepRow:
    state = evolve(setup)
    joint = joint_probabilities(state)
    row = SweepRow(
        index=index,
        value=value,
        setup=setup,
        single=joint.marginals(),
        joint=joint,
        cross=cross_correlations(state, bias),
        duality=try_duality(setup, DEFAULT_LEADS),
        shots=shots,
    )
    if shots > 0:
        counts = sample_shots(setup, shots, seed, stream=index)
        est_cross = None
        if shots >= 2:
            est_cross = {(A, B): estimate_cross_correlation(counts, (A, B), bias)
                         for A in MZI_LEADS for B in DET_LEADS}
        row = replace(row, counts=counts, estimate=estimate_probabilities(counts), est_cross=est_cross)
    return row


def sweep_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return 1
    n = int(raw)
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be an integer >= 1, got {raw!r}")
    return n


def sweep(spec: SweepSpec, threads: Optional[int] = None) -> list[SweepRow]:
    """Evaluate every grid point; rows come back in grid order."""
    threads = sweep_threads() if threads is None else threads

    def task(item):
        i, value = item
        try:
            return evaluate_point(setup_at(spec, value), spec.bias, i, value, spec.shots, spec.seed)
        except Exception as exc:  # re-raised with the row index attached
            raise SweepError(i, value, exc) from exc

    items = list(enumerate(spec.grid))
    if threads <= 1:
        return [task(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(task, items))


# --------------------------------------------------------------------------
# fringe fitting


@dataclass(frozen=True)
class FringeFit:
    mean: float
    amplitude: float
    phase: float
    visibility: float
    se_visibility: float
    condition: float


def fit_cosine(x, y) -> FringeFit:
    """Least-squares fit of ``y = a + b cos(x - c)`` with ``b >= 0``.

    Linear in the regressors ``(1, cos x, sin x)``; amplitude and phase are
    recovered from the two trigonometric coefficients.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise FitError("x and y must be 1-d arrays of equal length")
    if not np.all(np.isfinite(y)):
        raise FitError("fringe data contain non-finite values")
    if np.unique(x).size < 3:
        raise FitError("need at least 3 distinct grid points")
    if np.ptp(x) < math.pi - 1e-12:
        raise FitError(f"grid spans {np.ptp(x):.4g} rad, less than half a period")
    X = np.column_stack([np.ones_like(x), np.cos(x), np.sin(x)])
    cond = float(np.linalg.cond(X))
    if not cond < 1e8:
        raise FitError(f"ill-conditioned fringe fit (condition number {cond:.3g})", cond)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    a, c1, c2 = coef
    b = math.hypot(c1, c2)
    phase = math.atan2(c2, c1) if b > 0 else 0.0

    dof = x.size - 3
    if dof > 0 and a > 0:
        resid = y - X @ coef
        cov = (resid @ resid / dof) * np.linalg.inv(X.T @ X)
        if b > 0:
            grad = np.array([-b / a**2, c1 / (a * b), c2 / (a * b)])
        else:
            grad = np.array([0.0, 1.0 / a, 0.0])
        se_vis = math.sqrt(max(float(grad @ cov @ grad), 0.0))
    else:
        se_vis = 0.0
    vis = b / a if a > 0 else float("nan")
    return FringeFit(float(a), float(b), float(phase), float(vis), se_vis, cond)


def fit_fringe(table: Sequence[SweepRow], column) -> FringeFit:
    """Fit the fringe of one probability column of a sweep table.

    ``column`` is a lead name (``"alpha"``) for single probabilities or a
    lead pair (``("alpha", "gamma")``) for joint ones. Sampled estimates are
    used when the table carries them and ``column`` is prefixed ``"est:"``.
    """
    sampled = isinstance(column, str) and column.startswith("est:")
    key = column[4:] if sampled else column
    if isinstance(key, str) and "," in key:
        key = tuple(key.split(","))

    def pick(row):
        src = row.estimate if sampled else row
        if src is None:
            raise FitError(f"row {row.index} has no sampled estimate")
        return src.joint[key] if isinstance(key, tuple) else src.single[key]

    return fit_cosine([r.value for r in table], [pick(r) for r in table])


# --------------------------------------------------------------------------
# distinguishability protocol


@dataclass(frozen=True)
class ProtocolEstimate:
    distinguishability: float
    u_sq: float
    v_sq: float
    se_u_sq: float
    se_v_sq: float


def _path_pinned(setup: EraserSetup, path: int) -> EraserSetup:
    """Same device with BS-1 forcing the MZI electron onto one path (0 upper, 1 lower)."""
    col = MZI_INPUTS.index(setup.input_mzi)
    # column 0 = (r, t): R=1 keeps the electron upstairs; column 1 = (t', r') flips that
    R = 1.0 if (path == 0) == (col == 0) else 0.0
    return setup.with_reflectance(1, R)


def measure_distinguishability_protocol(setup: EraserSetup, shots: int, seed: int,
                                        leads=DEFAULT_LEADS) -> ProtocolEstimate:
    """Estimate D from two calibration runs with BS-1 fully reflecting/transmitting.

    The lead-B detector frequency in each run estimates ``|u_B|^2`` and
    ``|v_B|^2``; the path weights ``|a_A|^2``, ``|b_A|^2`` of the original MZI
    are then restored.
    """
    A, B = leads
    if shots <= 0:
        raise ValueError("protocol needs a positive number of shots")
    freqs = []
    for path in (0, 1):
        counts = sample_shots(_path_pinned(setup, path), shots, seed, stream=path)
        freqs.append(estimate_probabilities(counts).single[B])
    u_sq, v_sq = freqs
    a, b = (abs(z) for z in mzi_path_amplitudes(setup, A))
    upper, lower = a * a * u_sq, b * b * v_sq
    den = upper + lower
    if not den > 0:
        raise DegenerateVisibilityError("protocol denominator vanished; distinguishability undefined")
    se = [math.sqrt(f * (1 - f) / shots) for f in freqs]
    return ProtocolEstimate(abs(upper - lower) / den, u_sq, v_sq, se[0], se[1])


# --------------------------------------------------------------------------
# dephasing extension


@dataclass(frozen=True)
class DephasingModel:
    """Gaussian jitter of the interaction phase across an ensemble of M pairs."""

    sigma: float
    ensemble: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError("sigma must be finite and >= 0")
        if self.ensemble < 1:
            raise ValueError("ensemble size must be >= 1")

    def draws(self, center: float) -> np.ndarray:
        if self.sigma == 0:
            return np.full(self.ensemble, center)
        return make_rng(self.seed, 0).normal(center, self.sigma, self.ensemble)


def dephased_joint_fringe(setup: EraserSetup, model: DephasingModel, phis) -> np.ndarray:
    """Ensemble-averaged joint probabilities, shape ``(len(phis), 4)``.

    The state is affine in ``exp(i delta_phi)``, so each grid point costs one
    pure evolution plus a vectorized average over the jitter draws.
    """
    phases = np.exp(1j * model.draws(setup.delta_phi))
    out = np.empty((len(phis), 4))
    for k, phi in enumerate(phis):
        s = replace(setup.with_phi(phi), delta_phi=0.0)
        base = evolve(s).amp
        psi0 = initial_state(s).amp
        kernel = np.kron(s.S2.matrix, s.S4.matrix)[:, 3] * psi0[3]
        amps = base[None, :] + (phases[:, None] - 1.0) * kernel[None, :]
        out[k] = np.mean(np.abs(amps) ** 2, axis=0)
    return out


def dephased_duality(setup: EraserSetup, model: DephasingModel, leads=DEFAULT_LEADS,
                     points: int = 32) -> tuple[DualityReport, FringeFit]:
    """V from the fitted ensemble-averaged fringe, D from the averaged path weights."""
    A, B = leads
    path_weights(setup, leads)  # validates the lead pair
    phis = np.linspace(0.0, 2.0 * math.pi, points, endpoint=False)
    fringe = dephased_joint_fringe(setup, model, phis)[:, BASIS.index(f"{A}_{B}")]
    fit = fit_cosine(phis, fringe)

    a, b = (abs(z) for z in mzi_path_amplitudes(setup, A))
    # u does not see the interaction phase
    u_sq = abs(uv_coefficients(setup.S3, setup.S4, 0.0, setup.input_det).for_lead(B)[0]) ** 2
    v_sq = _mean_v_sq(setup, model, B)
    _, D = _vd_from_weights(a * a * u_sq, b * b * v_sq, 0.0)
    V = fit.visibility
    return DualityReport(float(V), float(D), "dephased", tuple(leads)), fit


def _mean_v_sq(setup: EraserSetup, model: DephasingModel, lead: str) -> float:
    col = setup.S3.column(DET_INPUTS.index(setup.input_det))
    row = setup.S4.matrix[DET_LEADS.index(lead)]
    phases = np.exp(1j * model.draws(setup.delta_phi))
    v = row[0] * col[0] + row[1] * col[1] * phases
    return float(np.mean(np.abs(v) ** 2))
