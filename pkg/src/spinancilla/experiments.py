"""Quench drivers, long-time averages, scaling fits, and sweep orchestration."""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .dynamics import (
    DENSE_THRESHOLD_DEFAULT,
    KRYLOV_TOL_DEFAULT,
    PureState,
    TimeGrid,
    evolve,
    prepare_polarized,
    prepare_spin_ground_state,
)
from .entanglement import METRIC_FIELDS, MetricCalculator, MetricSample
from .hamiltonian import build_hamiltonian
from .hilbert import ConfigurationError, ModelParams

INITIAL_STATES = ("polarized", "spin_ground_state")


def lambda_from_knob(lambda2_over_omega: float, omega_c: float) -> float:
    """Convert the lam^2/omega_c sweep knob into the bare coupling lam."""
    if lambda2_over_omega < 0:
        raise ConfigurationError(f"lam^2/omega_c must be >= 0, got {lambda2_over_omega}")
    return float(np.sqrt(lambda2_over_omega * omega_c))


@dataclass(frozen=True)
class SweepSpec:
    """Parameter grid for a sweep; every (L, h, lam^2/omega_c) point runs once."""

    h_values: tuple[float, ...]
    lambda2_over_omega_values: tuple[float, ...]
    L_values: tuple[int, ...]
    q: int
    J: float = -1.0
    omega_c: float = 0.5
    grid: TimeGrid = field(default_factory=TimeGrid)
    average_window: tuple[float, float] = (0.0, 50.0)
    initial_state: str = "polarized"
    pre_J: float | None = None
    pre_h: float | None = None

    def __post_init__(self) -> None:
        if not (self.h_values and self.lambda2_over_omega_values and self.L_values):
            raise ConfigurationError("sweep value lists must be non-empty")
        if self.initial_state not in INITIAL_STATES:
            raise ConfigurationError(f"unknown initial state {self.initial_state!r}")
        lo, hi = self.average_window
        t0, t1 = self.grid.t_start, self.grid.t_end
        if lo < t0 - 1e-9 or hi > t1 + 1e-9 or hi <= lo:
            raise ConfigurationError(
                f"average window {self.average_window} not inside grid [{t0}, {t1}]"
            )

    def points(self):
        """Deterministic (sorted) iteration order over the grid."""
        for L in sorted(self.L_values):
            for h in sorted(self.h_values):
                for knob in sorted(self.lambda2_over_omega_values):
                    yield L, h, knob

    def params_for(self, L: int, h: float, knob: float) -> ModelParams:
        return ModelParams(
            L=L,
            q=self.q,
            J=self.J,
            h=h,
            omega_c=self.omega_c,
            lam=lambda_from_knob(knob, self.omega_c),
        )


@dataclass
class QuenchRecord:
    """Time-ordered metric series of one parameter point plus provenance."""

    params: ModelParams
    samples: list[MetricSample]
    provenance: dict

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples])

    def window_mask(self, window: tuple[float, float]) -> np.ndarray:
        t = self.series("t")
        lo, hi = window
        return (t >= lo - 1e-9) & (t <= hi + 1e-9)


@dataclass
class MELFit:
    """Through-origin fit MEL ~ alpha * (e^S - 1) over a time window."""

    alpha: float
    r_squared: float
    axis: str
    window: tuple[float, float]
    defined: bool = True


def provenance_for(params: ModelParams, grid: TimeGrid, initial: str) -> dict:
    payload = {
        "params": asdict(params),
        "grid": asdict(grid),
        "initial_state": initial,
    }
    digest = hashlib.sha256(
        json.dumps(payload, sort_keys=True).encode("utf-8")
    ).hexdigest()
    payload["config_hash"] = digest
    payload["code_version"] = __version__
    return payload


def run_quench(
    params: ModelParams,
    grid: TimeGrid,
    initial: str | PureState = "polarized",
    *,
    mi_convention: str = "eq2",
    dense_threshold: int = DENSE_THRESHOLD_DEFAULT,
    krylov_tol: float = KRYLOV_TOL_DEFAULT,
    check_invariants: bool = True,
) -> QuenchRecord:
    """Quench the chosen initial state and record every metric at each sample."""
    if isinstance(initial, PureState):
        state0, initial_name = initial, "custom"
    elif initial == "polarized":
        state0, initial_name = prepare_polarized(params), initial
    elif initial == "spin_ground_state":
        state0, initial_name = prepare_spin_ground_state(params), initial
    else:
        raise ConfigurationError(f"unknown initial state {initial!r}")
    ham = build_hamiltonian(params)
    engine = MetricCalculator(params, ham, mi_convention=mi_convention)
    samples = []
    for state in evolve(
        state0, ham, grid, dense_threshold=dense_threshold, krylov_tol=krylov_tol
    ):
        sample = engine.sample(state)
        if check_invariants:
            engine.check_invariants(sample)
        samples.append(sample)
    return QuenchRecord(params, samples, provenance_for(params, grid, initial_name))


def time_average(record: QuenchRecord, window: tuple[float, float]) -> MetricSample:
    """Arithmetic mean of every metric over samples inside the window."""
    mask = record.window_mask(window)
    if not np.any(mask):
        raise ConfigurationError(f"no samples inside averaging window {window}")
    means = {
        name: float(np.mean(record.series(name)[mask])) for name in METRIC_FIELDS
    }
    return MetricSample(**means)


def fit_mel_entropy(
    record: QuenchRecord, axis: str, window: tuple[float, float]
) -> MELFit:
    """Least-squares alpha of MEL_mu(t) against e^{S_A(t)} - 1 through the origin.

    r_squared follows the through-origin convention 1 - SS_res / sum(y^2);
    a flat-zero entropy series makes the fit undefined.
    """
    if axis not in ("x", "z"):
        raise ConfigurationError(f"axis must be 'x' or 'z', got {axis!r}")
    mask = record.window_mask(window)
    if not np.any(mask):
        raise ConfigurationError(f"no samples inside fit window {window}")
    x = np.expm1(record.series("S_vN_A")[mask])
    y = record.series(f"MEL_S{axis}")[mask]
    sxx = float(x @ x)
    if sxx < 1e-20 or float(np.max(np.abs(x))) < 1e-10:
        return MELFit(float("nan"), float("nan"), axis, window, defined=False)
    alpha = float(x @ y) / sxx
    ss_res = float(np.sum((y - alpha * x) ** 2))
    ss_tot = float(np.sum(y**2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
    return MELFit(alpha, r2, axis, window)


def pearson(record: QuenchRecord, axis: str, window: tuple[float, float]) -> float:
    """Pearson correlation of MEL_mu(t) with e^{S_A(t)} - 1 over the window."""
    mask = record.window_mask(window)
    x = np.expm1(record.series("S_vN_A")[mask])
    y = record.series(f"MEL_S{axis}")[mask]
    sx, sy = x.std(), y.std()
    if sx == 0 or sy == 0:
        return float("nan")
    return float(np.corrcoef(x, y)[0, 1])


def _initial_for(spec: SweepSpec, params: ModelParams) -> str | PureState:
    if spec.initial_state == "spin_ground_state":
        pre = replace(
            params,
            J=spec.pre_J if spec.pre_J is not None else params.J,
            h=spec.pre_h if spec.pre_h is not None else params.h,
            lam=0.0,
        )
        return prepare_spin_ground_state(pre)
    return "polarized"


def _run_point(args):
    spec, L, h, knob, mi_convention, dense_threshold = args
    params = spec.params_for(L, h, knob)
    record = run_quench(
        params,
        spec.grid,
        _initial_for(spec, params),
        mi_convention=mi_convention,
        dense_threshold=dense_threshold,
    )
    averages = time_average(record, spec.average_window)
    fits = {
        axis: fit_mel_entropy(record, axis, spec.average_window) for axis in ("x", "z")
    }
    return (L, h, knob), record, averages, fits


@dataclass
class SweepPointResult:
    L: int
    h: float
    lambda2_over_omega: float
    record: QuenchRecord
    averages: MetricSample
    fits: dict


def run_sweep(
    spec: SweepSpec,
    *,
    workers: int = 1,
    mi_convention: str = "eq2",
    dense_threshold: int = DENSE_THRESHOLD_DEFAULT,
) -> list[SweepPointResult]:
    """Run every sweep point; results come back in deterministic sorted order."""
    jobs = [
        (spec, L, h, knob, mi_convention, dense_threshold)
        for (L, h, knob) in spec.points()
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_run_point, jobs))
    else:
        raw = [_run_point(job) for job in jobs]
    return [
        SweepPointResult(L, h, knob, record, averages, fits)
        for (L, h, knob), record, averages, fits in raw
    ]


def _linear_regression(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares slope, intercept, r^2."""
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - pred) ** 2)) / ss_tot if ss_tot > 0 else float("nan")
    return float(slope), float(intercept), r2


@dataclass
class FiniteSizeScan:
    """Per-size long-time averages plus the entropy and MI scaling regressions."""

    rows: list[dict]
    s_logL_slope: float
    s_logL_intercept: float
    s_logL_r2: float
    mi_L_slope: float
    mi_L_intercept: float
    mi_L_r2: float


def finite_size_from_results(results: list[SweepPointResult]) -> FiniteSizeScan:
    """Scaling regressions from already-computed sweep points (one per size)."""
    if len({res.L for res in results}) < 3:
        raise ConfigurationError("finite-size scan needs at least three sizes")
    rows = []
    for res in sorted(results, key=lambda r: r.L):
        rows.append(
            {
                "L": res.L,
                "S_vN_A": res.averages.S_vN_A,
                "MI_half": res.averages.MI_half,
                "alpha_x": res.fits["x"].alpha,
                "alpha_z": res.fits["z"].alpha,
            }
        )
    sizes = np.array([row["L"] for row in rows], dtype=float)
    entropies = np.array([row["S_vN_A"] for row in rows])
    mis = np.array([row["MI_half"] for row in rows])
    s_slope, s_icept, s_r2 = _linear_regression(np.log(sizes), entropies)
    mi_slope, mi_icept, mi_r2 = _linear_regression(sizes, mis)
    return FiniteSizeScan(rows, s_slope, s_icept, s_r2, mi_slope, mi_icept, mi_r2)


def finite_size_scan(
    spec: SweepSpec, *, workers: int = 1, mi_convention: str = "eq2"
) -> FiniteSizeScan:
    """Scan system sizes at one (h, lam) point; fit S_A against ln L and MI against L."""
    if len(spec.h_values) != 1 or len(spec.lambda2_over_omega_values) != 1:
        raise ConfigurationError("finite-size scan needs exactly one h and one coupling")
    if len(spec.L_values) < 3:
        raise ConfigurationError("finite-size scan needs at least three sizes")
    results = run_sweep(spec, workers=workers, mi_convention=mi_convention)
    return finite_size_from_results(results)


@dataclass
class QConvergenceReport:
    """Max per-metric deviation between runs at q and at 2q."""

    q_low: int
    q_high: int
    deviations: dict
    threshold: float
    converged: bool


def q_convergence(
    params: ModelParams,
    grid: TimeGrid,
    *,
    factor: int = 2,
    threshold: float = 1e-3,
    initial: str = "polarized",
    dense_threshold: int = DENSE_THRESHOLD_DEFAULT,
) -> QConvergenceReport:
    """Rerun at doubled boson truncation and report worst-case metric shifts."""
    if params.q < 4:
        raise ConfigurationError(f"q-convergence check needs q >= 4, got {params.q}")
    rec_low = run_quench(params, grid, initial, dense_threshold=dense_threshold)
    rec_high = run_quench(
        replace(params, q=factor * params.q), grid, initial, dense_threshold=dense_threshold
    )
    deviations = {}
    for name in METRIC_FIELDS:
        if name in ("t", "norm_err"):
            continue
        deviations[name] = float(
            np.max(np.abs(rec_low.series(name) - rec_high.series(name)))
        )
    converged = all(dev < threshold for dev in deviations.values())
    return QConvergenceReport(params.q, factor * params.q, deviations, threshold, converged)
