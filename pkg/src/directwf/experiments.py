"""Monte-Carlo campaigns over random states, with deterministic CSV output.

Randomness is keyed by (seed, unit index): Haar pools are generated in
fixed-size blocks seeded by (seed, block), finite-shot runs by
(seed, state, method, theta). Worker processes only change who computes a
unit, never what it computes, and results are reduced in unit order, so
output bytes do not depend on the worker count.
"""
from __future__ import annotations

import io as _io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._version import __version__
from ._kernels import state_moments
from .analysis import (
    accuracy_D,
    accuracy_columns,
    delta_psi_S,
    delta_psi_W,
    dwt_closed_form,
    dwt_error_bound,
    mixed_accuracy_D,
    precision_columns,
    precision_report,
    psi_tilde_from_indicator,
    ratio_bound_columns,
)
from .coupling import HALF_PI, check_theta
from .errors import ConfigError, DegenerateInputError, InvalidArgumentError
from .io import fmt
from .measurement import DST_BASES, DWT_BASES, SamplingScheme, mixed_probability_grid, pointer_probability_table, sample_table
from .reconstruction import (
    Method,
    arbitrary_theta_estimate,
    dwt_estimate,
    mixed_dst_estimate,
    mixed_dwt_estimate,
    pointer_tables,
)
from .states import (
    DensityMatrix,
    StateVector,
    as_state,
    haar_batch,
    haar_random_state,
    normalize_and_fix_phase,
    random_density_matrix,
    rng_from_seed,
    trace_distance_mixed,
    trace_distance_pure,
)

BLOCK_SIZE = 8192
AUDIT_STRIDE = 100  # 1% subsample
AUDIT_TOL = 1e-9
DESK_SAMPLES = 100_000
FULL_SAMPLES = 1_000_000
D_THRESHOLD = 0.1
DEFAULT_THETA_GRID = (0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.2, 1.4, HALF_PI)


class AuditError(RuntimeError):
    """Closed-form and simulated pipelines disagree on the audit subsample."""


@dataclass
class ExperimentConfig:
    d: int = 10
    thetas: Sequence[float] = (0.2,)
    samples: int = DESK_SAMPLES
    shots: int = 1_000_000
    reps: int = 200
    seed: int = 0
    workers: int = 1
    output_path: Optional[str] = None
    rank: int = 2
    scheme: str = SamplingScheme.POISSON.value
    gnuplot_hints: bool = False
    states: Optional[list] = field(default=None, repr=False)

    def validate(self, *, min_samples: int = 1) -> "ExperimentConfig":
        if int(self.d) != self.d or self.d < 2:
            raise ConfigError(f"d must be an integer >= 2, got {self.d!r}")
        if not self.thetas:
            raise ConfigError("at least one theta is required")
        try:
            self.thetas = tuple(check_theta(t) for t in self.thetas)
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc)) from exc
        for name in ("samples", "shots", "reps", "workers"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if self.samples < min_samples:
            raise ConfigError(f"samples must be >= {min_samples}")
        if not -(2**63) <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        try:
            SamplingScheme(self.scheme)
        except ValueError as exc:
            raise ConfigError(f"unknown sampling scheme {self.scheme!r}") from exc
        return self

    def echo(self, keys: Sequence[str]) -> str:
        parts = []
        for k in keys:
            v = getattr(self, k)
            if k == "thetas":
                v = ",".join(fmt(float(t)) for t in v)
            parts.append(f"{k}={fmt(v) if not isinstance(v, str) else v}")
        return " ".join(parts)


def derive_seed(seed, *keys: int) -> int:
    """64-bit sub-seed for ``keys`` under ``seed``."""
    ss = np.random.SeedSequence(int(seed) & 0xFFFF_FFFF_FFFF_FFFF, spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0])


def _pmap(fn: Callable, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


# Haar pools ---------------------------------------------------------------

def _pool_block(task):
    seed, d, block, count = task
    z = haar_batch(rng_from_seed(seed, block), count, d)
    moments = state_moments(z)
    start = block * BLOCK_SIZE
    picks = [i for i in range(count) if (start + i) % AUDIT_STRIDE == 0]
    audit = [np.asarray(normalize_and_fix_phase(z[i]).amplitudes) for i in picks]
    return moments, audit


def haar_pool(d: int, samples: int, seed, workers: int = 1):
    """Moments of ``samples`` Haar states plus the phase-fixed audit subsample.

    Returns ``(moments, audit_states)``; the audit holds every 100th state.
    """
    nblocks = -(-samples // BLOCK_SIZE)
    tasks = [(int(seed), d, b, min(BLOCK_SIZE, samples - b * BLOCK_SIZE)) for b in range(nblocks)]
    parts = _pmap(_pool_block, tasks, workers)
    moments = np.concatenate([m for m, _ in parts], axis=0)
    audit = [s for _, a in parts for s in a]
    return moments, audit


def audit_accuracy(audit_states, moments_rows: np.ndarray, theta: float) -> None:
    """Check the batch closed forms and the simulated weak-value pipeline on the audit states."""
    cols = accuracy_columns(moments_rows, theta)
    for k, v in enumerate(audit_states):
        state = as_state(v)
        rep = accuracy_D(state, theta)
        table = pointer_probability_table(state, theta)
        est = dwt_estimate(table, theta).estimate
        pred = dwt_closed_form(state, theta)
        checks = (
            abs(rep.D - cols["D"][k]),
            abs(rep.psi_tilde_W - cols["psi_tilde_W"][k]),
            float(np.max(np.abs(np.asarray(est.amplitudes) - np.asarray(pred.amplitudes)))),
            abs(trace_distance_pure(state, pred) - rep.D),
        )
        if max(checks) > AUDIT_TOL:
            raise AuditError(f"audit state {k}: closed form and pipeline disagree by {max(checks):.3g} at theta={theta}")


def _audit_rows(moments: np.ndarray) -> np.ndarray:
    return moments[::AUDIT_STRIDE]


def audit_precision(audit_states, moments_rows: np.ndarray, d: int, theta: float) -> None:
    cols = precision_columns(moments_rows, d, theta)
    for k, v in enumerate(audit_states):
        state = as_state(v)
        if state.pathological:
            continue
        rep = precision_report(state, theta, 1)
        if abs(rep.ratio - cols["ratio"][k]) > AUDIT_TOL * max(1.0, rep.ratio):
            raise AuditError(f"audit state {k}: batch and per-state precision ratio disagree")


# CSV ------------------------------------------------------------------------

def render_csv(command: str, cfg: ExperimentConfig, echo_keys: Sequence[str], columns: Sequence[str],
               rows: list, hints: Sequence[str] = ()) -> str:
    buf = _io.StringIO()
    buf.write(f"# directwf {__version__} {command} {cfg.echo(echo_keys)}\n")
    if cfg.gnuplot_hints:
        for h in hints:
            buf.write(f"# gnuplot: {h}\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(fmt(r[c]) for c in columns) + "\n")
    return buf.getvalue()


def emit(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


# campaigns --------------------------------------------------------------

ACCURACY_COLUMNS = ("theta", "p_W", "p_D", "M", "d", "seed")


def run_accuracy_sweep(cfg: ExperimentConfig) -> str:
    """Per theta: probability of a negative weak-value sum and of distortion above 0.1."""
    cfg.validate()
    moments, audit = haar_pool(cfg.d, cfg.samples, cfg.seed, cfg.workers)
    rows = []
    for t in cfg.thetas:
        audit_accuracy(audit, _audit_rows(moments), t)
        cols = accuracy_columns(moments, t)
        rows.append({
            "theta": t,
            "p_W": float(np.mean(cols["psi_tilde_W"] < 0)),
            "p_D": float(np.mean(cols["D"] > D_THRESHOLD)),
            "M": cfg.samples,
            "d": cfg.d,
            "seed": int(cfg.seed),
        })
    text = render_csv("accuracy-sweep", cfg, ("d", "thetas", "samples", "seed"), ACCURACY_COLUMNS, rows,
                      hints=("set xlabel 'theta'", "set ylabel 'probability'", "set logscale y",
                             "plot 'FILE' u 1:2 w lp t 'p_W', '' u 1:3 w lp t 'p_D'"))
    emit(text, cfg.output_path)
    return text


SCATTER_COLUMNS = ("state_id", "d", "theta", "psi_tilde", "D", "D_approx", "psi_tilde_W", "bound",
                   "delta_psi_W", "delta_psi_S", "ratio", "ratio_bound", "dashed_ratio_bound")


def scatter_rows(moments: np.ndarray, d: int, theta: float, shots: int) -> list:
    acc = accuracy_columns(moments, theta)
    prec = precision_columns(moments, d, theta)
    pt = moments[:, 0]
    bound = dwt_error_bound(theta)
    rb = ratio_bound_columns(pt, d, theta)
    dashed = ratio_bound_columns(psi_tilde_from_indicator(acc["psi_tilde_W"], theta), d, theta)
    root = math.sqrt(shots)
    rows = []
    for i in range(moments.shape[0]):
        rows.append({
            "state_id": i, "d": d, "theta": theta, "psi_tilde": pt[i], "D": acc["D"][i],
            "D_approx": acc["D_approx"][i], "psi_tilde_W": acc["psi_tilde_W"][i], "bound": bound,
            "delta_psi_W": prec["delta_W"][i] / root, "delta_psi_S": prec["delta_S"][i] / root,
            "ratio": prec["ratio"][i], "ratio_bound": rb[i], "dashed_ratio_bound": dashed[i],
        })
    return rows


def run_scatter(cfg: ExperimentConfig) -> str:
    """Per-state accuracy and precision at a single theta."""
    cfg.validate()
    if len(cfg.thetas) != 1:
        raise ConfigError("scatter takes exactly one theta")
    t = cfg.thetas[0]
    moments, audit = haar_pool(cfg.d, cfg.samples, cfg.seed, cfg.workers)
    audit_accuracy(audit, _audit_rows(moments), t)
    audit_precision(audit, _audit_rows(moments), cfg.d, t)
    rows = scatter_rows(moments, cfg.d, t, cfg.shots)
    text = render_csv("scatter", cfg, ("d", "thetas", "samples", "shots", "seed"), SCATTER_COLUMNS, rows,
                      hints=("set xlabel 'psi_tilde_W'", "set ylabel 'delta_psi_S/delta_psi_W'",
                             "plot 'FILE' u 7:11 w d t 'ratio', '' u 7:13 w d t 'dashed bound'"))
    emit(text, cfg.output_path)
    return text


THETA_MEAN_COLUMNS = ("theta", "mean_ratio", "mean_D", "M")


def run_theta_means(cfg: ExperimentConfig) -> str:
    """Mean precision ratio and mean distortion per theta."""
    cfg.validate()
    moments, audit = haar_pool(cfg.d, cfg.samples, cfg.seed, cfg.workers)
    rows = []
    for t in cfg.thetas:
        audit_accuracy(audit, _audit_rows(moments), t)
        acc = accuracy_columns(moments, t)
        prec = precision_columns(moments, cfg.d, t)
        rows.append({"theta": t, "mean_ratio": float(np.mean(prec["ratio"])),
                     "mean_D": float(np.mean(acc["D"])), "M": cfg.samples})
    text = render_csv("theta-means", cfg, ("d", "thetas", "samples", "seed"), THETA_MEAN_COLUMNS, rows,
                      hints=("set xlabel 'theta'", "plot 'FILE' u 1:2 w lp t '<ratio>', '' u 1:3 w lp t '<D>'"))
    emit(text, cfg.output_path)
    return text


SHOT_NOISE_COLUMNS = ("state_id", "d", "method", "theta", "N", "delta_emp", "delta_pred", "rel_err")


def empirical_delta(estimates: np.ndarray) -> float:
    """Root-sum-square spread of repeated estimates, shape (reps, d)."""
    centred = estimates - estimates.mean(axis=0)
    return math.sqrt(float(np.sum(np.abs(centred) ** 2)) / (estimates.shape[0] - 1))


def simulate_estimates(psi: StateVector, method: Method, theta: float, shots: int, reps: int,
                       scheme, rng: np.random.Generator) -> np.ndarray:
    """``reps`` finite-shot reconstructions, shape (reps, d).

    DWT splits ``shots`` over two pointer bases, the exact methods over three.
    """
    table = pointer_probability_table(psi, theta)
    bases = DWT_BASES if method is Method.DWT else DST_BASES
    per_basis = shots // len(bases)
    stacked = np.broadcast_to(table, (reps,) + table.shape)
    counts, _ = sample_table(stacked, per_basis, scheme, rng, bases)
    freq = counts / per_basis
    a = freq[..., 2] - freq[..., 3]
    if method is not Method.DWT:
        a = a + 2.0 * math.tan(0.5 * theta) * freq[..., 1]
    b = freq[..., 4] - freq[..., 5]
    norm = np.sqrt(np.sum(a * a + b * b, axis=1, keepdims=True))
    if np.any(norm == 0):
        raise DegenerateInputError("a finite-shot run produced all-zero reconstruction coefficients")
    return (a + 1j * b) / norm


def _shot_noise_unit(task):
    seed, sid, amps, mi, ti, method, theta, shots, reps, scheme = task
    psi = as_state(amps)
    rng = rng_from_seed(seed, sid, mi, ti)
    est = simulate_estimates(psi, method, theta, shots, reps, scheme, rng)
    emp = empirical_delta(est)
    pred = delta_psi_W(psi, theta, shots) if method is Method.DWT else delta_psi_S(psi, shots)
    return {"state_id": sid, "d": psi.d, "method": method.value, "theta": theta, "N": shots,
            "delta_emp": emp, "delta_pred": pred, "rel_err": emp / pred - 1.0}


def shot_noise_states(cfg: ExperimentConfig) -> list:
    if cfg.states is not None:
        return [as_state(s) for s in cfg.states]
    return [haar_random_state(cfg.d, derive_seed(cfg.seed, 0, i)) for i in range(cfg.samples)]


def run_shot_noise_validation(cfg: ExperimentConfig) -> str:
    """Empirical vs predicted shot noise, DWT at every theta and DST at pi/2."""
    cfg.validate()
    if cfg.shots < 3:
        raise ConfigError("shot-noise validation needs N >= 3 (three bases for the strong method)")
    if cfg.reps < 2:
        raise ConfigError("at least two repetitions are needed to estimate a spread")
    states = shot_noise_states(cfg)
    scheme = SamplingScheme(cfg.scheme)
    tasks = []
    for sid, psi in enumerate(states):
        amps = np.asarray(psi.amplitudes)
        for ti, t in enumerate(cfg.thetas):
            tasks.append((int(cfg.seed), sid, amps, 0, ti, Method.DWT, t, cfg.shots, cfg.reps, scheme))
        tasks.append((int(cfg.seed), sid, amps, 1, 0, Method.DST, HALF_PI, cfg.shots, cfg.reps, scheme))
    rows = _pmap(_shot_noise_unit, tasks, cfg.workers)
    text = render_csv("shot-noise", cfg, ("d", "thetas", "samples", "shots", "reps", "scheme", "seed"),
                      SHOT_NOISE_COLUMNS, rows,
                      hints=("set xlabel 'state'", "plot 'FILE' u 1:8 t 'relative error'"))
    emit(text, cfg.output_path)
    return text


MIXED_COLUMNS = ("state_id", "d", "rank", "theta", "D_closed", "D_pipeline", "dst_residual")


def _mixed_unit(task):
    sid, matrix, rank, thetas = task
    rho = DensityMatrix(matrix)
    out = []
    for t in thetas:
        r10, r11 = pointer_tables(mixed_probability_grid(rho, t))
        dst = mixed_dst_estimate(r10, r11, t).estimate
        residual = trace_distance_mixed(rho, dst)
        if math.cos(t) < 1e-12:
            d_closed = d_pipe = None
        else:
            d_closed = mixed_accuracy_D(rho, t)
            d_pipe = trace_distance_mixed(rho, mixed_dwt_estimate(r10, t).estimate)
            if abs(d_closed - d_pipe) > AUDIT_TOL:
                raise AuditError(f"mixed state {sid}: closed-form and pipeline distortion disagree at theta={t}")
        out.append({"state_id": sid, "d": rho.d, "rank": rank, "theta": t, "D_closed": d_closed,
                    "D_pipeline": d_pipe, "dst_residual": residual})
    return out


def run_mixed_campaign(cfg: ExperimentConfig) -> str:
    """Mixed-state weak-value distortion (closed form and pipeline) and strong-method residual."""
    cfg.validate()
    if cfg.states is not None:
        rhos = [s if isinstance(s, DensityMatrix) else as_state(s).projector() for s in cfg.states]
        ranks = [int(np.linalg.matrix_rank(np.asarray(r.matrix), tol=1e-10)) for r in rhos]
    else:
        if not 1 <= cfg.rank <= cfg.d:
            raise ConfigError(f"rank must satisfy 1 <= rank <= d, got {cfg.rank}")
        rhos = [random_density_matrix(cfg.d, cfg.rank, derive_seed(cfg.seed, 1, i)) for i in range(cfg.samples)]
        ranks = [cfg.rank] * len(rhos)
    tasks = [(i, np.asarray(r.matrix), k, tuple(cfg.thetas)) for i, (r, k) in enumerate(zip(rhos, ranks))]
    rows = [row for chunk in _pmap(_mixed_unit, tasks, cfg.workers) for row in chunk]
    text = render_csv("mixed", cfg, ("d", "rank", "thetas", "samples", "seed"), MIXED_COLUMNS, rows,
                      hints=("set xlabel 'theta'", "plot 'FILE' u 4:5 t 'D closed', '' u 4:6 t 'D pipeline'"))
    emit(text, cfg.output_path)
    return text


# single reconstruction ------------------------------------------------------

@dataclass
class SingleReport:
    method: Method
    theta: float
    momentum: int
    estimate: StateVector
    trace_distance: float
    psi_tilde_W: float
    sufficiency_ok: bool
    bound: float
    predicted: Optional[StateVector] = None
    predicted_D: Optional[float] = None

    def lines(self) -> list[str]:
        amps = " ".join(f"{z.real:+.12f}{z.imag:+.12f}j" for z in np.asarray(self.estimate.amplitudes))
        out = [
            f"method: {self.method.value}",
            f"theta: {fmt(self.theta)}",
            f"momentum: {self.momentum}",
            f"estimate: {amps}",
            f"trace_distance: {fmt(self.trace_distance)}",
            f"psi_tilde_W: {fmt(self.psi_tilde_W)}",
            f"sufficiency_ok: {fmt(self.sufficiency_ok)}",
            f"bound: {fmt(self.bound)}",
        ]
        if self.predicted_D is not None:
            out.append(f"predicted_D: {fmt(self.predicted_D)}")
        return out


def _momentum_phase(d: int, p: int) -> np.ndarray:
    y = np.arange(1, d + 1)
    return np.exp(-2j * np.pi * y * p / d)


def run_single_reconstruction(state, method: str, theta=None, shots: Optional[int] = None, seed=0,
                              momentum: int = 0, scheme=SamplingScheme.MULTINOMIAL) -> SingleReport:
    """Simulate one tomography run (exact or finite-shot) and reconstruct."""
    psi = as_state(state)
    d = psi.d
    try:
        m = Method(method.upper())
    except ValueError as exc:
        raise InvalidArgumentError(f"unknown method {method!r}; use dwt, dst or arbitrary") from exc
    p = int(momentum) % d
    shift = _momentum_phase(d, p)
    shifted = normalize_and_fix_phase(np.asarray(psi.amplitudes) * shift)
    if shifted.pathological:
        alternatives = [k for k in range(d) if abs(np.sum(np.asarray(psi.amplitudes) * _momentum_phase(d, k))) > 1e-9]
        hint = f"; e.g. --momentum {alternatives[0]}" if alternatives else ""
        raise DegenerateInputError(
            f"the amplitude sum vanishes for post-selection on momentum p={p}: direct tomography "
            f"cannot recover this state there; post-select on a different momentum state{hint}"
        )
    if m is Method.DST:
        t = HALF_PI
    elif theta is None:
        raise InvalidArgumentError(f"method {m.value} needs a theta")
    else:
        t = check_theta(theta)
    table = pointer_probability_table(psi, t, p)
    if shots is not None:
        nbases = 2 if m is Method.DWT else 3
        if int(shots) != shots or shots < nbases:
            raise InvalidArgumentError(f"shots must be an integer >= {nbases}")
        per_basis = int(shots) // nbases
        bases = DWT_BASES if m is Method.DWT else DST_BASES
        counts, _ = sample_table(table, per_basis, scheme, rng_from_seed(seed), bases)
        table = counts / per_basis
    result = dwt_estimate(table, t) if m is Method.DWT else arbitrary_theta_estimate(table, t)
    # undo the momentum relabelling: the estimator saw psi_y exp(-2 pi i y p / d)
    estimate = normalize_and_fix_phase(np.asarray(result.estimate.amplitudes) * shift.conj()) if p else result.estimate
    report = SingleReport(
        method=m, theta=t, momentum=p, estimate=estimate,
        trace_distance=trace_distance_pure(psi, estimate),
        psi_tilde_W=result.psi_tilde_W, sufficiency_ok=result.sufficiency_ok, bound=result.bound_value,
    )
    if m is Method.DWT:
        pred = dwt_closed_form(shifted, t)
        report.predicted = normalize_and_fix_phase(np.asarray(pred.amplitudes) * shift.conj()) if p else pred
        report.predicted_D = accuracy_D(shifted, t).D
    return report


__all__ = [
    "AuditError", "ExperimentConfig", "SingleReport", "derive_seed", "empirical_delta", "haar_pool",
    "run_accuracy_sweep", "run_mixed_campaign", "run_scatter", "run_shot_noise_validation",
    "run_single_reconstruction", "run_theta_means", "simulate_estimates",
]
