"""Estimators that turn pointer statistics into states.

All pure-state estimators read a ``(d, 6)`` table of outcome probabilities
(exact or relative frequencies) indexed by coupling position and build

    psi_x = (A_x + i B_x) / M,        M = sqrt(sum_x A_x**2 + B_x**2),

with ``B_x = P_L - P_R`` and a method-dependent ``A_x``. Overall
proportionality constants never need to be known; normalization absorbs them.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .analysis import dwt_error_bound
from .coupling import HALF_PI, check_theta
from .errors import DegenerateInputError, InvalidArgumentError
from .measurement import PointerProbabilities
from .states import DensityMatrix, StateVector

DEGENERATE_SCALE = 1e-9


class Method(str, enum.Enum):
    DWT = "DWT"
    DST = "DST"
    ARBITRARY = "ARBITRARY"
    MIXED_DWT = "MIXED_DWT"
    MIXED_DST = "MIXED_DST"


@dataclass(frozen=True)
class ReconstructionResult:
    estimate: Union[StateVector, DensityMatrix]
    method: Method
    theta: float
    psi_tilde_W: float
    sufficiency_ok: bool
    bound_value: float


def _as_table(probs) -> np.ndarray:
    if isinstance(probs, np.ndarray) or (
        isinstance(probs, Sequence) and probs and not isinstance(probs[0], PointerProbabilities)
    ):
        table = np.asarray(probs, dtype=float)
    else:
        rows = list(probs)
        if any(r.x for r in rows):
            xs = sorted(r.x for r in rows)
            if xs != list(range(1, len(rows) + 1)):
                raise InvalidArgumentError(f"need exactly one probability set per x = 1..{len(rows)}")
            rows.sort(key=lambda r: r.x)
        table = np.array([r.as_array() for r in rows])
    if table.ndim != 2 or table.shape[1] != 6 or table.shape[0] < 2:
        raise InvalidArgumentError(f"probability table must have shape (d, 6) with d >= 2, got {table.shape}")
    if not np.all(np.isfinite(table)):
        raise InvalidArgumentError("probability table contains non-finite entries")
    return table


def _normalize(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    m = math.sqrt(float(np.sum(a * a + b * b)))
    if m < DEGENERATE_SCALE * a.size:
        raise DegenerateInputError(
            "reconstruction coefficients vanish; the amplitude sum of the state is zero for "
            "this post-selection (switch to a different momentum state)"
        )
    return (a + 1j * b) / m, m


def _weak_indicator(table: np.ndarray) -> float:
    a = table[:, 2] - table[:, 3]
    b = table[:, 4] - table[:, 5]
    m = math.sqrt(float(np.sum(a * a + b * b)))
    return float(a.sum() / m) if m > 0 else 0.0


def dwt_estimate(probs, theta) -> ReconstructionResult:
    """Weak-value estimate from the diagonal and circular pointer bases.

    The phase of the result is the one set by the estimator itself, so its
    amplitude sum ``psi_tilde_W`` may be negative; a non-negative sum is the
    measurable condition under which the distortion bound applies.
    """
    table = _as_table(probs)
    t = check_theta(theta)
    a = table[:, 2] - table[:, 3]
    b = table[:, 4] - table[:, 5]
    est, m = _normalize(a, b)
    return ReconstructionResult(
        estimate=StateVector(est),
        method=Method.DWT,
        theta=t,
        psi_tilde_W=float(a.sum() / m),
        sufficiency_ok=bool(a.sum() >= 0),
        bound_value=dwt_error_bound(t),
    )


def arbitrary_theta_estimate(probs, theta) -> ReconstructionResult:
    """Exact estimate at any coupling using the extra |1> outcome."""
    table = _as_table(probs)
    t = check_theta(theta)
    a = table[:, 2] - table[:, 3] + 2.0 * math.tan(0.5 * t) * table[:, 1]
    b = table[:, 4] - table[:, 5]
    est, _ = _normalize(a, b)
    return ReconstructionResult(
        estimate=StateVector(est),
        method=Method.DST if t == HALF_PI else Method.ARBITRARY,
        theta=t,
        psi_tilde_W=_weak_indicator(table),
        sufficiency_ok=True,
        bound_value=0.0,
    )


def dst_estimate(probs) -> ReconstructionResult:
    """Strong-coupling (theta = pi/2) estimate: A_x = P_+ - P_- + 2 P_1."""
    return arbitrary_theta_estimate(probs, HALF_PI)


def pointer_tomography(probs: PointerProbabilities) -> tuple[complex, float]:
    """Off-diagonal ``<1|rho_P|0>`` and population ``<1|rho_P|1>`` of the pointer.

    ``rho_10 = ((P_+ - P_-) + i (P_L - P_R)) / 2``; the opposite sign of the
    imaginary part would return ``rho_01`` instead.
    """
    rho10 = 0.5 * complex(probs.p_plus - probs.p_minus, probs.pL - probs.pR)
    return rho10, float(probs.p1)


def pointer_tables(grid) -> tuple[np.ndarray, np.ndarray]:
    """Split a ``(d, d, 6)`` probability grid, indexed [x-1, p], into rho_10 and rho_11 tables."""
    g = np.asarray(grid, dtype=float)
    if g.ndim != 3 or g.shape[0] != g.shape[1] or g.shape[2] != 6:
        raise InvalidArgumentError(f"probability grid must have shape (d, d, 6), got {g.shape}")
    rho10 = 0.5 * ((g[..., 2] - g[..., 3]) + 1j * (g[..., 4] - g[..., 5]))
    return rho10, g[..., 1].copy()


def _momentum_sum(rho10: np.ndarray) -> np.ndarray:
    """sum_p exp(2 pi i (x - y) p / d) rho_10(x, p) for all x, y."""
    d = rho10.shape[0]
    k = np.arange(1, d + 1)
    p = np.arange(d)
    fwd = np.exp(2j * np.pi * np.outer(k, p) / d)  # [x, p]
    return (rho10 * fwd) @ fwd.conj().T


def _check_grid(table, d=None, name="rho_10") -> np.ndarray:
    t = np.asarray(table)
    if t.ndim != 2 or t.shape[0] != t.shape[1] or (d is not None and t.shape[0] != d):
        raise InvalidArgumentError(f"{name} table must cover the full (x, p) grid, got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise InvalidArgumentError(f"{name} table is incomplete (non-finite entries)")
    return t


def _finish_mixed(mat: np.ndarray) -> DensityMatrix:
    mat = 0.5 * (mat + mat.conj().T)
    tr = float(np.trace(mat).real)
    if abs(tr) < DEGENERATE_SCALE * mat.shape[0]:
        raise DegenerateInputError("reconstructed matrix has vanishing trace and cannot be normalized")
    return DensityMatrix(mat / tr, physical=False)


def mixed_dwt_estimate(rho10, theta) -> ReconstructionResult:
    """Weak-value density matrix from the rho_10 table over all (x, p)."""
    t = check_theta(theta)
    r10 = _check_grid(rho10).astype(np.complex128)
    est = _finish_mixed(_momentum_sum(r10))
    return ReconstructionResult(est, Method.MIXED_DWT, t, float("nan"), True, float("nan"))


def mixed_dst_estimate(rho10, rho11, theta) -> ReconstructionResult:
    """Exact density matrix from rho_10 plus the |1> population, for any theta.

    ``rho11`` may be given per x (shape ``(d,)``) or per (x, p); in the latter
    case the p-independent value is estimated by averaging over p.
    """
    t = check_theta(theta)
    r10 = _check_grid(rho10).astype(np.complex128)
    d = r10.shape[0]
    r11 = np.asarray(rho11, dtype=float)
    if r11.ndim == 2:
        r11 = _check_grid(r11, d, "rho_11").mean(axis=1)
    if r11.shape != (d,) or not np.all(np.isfinite(r11)):
        raise InvalidArgumentError(f"rho_11 must have shape ({d},) or ({d}, {d})")
    mat = _momentum_sum(r10) + d * math.tan(0.5 * t) * np.diag(r11)
    est = _finish_mixed(mat)
    return ReconstructionResult(est, Method.MIXED_DST, t, float("nan"), True, 0.0)
