"""Closed-form accuracy and precision predictions.

Per-state functions take a phase-fixed state (arrays are phase-fixed on
the way in). The ``*_columns`` helpers evaluate the same expressions for
whole batches from the Born-weighted moments produced by
:func:`directwf._kernels.state_moments`.

Naming: ``norm_N`` is the normalizer of the weak-value estimate and
``shots`` the number of experimental repetitions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coupling import HALF_PI, check_theta, epsilon_theta
from .errors import DegenerateInputError, InvalidArgumentError
from .states import DensityMatrix, StateVector, as_density, as_state, wavefunction_stats


@dataclass(frozen=True)
class AccuracyReport:
    D: float
    D_approx: float
    psi_tilde_W: float
    bound: float
    theta: float


@dataclass(frozen=True)
class PrecisionReport:
    delta_psi_W: float
    delta_psi_S: float
    ratio: float
    ratio_bound: Optional[float]
    shots: int


def _check_shots(shots) -> int:
    if int(shots) != shots or shots < 1:
        raise InvalidArgumentError(f"shots must be a positive integer, got {shots!r}")
    return int(shots)


def dwt_closed_form(psi, theta) -> StateVector:
    """Weak-value estimate psi_x (psi_tilde - eps psi_x^*) / norm_N predicted from psi."""
    state = as_state(psi)
    t = check_theta(theta)
    eps = epsilon_theta(t)
    v = np.asarray(state.amplitudes)
    w = v * (state.psi_tilde - eps * v.conj())
    return StateVector(w / np.linalg.norm(w))


def dwt_error_bound(theta) -> float:
    """Largest trace distance compatible with a non-negative weak-value amplitude sum."""
    t = check_theta(theta)
    eps = epsilon_theta(t)
    r = math.sqrt(eps)
    return r / math.sqrt(2.0 - 4.0 * r + 3.0 * eps)


def accuracy_D(psi, theta) -> AccuracyReport:
    """Distortion of the weak-value estimate, its small-coupling approximation and the
    sufficiency indicator."""
    t = check_theta(theta)
    st = wavefunction_stats(psi, t)
    eps = st.eps_theta
    D = eps * st.sigma_psi / st.norm_N
    approx = eps * st.sigma_psi / st.psi_tilde if st.psi_tilde > 0 else math.inf
    return AccuracyReport(
        D=min(D, 1.0),
        D_approx=approx,
        psi_tilde_W=(st.psi_tilde**2 - eps) / st.norm_N,
        bound=dwt_error_bound(t),
        theta=t,
    )


def _born_moments(v: np.ndarray):
    p = v.real**2 + v.imag**2
    return p, v.real


def delta_psi_W(psi, theta, shots) -> float:
    """Asymptotic root-sum-square shot noise of the weak-value estimate.

    ``shots`` repetitions are split evenly over the two pointer bases and
    counts are taken as Poissonian.
    """
    state = as_state(psi)
    t = check_theta(theta)
    n = _check_shots(shots)
    st = wavefunction_stats(state, t)
    eps, pt, d = st.eps_theta, st.psi_tilde, state.d
    v = np.asarray(state.amplitudes)
    p, re = _born_moments(v)
    w2 = p * np.abs(pt - eps * v) ** 2 / st.norm_N**2
    extra = float(np.sum(w2 * (pt * re - p)))
    inner = (2 * d - 1) * pt**2 + 4 * eps * (1 - pt**2) + 2 * eps * extra
    return math.sqrt(d / (2 * n)) * math.sqrt(max(inner, 0.0)) / (math.sin(t) * st.norm_N)


def delta_psi_W_lower_bound(psi, theta, shots) -> float:
    """State-independent-ish lower bound on :func:`delta_psi_W` (needs only psi_tilde and norm_N)."""
    state = as_state(psi)
    t = check_theta(theta)
    n = _check_shots(shots)
    st = wavefunction_stats(state, t)
    eps, pt, d = st.eps_theta, st.psi_tilde, state.d
    inner = (2 * d - 1) * pt**2 + 2 * eps * (1 - pt - 2 * pt**2)
    return math.sqrt(d / (2 * n)) * math.sqrt(max(inner, 0.0)) / (math.sin(t) * st.norm_N)


def delta_psi_arbitrary(psi, theta, shots) -> float:
    """Asymptotic shot noise of the exact estimator at coupling ``theta`` (three bases)."""
    state = as_state(psi)
    t = check_theta(theta)
    n = _check_shots(shots)
    pt, d = state.psi_tilde, state.d
    if state.pathological or pt == 0.0:
        raise DegenerateInputError("shot noise of the exact estimator diverges for a zero amplitude sum")
    eps = epsilon_theta(t)
    v = np.asarray(state.amplitudes)
    p, re = _born_moments(v)
    m_re = float(np.sum(p * re))
    m_abs2 = float(np.sum(p * p))
    m_re2 = float(np.sum(p * re * re))
    inner = ((2 * d - 1) * pt**2 + 4 * eps * (1 + eps - pt**2)
             + 2 * eps * pt * m_re - 2 * eps * m_abs2 - 4 * eps**2 * m_re2)
    return math.sqrt(3 * d / (4 * n)) * math.sqrt(max(inner, 0.0)) / (pt * math.sin(t))


def delta_psi_S(psi, shots) -> float:
    """Asymptotic shot noise of the strong-coupling estimator."""
    return delta_psi_arbitrary(psi, HALF_PI, shots)


def delta_psi_S_upper_bound(psi, shots) -> float:
    state = as_state(psi)
    n = _check_shots(shots)
    pt, d = state.psi_tilde, state.d
    if state.pathological or pt == 0.0:
        raise DegenerateInputError("shot noise of the exact estimator diverges for a zero amplitude sum")
    inner = (2 * d - 5) * pt**2 + 2 * pt + 8 - 2 / d
    return math.sqrt(3 * d / (4 * n)) * math.sqrt(inner) / pt


def ratio_bound(psi, theta0, d: Optional[int] = None, *, exact: bool = False) -> Optional[float]:
    """Approximate upper bound on delta_psi_S / delta_psi_W.

    ``psi`` is a state or directly its amplitude sum (then ``d`` is
    required). ``exact=True`` keeps the norm_N / psi_tilde prefactor, which
    needs the full state. Returns ``None`` where the denominator is not
    positive and the bound does not apply.
    """
    t = check_theta(theta0)
    eps = epsilon_theta(t)
    if isinstance(psi, (int, float)) and not isinstance(psi, bool):
        if d is None:
            raise InvalidArgumentError("d is required when psi is given as an amplitude sum")
        if exact:
            raise InvalidArgumentError("exact mode needs the full state")
        pt, prefactor = float(psi), 1.0
    else:
        state = as_state(psi)
        d = state.d
        pt = state.psi_tilde
        prefactor = wavefunction_stats(state, t).norm_N / pt if exact and pt > 0 else 1.0
    num = (2 * d - 5) * pt**2 + 2 * pt + 8 - 2 / d
    den = (2 * d - 1) * pt**2 + 2 * eps * (1 - pt - 2 * pt**2)
    if den <= 0 or pt <= 0:
        return None
    return math.sin(t) * math.sqrt(1.5) * prefactor * math.sqrt(num / den)


def ratio_bound_large_psi(theta0, d: int) -> float:
    """Large amplitude-sum limit of :func:`ratio_bound`."""
    t = check_theta(theta0)
    return math.sin(t) * math.sqrt(1.5) * math.sqrt((2 * d - 5) / (2 * d - 1))


def psi_tilde_from_indicator(psi_tilde_W, theta):
    """Amplitude sum implied by the measured weak-value sum when norm_N ~ psi_tilde.

    Inverts psi_tilde_W ~ psi_tilde - eps / psi_tilde; used to draw the bound
    as a function of the measurable indicator.
    """
    eps = epsilon_theta(check_theta(theta))
    w = np.asarray(psi_tilde_W, dtype=float)
    return 0.5 * (w + np.sqrt(w * w + 4 * eps))


def precision_report(psi, theta0, shots) -> PrecisionReport:
    w = delta_psi_W(psi, theta0, shots)
    s = delta_psi_S(psi, shots)
    return PrecisionReport(w, s, s / w, ratio_bound(psi, theta0), _check_shots(shots))


def mixed_rho_W_closed_form(rho, theta) -> DensityMatrix:
    """Weak-value density matrix [rho + (cos theta - 1) diag(rho)] / cos theta."""
    rho = as_density(rho)
    t = check_theta(theta)
    c = math.cos(t)
    if c < 1e-12:
        raise InvalidArgumentError("the weak-value density matrix is singular at theta = pi/2")
    m = np.asarray(rho.matrix)
    diag = np.diag(np.diag(m))
    return DensityMatrix((m + (c - 1.0) * diag) / c, physical=False)


def mixed_accuracy_D(rho, theta) -> float:
    """(1 - cos theta) / (2 cos theta) * Tr|rho - diag(rho)|."""
    rho = as_density(rho)
    t = check_theta(theta)
    c = math.cos(t)
    if c < 1e-12:
        raise InvalidArgumentError("mixed-state distortion is undefined at theta = pi/2")
    m = np.asarray(rho.matrix)
    off = m - np.diag(np.diag(m))
    return (1.0 - c) / (2.0 * c) * float(np.abs(np.linalg.eigvalsh(off)).sum())


# batch evaluation from moment columns ------------------------------------

MOMENT_FIELDS = ("psi_tilde", "m_pr", "m_pi", "m_pp", "m_prr", "m_ppr", "m_ppp", "var")


def accuracy_columns(moments: np.ndarray, theta: float) -> dict:
    """D, its approximation, psi_tilde_W and sigma for every row of ``moments``."""
    eps = epsilon_theta(check_theta(theta))
    pt, m_pr, m_pp = moments[:, 0], moments[:, 1], moments[:, 3]
    norm2 = np.maximum(pt * pt - 2 * eps * pt * m_pr + eps * eps * m_pp, 0.0)
    norm_N = np.sqrt(norm2)
    sigma = np.sqrt(np.maximum(moments[:, 7], 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        D = np.minimum(eps * sigma / norm_N, 1.0)
        D_approx = np.where(pt > 0, eps * sigma / pt, np.inf)
        psi_tilde_W = (pt * pt - eps) / norm_N
    return {"norm_N": norm_N, "sigma": sigma, "D": D, "D_approx": D_approx, "psi_tilde_W": psi_tilde_W}


def precision_columns(moments: np.ndarray, d: int, theta0: float) -> dict:
    """sqrt(shots) * delta_psi_W at ``theta0`` and sqrt(shots) * delta_psi_S per row."""
    t = check_theta(theta0)
    eps = epsilon_theta(t)
    pt, m_pr, _, m_pp, m_prr, m_ppr, m_ppp = (moments[:, i] for i in range(7))
    norm2 = pt * pt - 2 * eps * pt * m_pr + eps * eps * m_pp
    extra = (pt**3 * m_pr - pt**2 * m_pp - 2 * eps * pt**2 * m_prr
             + (2 * eps + eps * eps) * pt * m_ppr - eps * eps * m_ppp) / norm2
    inner_w = (2 * d - 1) * pt**2 + 4 * eps * (1 - pt**2) + 2 * eps * extra
    inner_s = (2 * d - 5) * pt**2 + 8 - 2 * m_pp - 4 * m_prr + 2 * pt * m_pr
    with np.errstate(divide="ignore", invalid="ignore"):
        w = math.sqrt(d / 2) * np.sqrt(np.maximum(inner_w, 0.0)) / (math.sin(t) * np.sqrt(norm2))
        s = math.sqrt(3 * d / 4) * np.sqrt(np.maximum(inner_s, 0.0)) / pt
    return {"delta_W": w, "delta_S": s, "ratio": s / w}


def ratio_bound_columns(psi_tilde: np.ndarray, d: int, theta0: float) -> np.ndarray:
    """Vectorized :func:`ratio_bound` (NaN where it does not apply)."""
    eps = epsilon_theta(check_theta(theta0))
    pt = np.asarray(psi_tilde, dtype=float)
    num = (2 * d - 5) * pt**2 + 2 * pt + 8 - 2 / d
    den = (2 * d - 1) * pt**2 + 2 * eps * (1 - pt - 2 * pt**2)
    out = np.full(pt.shape, np.nan)
    ok = (den > 0) & (pt > 0)
    out[ok] = math.sin(theta0) * math.sqrt(1.5) * np.sqrt(num[ok] / den[ok])
    return out


__all__ = [
    "AccuracyReport", "PrecisionReport", "accuracy_D", "accuracy_columns", "delta_psi_S",
    "delta_psi_S_upper_bound", "delta_psi_W", "delta_psi_W_lower_bound", "delta_psi_arbitrary",
    "dwt_closed_form", "dwt_error_bound", "mixed_accuracy_D", "mixed_rho_W_closed_form",
    "precision_columns", "precision_report", "psi_tilde_from_indicator", "ratio_bound",
    "ratio_bound_columns", "ratio_bound_large_psi",
]
