"""Coupling unitary, pointer-outcome probabilities and finite-shot sampling.

The system is a ``d``-level position register and the pointer a qubit,
initially ``|0>``. The coupling ``U_x(theta) = exp(-i theta |x><x| (x) sigma_y)``
rotates the pointer when the system sits at ``x``. After the coupling the
system is post-selected on a momentum state

    |p> = d**-0.5 * sum_y exp(2 pi i y p / d) |y>,      p = 0..d-1,

and the pointer is measured in one of three bases. Outcome labels and the
column order used everywhere (arrays, CSV) are ``0, 1, +, -, L, R``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .coupling import check_theta, epsilon_theta
from .errors import InvalidArgumentError
from .states import as_density, as_state, normalize_and_fix_phase, rng_from_seed

OUTCOMES = ("0", "1", "+", "-", "L", "R")
_COLUMN = {label: i for i, label in enumerate(OUTCOMES)}

_S2 = 1.0 / math.sqrt(2.0)
POINTER_STATES = {
    "0": np.array([1.0, 0.0], dtype=np.complex128),
    "1": np.array([0.0, 1.0], dtype=np.complex128),
    "+": np.array([_S2, _S2], dtype=np.complex128),
    "-": np.array([_S2, -_S2], dtype=np.complex128),
    "L": np.array([_S2, 1j * _S2], dtype=np.complex128),
    "R": np.array([_S2, -1j * _S2], dtype=np.complex128),
}

# basis name -> the two outcome labels it resolves
BASES = {"01": ("0", "1"), "+-": ("+", "-"), "LR": ("L", "R")}
DWT_BASES = ("+-", "LR")
DST_BASES = ("+-", "LR", "01")

_SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]])


class SamplingScheme(str, enum.Enum):
    MULTINOMIAL = "multinomial-with-discard"
    POISSON = "poisson"


def _check_x(d: int, x: int) -> int:
    if int(x) != x or not 1 <= x <= d:
        raise InvalidArgumentError(f"position index x must be in 1..{d}, got {x!r}")
    return int(x)


def _check_p(d: int, p: int) -> int:
    if int(p) != p:
        raise InvalidArgumentError(f"momentum index must be an integer, got {p!r}")
    return int(p) % d


def momentum_state(d: int, p: int = 0) -> np.ndarray:
    """Amplitudes of ``|p>`` over positions 1..d."""
    y = np.arange(1, d + 1)
    return np.exp(2j * np.pi * y * p / d) / math.sqrt(d)


def coupling_unitary(d: int, x: int, theta) -> np.ndarray:
    """2d x 2d matrix of U_x(theta) on system (x) pointer.

    Row/column index ``2 * (y - 1) + k`` addresses ``|y>|k>``.
    """
    if int(d) != d or d < 1:
        raise InvalidArgumentError(f"dimension must be a positive integer, got {d!r}")
    x = _check_x(d, x)
    t = check_theta(theta, allow_zero=True)
    proj = np.zeros((d, d))
    proj[x - 1, x - 1] = 1.0
    # exp(-i t sigma_y) - 1 restricted to the pointer
    rot = math.cos(t) * np.eye(2) - 1j * math.sin(t) * _SIGMA_Y - np.eye(2)
    return np.eye(2 * d, dtype=np.complex128) + np.kron(proj, rot)


@dataclass(frozen=True)
class PointerProbabilities:
    """Joint probabilities of momentum post-selection and a pointer outcome."""

    p0: float
    p1: float
    p_plus: float
    p_minus: float
    pL: float
    pR: float
    x: int = 0
    p: int = 0
    theta: float = float("nan")

    def as_array(self) -> np.ndarray:
        return np.array([self.p0, self.p1, self.p_plus, self.p_minus, self.pL, self.pR])

    @classmethod
    def from_array(cls, row, x: int = 0, p: int = 0, theta: float = float("nan")):
        r = [float(v) for v in row]
        return cls(*r, x=x, p=p, theta=theta)

    def __getitem__(self, label: str) -> float:
        return float(self.as_array()[_COLUMN[label]])

    def basis_sums(self) -> tuple[float, float, float]:
        """Post-selection probability as seen from each pointer basis."""
        return (self.p0 + self.p1, self.p_plus + self.p_minus, self.pL + self.pR)


def _closed_form_table(v: np.ndarray, theta: float) -> np.ndarray:
    """(d, 6) outcome probabilities for a phase-fixed state at momentum 0."""
    d = v.size
    pt = abs(v.sum())
    eps = epsilon_theta(theta)
    s = math.sin(theta)
    re, im = v.real, v.imag
    a2 = re * re + im * im
    pt2 = pt * pt
    out = np.empty((d, 6))
    out[:, 0] = pt2 - 2 * eps * pt * re + eps * eps * a2
    out[:, 1] = s * s * a2
    out[:, 2] = 0.5 * pt2 - (eps - s) * pt * re + (1 - s) * eps * a2
    out[:, 3] = 0.5 * pt2 - (eps + s) * pt * re + (1 + s) * eps * a2
    # the circular pair carries sin(theta) on both outcomes
    common = 0.5 * pt2 + eps * (a2 - pt * re)
    out[:, 4] = common + s * pt * im
    out[:, 5] = common - s * pt * im
    out /= d
    # rounding can leave -1e-18 where a probability is exactly zero
    np.maximum(out, 0.0, out=out)
    return out


def _shift_momentum(psi, p: int):
    state = as_state(psi)
    if p == 0:
        return state
    d = state.d
    y = np.arange(1, d + 1)
    return normalize_and_fix_phase(np.asarray(state.amplitudes) * np.exp(-2j * np.pi * y * p / d))


def pointer_probability_table(psi, theta, p: int = 0) -> np.ndarray:
    """Closed-form outcome probabilities for every x, shape (d, 6)."""
    state = as_state(psi)
    t = check_theta(theta, allow_zero=True)
    shifted = _shift_momentum(state, _check_p(state.d, p))
    return _closed_form_table(np.asarray(shifted.amplitudes), t)


def exact_pointer_probabilities(psi, x: int, theta, p: int = 0) -> PointerProbabilities:
    """Closed-form pointer probabilities for one coupling position ``x``.

    For ``p != 0`` the state is mapped to ``psi_y exp(-2 pi i y p / d)`` and
    re-phase-fixed, which turns post-selection on ``|p>`` into
    post-selection on ``|p=0>``.
    """
    state = as_state(psi)
    x = _check_x(state.d, x)
    t = check_theta(theta, allow_zero=True)
    table = pointer_probability_table(state, t, p)
    return PointerProbabilities.from_array(table[x - 1], x=x, p=_check_p(state.d, p), theta=t)


def exact_pointer_probabilities_oracle(psi, x: int, theta, p: int = 0) -> PointerProbabilities:
    """Brute-force probabilities from the full 2d-dimensional evolved state."""
    v = np.asarray(as_state(psi).amplitudes)
    d = v.size
    x = _check_x(d, x)
    t = check_theta(theta, allow_zero=True)
    p = _check_p(d, p)
    u = coupling_unitary(d, x, t)
    initial = np.kron(v, POINTER_STATES["0"])
    evolved = (u @ initial).reshape(d, 2)
    pointer = momentum_state(d, p).conj() @ evolved
    probs = [abs(np.vdot(POINTER_STATES[j], pointer)) ** 2 for j in OUTCOMES]
    return PointerProbabilities(*probs, x=x, p=p, theta=t)


def povm_elements(d: int, x: int, theta, outcome: str) -> np.ndarray:
    """Kraus-like operator E_j with P_j = Tr[E_j^dag E_j |psi><psi|] at momentum 0.

    These six operators describe post-selected outcomes and do not sum to
    the identity.
    """
    if outcome not in POINTER_STATES:
        raise InvalidArgumentError(f"unknown outcome {outcome!r}; expected one of {OUTCOMES}")
    x = _check_x(d, x)
    t = check_theta(theta, allow_zero=True)
    e = POINTER_STATES[outcome]
    alpha = e[0].conjugate()
    beta = e[1].conjugate()
    gamma = ((1 - math.cos(t)) * alpha - math.sin(t) * beta) / math.sqrt(d)
    p0 = momentum_state(d, 0)
    ex = np.zeros(d)
    ex[x - 1] = 1.0
    return alpha * np.outer(p0, p0.conj()) - gamma * np.outer(p0, ex)


@dataclass(frozen=True)
class PointerDensity:
    """Unnormalized pointer state left after post-selecting momentum ``p``.

    Its trace is the post-selection probability.
    """

    matrix: np.ndarray
    x: int
    p: int
    theta: float

    @property
    def rho00(self) -> complex:
        return complex(self.matrix[0, 0])

    @property
    def rho01(self) -> complex:
        return complex(self.matrix[0, 1])

    @property
    def rho10(self) -> complex:
        return complex(self.matrix[1, 0])

    @property
    def rho11(self) -> complex:
        return complex(self.matrix[1, 1])

    def probabilities(self) -> PointerProbabilities:
        m = self.matrix
        probs = [float(np.vdot(POINTER_STATES[j], m @ POINTER_STATES[j]).real) for j in OUTCOMES]
        probs = [max(q, 0.0) for q in probs]
        return PointerProbabilities(*probs, x=self.x, p=self.p, theta=self.theta)


def pointer_density_mixed(rho, x: int, p: int, theta) -> PointerDensity:
    """Closed-form 2x2 pointer matrix for a mixed input state."""
    rho = as_density(rho)
    m = np.asarray(rho.matrix)
    d = rho.d
    x = _check_x(d, x)
    p = _check_p(d, p)
    t = check_theta(theta, allow_zero=True)
    eps = epsilon_theta(t)
    s = math.sin(t)
    y = np.arange(1, d + 1)
    row_phase = np.exp(2j * np.pi * (y - x) * p / d)
    row_sum = complex(np.sum(m[x - 1] * row_phase))
    all_phase = np.exp(2j * np.pi * np.subtract.outer(y, y).T * p / d)  # e^{2 pi i (b - a) p / d}
    total = complex(np.sum(m * all_phase))
    rxx = m[x - 1, x - 1].real
    r00 = (total.real - eps * 2.0 * row_sum.real + eps * eps * rxx) / d
    r10 = s * (row_sum - eps * rxx) / d
    r11 = s * s * rxx / d
    mat = np.array([[r00, np.conj(r10)], [r10, r11]], dtype=np.complex128)
    return PointerDensity(mat, x=x, p=p, theta=t)


def pointer_density_mixed_oracle(rho, x: int, p: int, theta) -> PointerDensity:
    """Same quantity from explicit evolution of rho (x) |0><0| and projection on |p>."""
    rho = as_density(rho)
    d = rho.d
    x = _check_x(d, x)
    p = _check_p(d, p)
    t = check_theta(theta, allow_zero=True)
    u = coupling_unitary(d, x, t)
    full = np.kron(np.asarray(rho.matrix), np.outer(POINTER_STATES["0"], POINTER_STATES["0"]))
    evolved = u @ full @ u.conj().T
    k = np.kron(momentum_state(d, p).conj()[None, :], np.eye(2))  # <p| (x) 1
    return PointerDensity(k @ evolved @ k.conj().T, x=x, p=p, theta=t)


@dataclass(frozen=True)
class ShotCounts:
    """Outcome counts for one coupling position.

    ``discarded`` holds, per basis, the trials in which momentum
    post-selection failed; under the multinomial scheme counts plus discards
    add up to ``trials_per_basis`` for every basis.
    """

    counts: dict
    trials_per_basis: int
    scheme: SamplingScheme
    discarded: dict = field(default_factory=dict)
    x: int = 0
    p: int = 0
    theta: float = float("nan")

    def __post_init__(self):
        if self.trials_per_basis < 1:
            raise InvalidArgumentError("trials_per_basis must be >= 1")
        if any(int(n) != n or n < 0 for n in self.counts.values()):
            raise InvalidArgumentError("counts must be non-negative integers")
        if self.scheme == SamplingScheme.MULTINOMIAL:
            for basis, dropped in self.discarded.items():
                a, b = BASES[basis]
                if self.counts[a] + self.counts[b] + dropped != self.trials_per_basis:
                    raise InvalidArgumentError(f"basis {basis} counts do not sum to trials")

    @property
    def bases(self) -> tuple[str, ...]:
        return tuple(b for b, pair in BASES.items() if pair[0] in self.counts)

    def estimated_probabilities(self) -> PointerProbabilities:
        """Relative frequencies n_j / trials_per_basis; unmeasured outcomes read 0."""
        row = [self.counts.get(j, 0) / self.trials_per_basis for j in OUTCOMES]
        return PointerProbabilities(*row, x=self.x, p=self.p, theta=self.theta)


def _basis_columns(bases) -> list[tuple[str, int, int]]:
    cols = []
    for b in bases:
        if b not in BASES:
            raise InvalidArgumentError(f"unknown basis {b!r}; expected one of {tuple(BASES)}")
        first, second = BASES[b]
        cols.append((b, _COLUMN[first], _COLUMN[second]))
    return cols


def sample_table(table, trials_per_basis: int, scheme, rng: np.random.Generator, bases=DST_BASES):
    """Vectorized sampler over any leading shape of a ``(..., 6)`` probability array.

    Returns ``(counts, discarded)`` with shapes ``(..., 6)`` and
    ``(..., len(bases))``; unmeasured outcomes get zero counts.
    """
    scheme = SamplingScheme(scheme)
    probs = np.asarray(table, dtype=float)
    if probs.shape[-1] != 6:
        raise InvalidArgumentError("probability table must have 6 outcome columns")
    if int(trials_per_basis) != trials_per_basis or trials_per_basis < 1:
        raise InvalidArgumentError(f"trials_per_basis must be a positive integer, got {trials_per_basis!r}")
    if np.any(probs < -1e-12) or not np.all(np.isfinite(probs)):
        raise InvalidArgumentError("probabilities must be finite and non-negative")
    probs = np.clip(probs, 0.0, None)
    n = int(trials_per_basis)
    cols = _basis_columns(bases)
    counts = np.zeros(probs.shape, dtype=np.int64)
    discarded = np.zeros(probs.shape[:-1] + (len(cols),), dtype=np.int64)
    for k, (name, i, j) in enumerate(cols):
        pair = probs[..., [i, j]]
        kept = pair.sum(axis=-1)
        if np.any(kept > 1.0 + 1e-9):
            raise InvalidArgumentError(f"probabilities in basis {name} sum above 1")
        if scheme is SamplingScheme.POISSON:
            drawn = rng.poisson(n * pair)
            counts[..., i] = drawn[..., 0]
            counts[..., j] = drawn[..., 1]
        else:
            pvals = np.concatenate([pair, np.clip(1.0 - kept, 0.0, None)[..., None]], axis=-1)
            pvals /= pvals.sum(axis=-1, keepdims=True)
            drawn = rng.multinomial(n, pvals)
            counts[..., i] = drawn[..., 0]
            counts[..., j] = drawn[..., 1]
            discarded[..., k] = drawn[..., 2]
    return counts, discarded


def sample_counts(probs: PointerProbabilities, trials_per_basis: int,
                  scheme=SamplingScheme.MULTINOMIAL, seed=0, bases=DST_BASES) -> ShotCounts:
    """Simulate ``trials_per_basis`` runs in each requested pointer basis."""
    scheme = SamplingScheme(scheme)
    rng = rng_from_seed(seed)
    counts, discarded = sample_table(probs.as_array(), trials_per_basis, scheme, rng, bases)
    measured = {lab: int(counts[_COLUMN[lab]]) for b in bases for lab in BASES[b]}
    dropped = {}
    if scheme is SamplingScheme.MULTINOMIAL:
        dropped = {b: int(discarded[k]) for k, b in enumerate(bases)}
    return ShotCounts(measured, int(trials_per_basis), scheme, dropped,
                      x=probs.x, p=probs.p, theta=probs.theta)


def mixed_probability_grid(rho, theta) -> np.ndarray:
    """Outcome probabilities for every (x, p), shape (d, d, 6), indexed [x-1, p]."""
    rho = as_density(rho)
    d = rho.d
    t = check_theta(theta, allow_zero=True)
    grid = np.empty((d, d, 6))
    for x in range(1, d + 1):
        for p in range(d):
            grid[x - 1, p] = pointer_density_mixed(rho, x, p, t).probabilities().as_array()
    return grid


__all__ = [
    "BASES", "DST_BASES", "DWT_BASES", "OUTCOMES", "POINTER_STATES",
    "PointerDensity", "PointerProbabilities", "SamplingScheme", "ShotCounts",
    "coupling_unitary", "exact_pointer_probabilities", "exact_pointer_probabilities_oracle",
    "momentum_state", "mixed_probability_grid", "pointer_density_mixed",
    "pointer_density_mixed_oracle", "pointer_probability_table", "povm_elements",
    "sample_counts", "sample_table",
]
