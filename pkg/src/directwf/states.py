"""Pure and mixed state representations, Haar sampling and distances.

Conventions
-----------
Position basis indices run over ``x = 1..d`` in the public API and map to
array slot ``x - 1``. A pure state is stored with its global phase chosen so
that the amplitude sum ``psi_tilde = sum_x psi_x`` is real and non-negative.
States whose amplitude sum vanishes (``|psi_tilde| <= 1e-12``) are kept
as-is and carry ``pathological=True``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coupling import check_theta, epsilon_theta
from .errors import InvalidArgumentError

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
PATHOLOGICAL_TOL = 1e-12


def _seed_sequence(seed) -> np.random.SeedSequence:
    # accept any 64-bit integer, signed or not
    return np.random.SeedSequence(int(seed) & 0xFFFF_FFFF_FFFF_FFFF)


def rng_from_seed(seed, *spawn_key: int) -> np.random.Generator:
    """Generator for ``seed`` and an optional sub-stream key."""
    ss = _seed_sequence(seed)
    if spawn_key:
        ss = np.random.SeedSequence(ss.entropy, spawn_key=tuple(int(k) for k in spawn_key))
    return np.random.default_rng(ss)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state.

    Build phase-fixed instances with :func:`normalize_and_fix_phase`. The
    constructor only checks normalization and records whether the amplitude
    sum already satisfies the phase convention (``phase_fixed``); estimates
    such as the weak-value reconstruction carry their own phase and need not.
    """

    amplitudes: np.ndarray
    pathological: bool = field(default=False, init=False)
    phase_fixed: bool = field(default=False, init=False)

    def __post_init__(self):
        amps = _readonly(self.amplitudes)
        if amps.ndim != 1 or amps.size < 2:
            raise InvalidArgumentError("a state vector needs a 1-D array of length >= 2")
        if not np.all(np.isfinite(amps)):
            raise InvalidArgumentError("amplitudes must be finite")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InvalidArgumentError(f"state is not normalized (|psi|^2 = {norm2!r})")
        total = amps.sum()
        pathological = abs(total) <= PATHOLOGICAL_TOL
        fixed = pathological or (abs(total.imag) <= 1e-12 and total.real >= 0)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "pathological", bool(pathological))
        object.__setattr__(self, "phase_fixed", bool(fixed))

    @property
    def d(self) -> int:
        return self.amplitudes.size

    @property
    def psi_tilde(self) -> float:
        """Modulus of the amplitude sum (the sum itself once phase-fixed)."""
        return float(abs(self.amplitudes.sum()))

    def __len__(self) -> int:
        return self.d

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def projector(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace d x d matrix.

    ``physical=False`` skips the positivity check; reconstructed weak-value
    matrices are legitimately non-positive.
    """

    matrix: np.ndarray
    physical: bool = True

    def __post_init__(self):
        m = _readonly(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InvalidArgumentError(f"density matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidArgumentError("density matrix entries must be finite")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise InvalidArgumentError("density matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidArgumentError(f"density matrix trace is {tr!r}, expected 1")
        if self.physical and np.linalg.eigvalsh(m)[0] < -PSD_TOL:
            raise InvalidArgumentError("density matrix is not positive semidefinite")
        object.__setattr__(self, "matrix", m)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True)
class WavefunctionStats:
    """Born-weighted moments of a state that enter the weak-value closed forms."""

    psi_tilde: float
    mean_psi: complex
    mean_abs2: float
    sigma_psi: float
    eps_theta: float
    norm_N: float


def normalize_and_fix_phase(raw) -> StateVector:
    """Normalize ``raw`` and rotate its global phase so the amplitude sum is >= 0.

    Vectors whose amplitude sum is below 1e-12 in modulus keep their phase
    and come back flagged as pathological.
    """
    if isinstance(raw, StateVector):
        if raw.phase_fixed:
            return raw
        raw = raw.amplitudes
    v = np.asarray(raw, dtype=np.complex128).ravel()
    if v.size < 2:
        raise InvalidArgumentError("state dimension must be >= 2")
    if not np.all(np.isfinite(v)):
        raise InvalidArgumentError("amplitudes must be finite")
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise InvalidArgumentError("cannot normalize the zero vector")
    v = v / norm
    total = v.sum()
    if abs(total) > PATHOLOGICAL_TOL:
        v = v * (total.conjugate() / abs(total))
        # renormalize once more to absorb rounding from the rotation
        v = v / np.linalg.norm(v)
    return StateVector(v)


def as_state(psi) -> StateVector:
    """Coerce arrays (or states) to a phase-fixed :class:`StateVector`."""
    if isinstance(psi, StateVector) and psi.phase_fixed:
        return psi
    return normalize_and_fix_phase(psi)


def as_density(rho) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    if isinstance(rho, StateVector):
        return rho.projector()
    return DensityMatrix(np.asarray(rho))


def haar_random_state(d: int, seed) -> StateVector:
    """Haar-distributed pure state in dimension ``d``, deterministic in ``seed``."""
    if int(d) != d or d < 2:
        raise InvalidArgumentError(f"dimension must be an integer >= 2, got {d!r}")
    rng = rng_from_seed(seed)
    z = rng.standard_normal(int(d)) + 1j * rng.standard_normal(int(d))
    return normalize_and_fix_phase(z)


def haar_batch(rng: np.random.Generator, m: int, d: int) -> np.ndarray:
    """``m`` unnormalized complex Gaussian rows; normalizing a row gives a Haar state.

    Draws are consumed row by row, so the first k rows do not depend on ``m``.
    """
    return rng.standard_normal((m, 2 * d)).view(np.complex128)


def random_density_matrix(d: int, rank: int, seed) -> DensityMatrix:
    """Random rank-``rank`` state: partial trace of a Haar state on C^d x C^rank."""
    if int(d) != d or d < 1:
        raise InvalidArgumentError(f"dimension must be a positive integer, got {d!r}")
    if int(rank) != rank or not 1 <= rank <= d:
        raise InvalidArgumentError(f"rank must satisfy 1 <= rank <= d, got {rank!r}")
    rng = rng_from_seed(seed)
    g = rng.standard_normal((int(d), int(rank))) + 1j * rng.standard_normal((int(d), int(rank)))
    g /= np.linalg.norm(g)
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real)


def trace_distance_pure(a, b) -> float:
    """Trace distance sqrt(1 - |<a|b>|^2) between two pure states.

    Evaluated as the norm of the component of ``b`` orthogonal to ``a``,
    which avoids the cancellation in ``1 - |<a|b>|^2`` for nearby states.
    """
    va = np.asarray(as_state(a).amplitudes)
    vb = np.asarray(as_state(b).amplitudes)
    if va.shape != vb.shape:
        raise InvalidArgumentError(f"dimension mismatch: {va.size} vs {vb.size}")
    overlap = np.vdot(va, vb)
    perp = vb - overlap * va
    return float(min(1.0, np.linalg.norm(perp)))


def trace_distance_mixed(a, b) -> float:
    """Half the trace norm of ``a - b`` for Hermitian matrices."""
    ma = np.asarray(a.matrix if isinstance(a, DensityMatrix) else a, dtype=np.complex128)
    mb = np.asarray(b.matrix if isinstance(b, DensityMatrix) else b, dtype=np.complex128)
    if ma.shape != mb.shape or ma.ndim != 2:
        raise InvalidArgumentError(f"shape mismatch: {ma.shape} vs {mb.shape}")
    diff = ma - mb
    if np.max(np.abs(diff - diff.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise InvalidArgumentError("difference of the arguments is not Hermitian")
    diff = 0.5 * (diff + diff.conj().T)
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())


def wavefunction_stats(psi, theta) -> WavefunctionStats:
    """Moments of ``psi`` under the weights p_x = |psi_x|^2, plus the normalizer of the
    weak-value estimate at coupling ``theta``."""
    state = as_state(psi)
    t = check_theta(theta, allow_zero=True)
    eps = epsilon_theta(t)
    v = np.asarray(state.amplitudes)
    p = v.real**2 + v.imag**2
    pt = state.psi_tilde
    mean_psi = complex(np.sum(p * v))
    mean_abs2 = float(np.sum(p * p))
    # two-pass weighted variance; non-negative by construction
    var = float(np.sum(p * np.abs(v - mean_psi) ** 2))
    norm_N = math.sqrt(float(np.sum(p * np.abs(pt - eps * v) ** 2)))
    return WavefunctionStats(
        psi_tilde=pt,
        mean_psi=mean_psi,
        mean_abs2=mean_abs2,
        sigma_psi=math.sqrt(var),
        eps_theta=eps,
        norm_N=norm_N,
    )
