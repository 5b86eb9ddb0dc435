"""Pure-numpy implementation of the batch moment kernel."""
import numpy as np

PATHOLOGICAL_TOL = 1e-12


def state_moments(z: np.ndarray) -> np.ndarray:
    """Born-weighted moments of every row of ``z`` after normalizing and phase-fixing it.

    Columns: psi_tilde, sum p Re(psi), sum p Im(psi), sum p^2, sum p Re(psi)^2,
    sum p^2 Re(psi), sum p^3, sum p |psi - <psi>|^2 with p = |psi_x|^2 and
    <psi> = sum p psi. The last column is accumulated around the mean so it
    stays accurate for nearly flat states.
    """
    z = np.asarray(z, dtype=np.complex128)
    norm = np.sqrt(np.einsum("ij,ij->i", z.real, z.real) + np.einsum("ij,ij->i", z.imag, z.imag))
    total = z.sum(axis=1)
    mod = np.abs(total)
    pt = mod / norm
    phase = np.ones_like(total)
    fixed = pt > PATHOLOGICAL_TOL
    phase[fixed] = total[fixed].conj() / mod[fixed]
    psi = z * (phase / norm)[:, None]
    re, im = psi.real, psi.imag
    p = re * re + im * im
    pp = p * p
    out = np.empty((z.shape[0], 8))
    out[:, 0] = pt
    out[:, 1] = np.sum(p * re, axis=1)
    out[:, 2] = np.sum(p * im, axis=1)
    out[:, 3] = np.sum(pp, axis=1)
    out[:, 4] = np.sum(p * re * re, axis=1)
    out[:, 5] = np.sum(pp * re, axis=1)
    out[:, 6] = np.sum(pp * p, axis=1)
    mean = out[:, 1] + 1j * out[:, 2]
    out[:, 7] = np.sum(p * np.abs(psi - mean[:, None]) ** 2, axis=1)
    return out
