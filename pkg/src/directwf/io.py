"""State files (JSON) and CSV tables for probabilities, counts and diagnostics.

State document layouts::

    {"d": 2, "amplitudes": [[re, im], [re, im]]}
    {"d": 2, "rows": [[[re, im], [re, im]], [[re, im], [re, im]]]}
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import InvalidArgumentError
from .measurement import BASES, PointerProbabilities, SamplingScheme, ShotCounts
from .reconstruction import ReconstructionResult
from .states import DensityMatrix, StateVector, as_density, normalize_and_fix_phase

PROBABILITY_COLUMNS = ("x", "p", "theta", "P0", "P1", "Pplus", "Pminus", "PL", "PR")
COUNT_COLUMNS = ("x", "basis", "outcome", "count", "trials")
DIAGNOSTIC_COLUMNS = ("method", "theta", "psi_tilde_W", "sufficiency_ok", "bound_value")

_DISCARD = "discard"


def _reject_constant(name):
    raise InvalidArgumentError(f"non-finite number {name} in state file")


def _pairs_to_complex(pairs, what: str) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.shape[-1:] != (2,):
        raise InvalidArgumentError(f"{what} entries must be [re, im] pairs")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{what} contains NaN or Inf")
    return arr[..., 0] + 1j * arr[..., 1]


def _complex_to_pairs(values) -> list:
    v = np.asarray(values, dtype=np.complex128)
    return np.stack([v.real, v.imag], axis=-1).tolist()


def parse_state_document(text: str):
    """Parse a state document into a :class:`StateVector` or :class:`DensityMatrix`."""
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"malformed state file: {exc}") from exc
    if not isinstance(doc, dict) or "d" not in doc:
        raise InvalidArgumentError("state file must be an object with a 'd' field")
    d = doc["d"]
    if not isinstance(d, int) or d < 1:
        raise InvalidArgumentError(f"'d' must be a positive integer, got {d!r}")
    if "amplitudes" in doc:
        amps = _pairs_to_complex(doc["amplitudes"], "amplitudes")
        if amps.shape != (d,):
            raise InvalidArgumentError(f"expected {d} amplitudes, got {amps.shape[0] if amps.ndim else 0}")
        try:
            state = StateVector(amps)
        except InvalidArgumentError:
            return normalize_and_fix_phase(amps)
        # keep already-valid vectors bit for bit
        return state if state.phase_fixed else normalize_and_fix_phase(state)
    if "rows" in doc:
        mat = _pairs_to_complex(doc["rows"], "rows")
        if mat.shape != (d, d):
            raise InvalidArgumentError(f"expected a {d}x{d} matrix, got shape {mat.shape[:2]}")
        return DensityMatrix(mat)
    raise InvalidArgumentError("state file needs either 'amplitudes' or 'rows'")


def state_document(state) -> str:
    if isinstance(state, StateVector):
        doc = {"d": state.d, "amplitudes": _complex_to_pairs(state.amplitudes)}
    else:
        rho = state if isinstance(state, DensityMatrix) else as_density(state)
        doc = {"d": rho.d, "rows": _complex_to_pairs(rho.matrix)}
    return json.dumps(doc, allow_nan=False)


def read_state_file(path):
    return parse_state_document(Path(path).read_text())


def write_state_file(path, state) -> None:
    Path(path).write_text(state_document(state) + "\n")


def fmt(value) -> str:
    """Deterministic CSV rendering: shortest round-trip repr, NA for missing values."""
    if value is None:
        return "NA"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return repr(v) if math.isfinite(v) else "NA"
    return str(value)


def write_probability_csv(path, rows: Iterable[PointerProbabilities]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROBABILITY_COLUMNS)
        for r in rows:
            w.writerow([fmt(r.x), fmt(r.p), fmt(r.theta)] + [fmt(float(v)) for v in r.as_array()])


def read_probability_csv(path) -> list[PointerProbabilities]:
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(row for row in fh if not row.startswith("#")):
            try:
                vals = [float(rec[c]) for c in PROBABILITY_COLUMNS[3:]]
                theta = float(rec["theta"])
                x, p = int(rec["x"]), int(rec["p"])
            except (KeyError, TypeError, ValueError) as exc:
                raise InvalidArgumentError(f"bad probability row {rec}: {exc}") from exc
            if not all(math.isfinite(v) for v in vals + [theta]):
                raise InvalidArgumentError(f"non-finite value in probability row {rec}")
            out.append(PointerProbabilities(*vals, x=x, p=p, theta=theta))
    return out


def write_counts_csv(path, rows: Iterable[ShotCounts]) -> None:
    """One line per (x, basis, outcome); discarded trials use outcome 'discard'."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COUNT_COLUMNS)
        for sc in rows:
            for basis in sc.bases:
                for lab in BASES[basis]:
                    w.writerow([sc.x, basis, lab, sc.counts[lab], sc.trials_per_basis])
                if basis in sc.discarded:
                    w.writerow([sc.x, basis, _DISCARD, sc.discarded[basis], sc.trials_per_basis])


def read_counts_csv(path, theta: float = float("nan")) -> list[ShotCounts]:
    per_x: dict = {}
    with open(path, newline="") as fh:
        for rec in csv.DictReader(row for row in fh if not row.startswith("#")):
            try:
                x, basis, lab = int(rec["x"]), rec["basis"], rec["outcome"]
                n, trials = int(rec["count"]), int(rec["trials"])
            except (KeyError, TypeError, ValueError) as exc:
                raise InvalidArgumentError(f"bad count row {rec}: {exc}") from exc
            if basis not in BASES or (lab != _DISCARD and lab not in BASES[basis]):
                raise InvalidArgumentError(f"unknown basis/outcome {basis}/{lab}")
            slot = per_x.setdefault(x, {"counts": {}, "discarded": {}, "trials": trials})
            if trials != slot["trials"]:
                raise InvalidArgumentError(f"inconsistent trial counts for x={x}")
            if lab == _DISCARD:
                slot["discarded"][basis] = n
            else:
                slot["counts"][lab] = n
    out = []
    for x in sorted(per_x):
        slot = per_x[x]
        scheme = SamplingScheme.MULTINOMIAL if slot["discarded"] else SamplingScheme.POISSON
        out.append(ShotCounts(slot["counts"], slot["trials"], scheme, slot["discarded"], x=x, theta=theta))
    return out


def write_diagnostics_csv(path, results: Iterable[ReconstructionResult]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DIAGNOSTIC_COLUMNS)
        for r in results:
            w.writerow([r.method.value, fmt(r.theta), fmt(r.psi_tilde_W), fmt(r.sufficiency_ok), fmt(r.bound_value)])
