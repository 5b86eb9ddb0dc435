"""Command-line entry point: ``directwf <campaign> [options]``.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical
degeneracy (e.g. a state whose amplitude sum vanishes).
"""
from __future__ import annotations

import argparse
import math
import re
import sys

import numpy as np

from . import experiments as ex
from ._version import __version__
from .errors import ConfigError, DegenerateInputError, InvalidArgumentError
from .io import fmt, read_counts_csv, read_probability_csv, read_state_file, write_state_file
from .measurement import SamplingScheme
from .reconstruction import arbitrary_theta_estimate, dwt_estimate
from .states import DensityMatrix, trace_distance_pure

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_DEGENERATE = 0, 2, 3, 4

_PI_TOKEN = re.compile(r"^\s*(\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d*\.?\d+))?\s*$")


def parse_angle(text: str) -> float:
    """Float or a multiple of pi such as ``pi/2``, ``2pi/5``, ``0.5*pi``."""
    s = text.strip().lower()
    m = _PI_TOKEN.match(s)
    if m:
        coef = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / den
    try:
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def parse_grid(text: str) -> list[float]:
    return [parse_angle(tok) for tok in text.split(",") if tok.strip()]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, *, theta_default=None, samples=True, shots=False, reps=False):
    p.add_argument("--d", type=int, default=10, help="system dimension (default 10)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--theta", type=parse_angle, help="single coupling angle, e.g. 0.2 or pi/2")
    g.add_argument("--theta-grid", type=parse_grid, help="comma-separated angles")
    p.set_defaults(theta_default=theta_default)
    if samples:
        p.add_argument("--samples", type=int, default=None, help=f"number of random states (default {ex.DESK_SAMPLES})")
        p.add_argument("--full", action="store_true", help=f"use {ex.FULL_SAMPLES} states")
    if shots:
        p.add_argument("--shots", type=int, default=1_000_000, help="total shots per reconstruction")
    if reps:
        p.add_argument("--reps", type=int, default=200, help="repetitions per state and method")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="output CSV (default stdout)")
    p.add_argument("--gnuplot-hints", action="store_true", help="add '# gnuplot:' comment lines")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="directwf", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"directwf {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("accuracy-sweep", help="p_W and p_D per theta")
    _common(p, theta_default=list(ex.DEFAULT_THETA_GRID))

    p = sub.add_parser("scatter", help="per-state accuracy and precision at one theta")
    _common(p, theta_default=[0.2], shots=True)

    p = sub.add_parser("theta-means", help="mean precision ratio and distortion per theta")
    _common(p, theta_default=list(ex.DEFAULT_THETA_GRID))

    p = sub.add_parser("shot-noise", help="empirical vs predicted shot noise")
    _common(p, theta_default=[0.2], shots=True, reps=True)
    p.set_defaults(samples_default=5)
    p.add_argument("--state", help="fixed state file instead of random states")
    p.add_argument("--scheme", choices=[s.value for s in SamplingScheme], default=SamplingScheme.POISSON.value)

    p = sub.add_parser("mixed", help="mixed-state distortion and strong-method residual")
    _common(p, theta_default=[0.2, math.pi / 3, math.pi / 2])
    p.set_defaults(samples_default=20)
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--state", help="fixed state file (vector or matrix) instead of random states")

    p = sub.add_parser("reconstruct", help="reconstruct one state")
    p.add_argument("--state", help="true state (JSON); probabilities are simulated from it")
    p.add_argument("--probs", help="probability CSV to reconstruct from")
    p.add_argument("--counts", help="count CSV to reconstruct from")
    p.add_argument("--method", choices=["dwt", "dst", "arbitrary"], default="dwt")
    p.add_argument("--theta", type=parse_angle, default=None)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="use exact probabilities (default)")
    mode.add_argument("--shots", type=int, help="simulate this many shots in total")
    p.add_argument("--scheme", choices=[s.value for s in SamplingScheme], default=SamplingScheme.MULTINOMIAL.value)
    p.add_argument("--momentum", type=int, default=0, help="momentum state used for post-selection")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-state", help="write the estimate as a state file")
    return ap


def _config(args) -> ex.ExperimentConfig:
    thetas = [args.theta] if args.theta is not None else (args.theta_grid or args.theta_default)
    if args.full:
        samples = ex.FULL_SAMPLES
    elif args.samples is not None:
        samples = args.samples
    else:
        samples = getattr(args, "samples_default", ex.DESK_SAMPLES)
    cfg = ex.ExperimentConfig(
        d=args.d, thetas=thetas, samples=samples, seed=args.seed, workers=args.workers,
        output_path=args.out, gnuplot_hints=args.gnuplot_hints,
    )
    for name in ("shots", "reps", "rank", "scheme"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if getattr(args, "state", None):
        state = read_state_file(args.state)
        cfg.states = [state]
        cfg.d = state.d
    return cfg


def _reconstruct(args) -> int:
    sources = [s for s in (args.state, args.probs, args.counts) if s]
    if len(sources) != 1:
        raise ConfigError("give exactly one of --state, --probs or --counts")
    if args.state:
        state = read_state_file(args.state)
        if isinstance(state, DensityMatrix):
            raise ConfigError("reconstruct takes a pure state; use the 'mixed' command for density matrices")
        rep = ex.run_single_reconstruction(
            state, args.method, args.theta, shots=args.shots, seed=args.seed,
            momentum=args.momentum, scheme=args.scheme,
        )
        lines = rep.lines()
        if rep.predicted is not None:
            lines.append("predicted_estimate: " + " ".join(
                f"{z.real:+.12f}{z.imag:+.12f}j" for z in np.asarray(rep.predicted.amplitudes)))
            lines.append(f"predicted_vs_estimate: {fmt(trace_distance_pure(rep.predicted, rep.estimate))}")
        estimate = rep.estimate
    else:
        if args.probs:
            rows = read_probability_csv(args.probs)
        else:
            rows = [c.estimated_probabilities() for c in read_counts_csv(args.counts)]
        if not rows:
            raise InvalidArgumentError("no probability rows found")
        theta = args.theta
        if theta is None:
            theta = rows[0].theta
        if args.method == "dst":
            theta = math.pi / 2
        if theta is None or not math.isfinite(theta):
            raise ConfigError("--theta is required when the input does not carry it")
        fn = dwt_estimate if args.method == "dwt" else arbitrary_theta_estimate
        res = fn(rows, theta)
        estimate = res.estimate
        amps = " ".join(f"{z.real:+.12f}{z.imag:+.12f}j" for z in np.asarray(estimate.amplitudes))
        lines = [f"method: {res.method.value}", f"theta: {fmt(res.theta)}", f"estimate: {amps}",
                 f"psi_tilde_W: {fmt(res.psi_tilde_W)}", f"sufficiency_ok: {fmt(res.sufficiency_ok)}",
                 f"bound: {fmt(res.bound_value)}"]
    sys.stdout.write("\n".join(lines) + "\n")
    if args.out_state:
        write_state_file(args.out_state, estimate)
    return EXIT_OK


_CAMPAIGNS = {
    "accuracy-sweep": ex.run_accuracy_sweep,
    "scatter": ex.run_scatter,
    "theta-means": ex.run_theta_means,
    "shot-noise": ex.run_shot_noise_validation,
    "mixed": ex.run_mixed_campaign,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors, --help and --version
        return int(exc.code or 0)
    try:
        if args.command == "reconstruct":
            return _reconstruct(args)
        _CAMPAIGNS[args.command](_config(args))
        return EXIT_OK
    except (DegenerateInputError, ex.AuditError) as exc:
        print(f"directwf: numerical error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except InvalidArgumentError as exc:
        print(f"directwf: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"directwf: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
