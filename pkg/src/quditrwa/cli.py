"""Command-line front end.

    quditrwa spectrum  --config dev.json --nmax 2
    quditrwa sweep     --config dev.json --target 'qudit[1].transmon.EJ' --from 14 --to 19 --steps 201
    quditrwa rwa-check --config jc.json --from 0 --to 1 --steps 101 [--angular]
    quditrwa tc        --freq 7 --couplings 0.1,0.12
    quditrwa evolve    --config jc.json --state '1 @ |0;1>' --t0 0 --t1 31.4 --dt 0.01

CSV goes to ``--out`` (or stdout); comment lines start with '#'. Exit codes:
0 success, 1 usage or configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import JCParams, PerturbationPole, rwa_second_order, tc_one_excitation, tc_sector, tc_system
from .assembly import to_csv_rows
from .eigen import ConvergenceError, sector_spectrum, spectrum
from .evolution import build_propagator, evolve, expectation, parse_observable, parse_state_spec, required_n_max
from .model import SpecError, load_device
from .sweep import SweepSpec, gap_report, run_sweep


class UsageError(Exception):
    pass


def fmt(x) -> str:
    return format(float(x), ".17g")


def fmt_n(N: Fraction) -> str:
    return fmt(float(N))


def human(x) -> str:
    return format(float(x), ".6g")


def config_hash(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


class Output:
    """Collects comment lines and CSV rows, then writes them in one go."""

    def __init__(self, command: str, payload: dict):
        self.buf = io.StringIO()
        self.writer = csv.writer(self.buf, lineterminator="\n")
        self.comment(f"quditrwa {__version__} command={command} config-sha256={config_hash(payload)}")

    def comment(self, text: str):
        for line in text.splitlines() or [""]:
            self.buf.write(f"# {line}\n")

    def row(self, values):
        self.writer.writerow(values)

    def text(self, line: str):
        self.buf.write(line + "\n")

    def flush(self, out: str | None):
        data = self.buf.getvalue()
        if out:
            Path(out).write_text(data)
        else:
            sys.stdout.write(data)


def _device(path):
    if not path:
        raise UsageError("--config is required")
    return load_device(path)


# --------------------------------------------------------------------------- #
#                                  commands                                   #
# --------------------------------------------------------------------------- #

def cmd_spectrum(args) -> Output:
    raw, spec = _device(args.config)
    n_max = Fraction(args.nmax)
    out = Output("spectrum", {"device": raw, "nmax": str(n_max)})
    out.row(["N", "nu", "E", "dominant", "dominant_weight", "coefficients"])
    spectra = spectrum(spec, n_max)
    for sp in spectra:
        labels = [s.label for s in sp.sector.states]
        for nu, E in enumerate(sp.energies):
            c = sp.eig.eigenvectors[:, nu]
            w = c * c
            top = int(np.argmax(w))
            breakdown = " ".join(f"{lab}:{fmt(x)}" for lab, x in zip(labels, c))
            out.row([fmt_n(sp.N), nu + 1, fmt(E), labels[top], fmt(w[top]), breakdown])
    if args.dump_matrices:
        d = Path(args.dump_matrices)
        d.mkdir(parents=True, exist_ok=True)
        for sp in spectra:
            name = d / f"sector_N{fmt_n(sp.N)}.csv"
            with name.open("w", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerows(to_csv_rows(sp.matrix))
    return out


def cmd_sweep(args) -> Output:
    raw, _ = _device(args.config)
    sweep = SweepSpec(args.target, args.start, args.stop, args.steps)
    n_max = Fraction(args.nmax)
    out = Output("sweep", {"device": raw, "target": args.target, "from": args.start,
                           "to": args.stop, "steps": args.steps, "nmax": str(n_max)})
    result = run_sweep(raw, sweep, n_max, jobs=args.jobs)
    header = ["value"]
    if result.derived is not None:
        header.append(f"f01[{sweep.qudit_index}]")
    for N, E in result.energies.items():
        header += [f"E[{fmt_n(N)}][{nu + 1}]" for nu in range(E.shape[1])]
    out.row(header)
    for j, v in enumerate(result.values):
        row = [fmt(v)]
        if result.derived is not None:
            row.append(fmt(result.derived[j]))
        for E in result.energies.values():
            row += [fmt(x) for x in E[j]]
        out.row(row)
    for N, rep in gap_report(raw, result, refine=not args.no_refine).items():
        g = rep["min_gap"]
        out.comment(
            f"gap N={fmt_n(N)} min_gap={fmt(g.gap)} at={fmt(g.value)} "
            f"levels={g.pair[0] + 1},{g.pair[1] + 1} avoided_crossings={len(rep['avoided'])} "
            f"bare_intersections={len(rep['bare'])}"
        )
    return out


def cmd_rwa_check(args) -> Output:
    raw, spec = _device(args.config)
    if spec.n_qudits != 1 or spec.n_resonators != 1 or spec.qudits[0].dimension != 2:
        raise UsageError("rwa-check needs a device with one qubit and one resonator")
    f_q = spec.qudits[0].gaps()[0]
    f_r = spec.resonators[0].freq
    grid = np.linspace(args.start, args.stop, args.steps)
    out = Output("rwa-check", {"device": raw, "from": args.start, "to": args.stop,
                               "steps": args.steps, "angular": args.angular, "nmax": args.nmax})
    if args.angular:
        out.comment("angular convention: w = 2*pi*f for qubit and resonator, g as given")
    out.row(["g", "level", "E_rwa", "dE2", "relative_percent"])
    worst = {}
    for g in grid:
        p = JCParams.from_frequencies(f_q, f_r, g) if args.angular else JCParams(f_q, f_r, g)
        for c in rwa_second_order(p, n_max=args.nmax):
            rel = 100.0 * c.relative
            out.row([fmt(g), c.label, fmt(c.E_rwa), fmt(c.shift), fmt(rel)])
            worst[c.label] = max(worst.get(c.label, 0.0), abs(rel))
    for label, w in worst.items():
        out.comment(f"max |relative| {label}: {human(w)} %")
    return out


def cmd_tc(args) -> Output:
    try:
        couplings = [float(x) for x in args.couplings.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse --couplings {args.couplings!r}") from None
    if not couplings:
        raise UsageError("--couplings needs at least one value")
    sol = tc_one_excitation(args.freq, couplings)
    spec = tc_system(args.freq, couplings)
    sp = sector_spectrum(tc_sector(len(couplings)), spec)
    H = sp.matrix.entries
    E_an, V_an = sol.eigenpairs()
    res = max(float(np.linalg.norm(H @ V_an[:, j] - E_an[j] * V_an[:, j])) for j in range(len(E_an)))
    dev = float(np.abs(np.sort(E_an) - sp.energies).max())
    dark_sum = max((abs(float(d[1:] @ np.asarray(couplings))) for d in sol.dark), default=0.0)
    out = Output("tc", {"freq": args.freq, "couplings": couplings})
    K = sol.K
    out.text(f"K = {K}")
    out.text(f"omega_K = {human(sol.omega_K)}")
    out.text(f"mean_coupling = {human(sol.mean_coupling)}")
    out.text(f"E_dark = {human(sol.E_dark)}  (dark-space dimension {len(sol.dark) if not sol.degenerate else K + 1})")
    out.text(f"E_minus = {human(sol.E_minus)}")
    out.text(f"E_plus = {human(sol.E_plus)}")
    out.text(f"splitting = {human(sol.splitting)}  (2*sqrt(K)*g_mean = {human(2 * math.sqrt(K) * sol.mean_coupling)})")
    out.text("numeric = " + " ".join(human(x) for x in sp.energies))
    out.text(f"max |analytic - numeric| = {dev:.3e}")
    out.text(f"max residual |H v - E v| = {res:.3e}")
    out.text(f"max |sum_k d_k g_k| over dark vectors = {dark_sum:.3e}")
    return out


def _time_grid(t0, t1, dt):
    if dt <= 0:
        raise UsageError("--dt must be positive")
    if t1 < t0:
        raise UsageError("--t1 must not be smaller than --t0")
    steps = (t1 - t0) / dt
    n = int(round(steps))
    if abs(steps - n) > 1e-9 * max(1.0, steps):
        raise UsageError("(t1 - t0) must be an integer multiple of dt")
    return n


def cmd_evolve(args) -> Output:
    raw, spec = _device(args.config)
    if not args.state:
        raise UsageError("--state is required")
    state = parse_state_spec(args.state, spec)
    n_max = Fraction(args.nmax) if args.nmax is not None else required_n_max(state)
    if n_max < required_n_max(state):
        raise UsageError(f"--nmax {n_max} is below the state's highest sector {required_n_max(state)}")
    steps = _time_grid(args.t0, args.t1, args.dt)
    if args.observe:
        observables = [parse_observable(o) for o in args.observe]
    else:
        observables = [parse_observable("energy"), parse_observable("excitation_number")]
        observables += [parse_observable(f"photon_number({p})") for p in range(spec.n_resonators)]
        observables += [
            parse_observable(f"level_population({k},{m})")
            for k, q in enumerate(spec.qudits) for m in range(1, q.dimension)
        ]
    prop = build_propagator(spec, n_max, args.dt)
    traj = evolve(state, prop, steps)
    out = Output("evolve", {"device": raw, "state": args.state, "t0": args.t0, "t1": args.t1,
                            "dt": args.dt, "nmax": str(n_max),
                            "observe": [o.name for o in observables], "amplitudes": args.amplitudes})
    header = ["t"] + [o.name for o in observables]
    basis = [s for s, _ in state.items()]
    if args.amplitudes:
        for s in basis:
            header += [f"re{s.label}", f"im{s.label}"]
    out.row(header)
    for j, psi in enumerate(traj):
        row = [fmt(args.t0 + j * args.dt)] + [fmt(expectation(psi, o)) for o in observables]
        if args.amplitudes:
            for _, a in psi.items():
                row += [fmt(a.real), fmt(a.imag)]
        out.row(row)
    return out


# --------------------------------------------------------------------------- #
#                                  parser                                     #
# --------------------------------------------------------------------------- #

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="quditrwa", description="RWA sector solver for qudits coupled to resonators")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="device JSON file")
        p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("spectrum", help="eigenpairs of every sector up to --nmax")
    common(p)
    p.add_argument("--nmax", required=True, help="highest excitation number (e.g. 2 or 3/2)")
    p.add_argument("--dump-matrices", metavar="DIR", help="also write each sector matrix as CSV")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", help="sector spectra along a parameter grid")
    common(p)
    p.add_argument("--target", required=True)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--nmax", default="0")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--no-refine", action="store_true", help="report grid minima only")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rwa-check", help="second-order counter-rotating shifts for one qubit")
    common(p)
    p.add_argument("--from", dest="start", type=float, default=0.0)
    p.add_argument("--to", dest="stop", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--nmax", type=int, default=3, help="highest strip index")
    p.add_argument("--angular", action="store_true",
                   help="treat device frequencies as f and use w = 2*pi*f (g unchanged)")
    p.set_defaults(func=cmd_rwa_check)

    p = sub.add_parser("tc", help="resonant K-qubit one-excitation check")
    common(p, config=False)
    p.add_argument("--freq", type=float, required=True)
    p.add_argument("--couplings", required=True, help="comma-separated g_1,...,g_K")
    p.set_defaults(func=cmd_tc)

    p = sub.add_parser("evolve", help="time evolution by spectral decomposition")
    common(p)
    p.add_argument("--state", required=True, help="e.g. '1 @ |0;1>' or '0.6 @ |1;0> + 0.8j @ |0;1>'")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--nmax", default=None)
    p.add_argument("--observe", action="append", help="repeatable; e.g. 'photon_number(0)'")
    p.add_argument("--amplitudes", action="store_true", help="add re/im amplitude columns")
    p.set_defaults(func=cmd_evolve)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "steps", 3) < 2:
        sys.stderr.write("quditrwa: error: --steps must be at least 2\n")
        return 1
    try:
        out = args.func(args)
        out.flush(args.out)
    except (ConvergenceError, PerturbationPole, FloatingPointError) as exc:
        sys.stderr.write(f"quditrwa: numerical failure: {exc}\n")
        return 2
    except (UsageError, SpecError, ValueError, KeyError, OSError) as exc:
        sys.stderr.write(f"quditrwa: error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
