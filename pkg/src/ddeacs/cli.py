"""Command-line front end: ``ddeacs {classify,acs,delays,spectrum,sl,verify}``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .acs import branches_to_csv, crossings_to_json, find_crossings, sample_branches
from .classify import ClassTag, classify
from .core import LinearDDE
from .delays import delay_sequences, double_hopf_search, sequences_to_json, unstable_dimension
from .errors import (BranchCollision, Degenerate, DegenerateFrequency, Inconclusive, InputError,
                     NoConvergence, NonTransverseCrossing, OnBifurcation, QuadratureStall,
                     ResidualCheckFailed, RootOnContour, StepTooLarge, Unclassified)
from .oracle import compute_spectrum, count_unstable, spectrum_vs_acs_distance
from .stuart_landau import SLParams, sl_branches, sl_hopf_sequence, sl_simulate
from .stuart_landau import branches_to_csv as sl_branches_to_csv

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INCONCLUSIVE = 2
EXIT_NUMERICAL = 3


def _omega_max(text: str):
    if text == "auto":
        return None
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a positive number or 'auto'") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("omega-max must be positive")
    return value


def _samples(text: str) -> int:
    n = int(text)
    if n < 64:
        raise argparse.ArgumentTypeError("--samples must be at least 64")
    return n


def _kmax(text: str) -> int:
    k = int(text)
    if k < 0:
        raise argparse.ArgumentTypeError("--kmax must be nonnegative")
    return k


def _load_system(args) -> LinearDDE:
    if getattr(args, "system", None):
        return LinearDDE.from_json(args.system)
    if getattr(args, "input", None):
        try:
            return LinearDDE.load(args.input)
        except OSError as exc:
            raise InputError(f"cannot read {args.input}: {exc}") from None
    raise InputError("no system given: use --input PATH or --system JSON")


def _emit(args, name: str, text: str) -> None:
    """Write to --out DIR/name when an output directory is set, else stdout."""
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_classify(args) -> int:
    verdict = classify(_load_system(args), args.omega_max, args.samples)
    _emit(args, "classify.json", verdict.to_json())
    return EXIT_OK


def cmd_acs(args) -> int:
    branches = sample_branches(_load_system(args), args.omega_max, args.samples)
    crossings = find_crossings(branches)
    if args.out:
        _emit(args, "acs_branches.csv", branches_to_csv(branches))
        _emit(args, "crossings.json", crossings_to_json(crossings))
    elif args.format == "csv":
        _emit(args, "", branches_to_csv(branches))
    else:
        _emit(args, "", crossings_to_json(crossings))
    return EXIT_OK


def cmd_delays(args) -> int:
    sysm = _load_system(args)
    verdict = classify(sysm, args.omega_max, args.samples)
    seqs = delay_sequences(sysm, args.kmax, verdict.crossings)
    d_u = None
    if args.tau is not None:
        d_u = unstable_dimension(sysm, args.tau, verdict)
    dh = None
    if len(seqs) >= 2:
        dh = double_hopf_search(seqs[0], seqs[1], args.kmax).matches
    _emit(args, "delays.json", sequences_to_json(seqs, args.tau, d_u, dh))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    if args.tau is None or not args.tau > 0:
        raise InputError("spectrum needs --tau > 0")
    sysm = _load_system(args)
    region = tuple(args.region) if args.region else None
    win = compute_spectrum(sysm, args.tau, args.N, region)
    branches = sample_branches(sysm, args.omega_max, args.samples) if sysm.B.any() else []
    dist = spectrum_vs_acs_distance(sysm, args.tau, branches)
    meta = {"tau": args.tau, "N": win.N, "roots": len(win.roots),
            "acs_distance": None if math.isinf(dist) else dist}
    if args.out:
        _emit(args, "spectrum.csv", win.to_csv())
        _emit(args, "spectrum.json", json.dumps(meta, indent=2))
    elif args.format == "csv":
        _emit(args, "", win.to_csv())
    else:
        meta["roots"] = [[lam.real, lam.imag, res] for lam, res in win.roots]
        _emit(args, "", json.dumps(meta, indent=2))
    return EXIT_OK


def cmd_sl(args) -> int:
    p = SLParams(args.alpha, args.beta)
    hopf = sl_hopf_sequence(p, args.kmax)
    branches = sl_branches(p, args.kmax, args.nphi)
    doc = {"alpha": p.alpha, "beta": p.beta, "notes": hopf.notes,
           "sequences": [s.to_dict() for s in hopf.sequences]}
    if args.out:
        _emit(args, "sl_hopf.json", json.dumps(doc, indent=2))
        _emit(args, "sl_branches.csv", sl_branches_to_csv(branches))
    elif args.format == "csv":
        _emit(args, "", sl_branches_to_csv(branches))
    else:
        _emit(args, "", json.dumps(doc, indent=2))
    if args.simulate:
        if args.tau is None:
            raise InputError("--simulate needs --tau")
        dt = args.dt if args.dt else args.tau / 40
        t_end = args.t_end if args.t_end else 40 * args.tau
        traj = sl_simulate(p, args.tau, complex(args.z0), t_end, dt)
        if args.out:
            _emit(args, "sl_trajectory.csv", traj.to_csv())
        else:
            _emit(args, "", traj.to_csv())
    return EXIT_OK


# -- verify -------------------------------------------------------------------

def _verify_system(name, sysm, rng, expected=None, n_tau=5):
    rows = []
    try:
        verdict = classify(sysm)
    except (Inconclusive, BranchCollision) as exc:
        return [(name, "classify", False, str(exc))]
    tag = verdict.tag.value
    if expected is not None:
        rows.append((name, "class", tag == expected, f"{tag} (expected {expected})"))
    for lemma, value in verdict.lemma_checks.items():
        if not isinstance(value, bool):
            continue
        if lemma in ("class1_scalar", "class1_2var_detB0"):
            ok = value == (verdict.tag is ClassTag.I)
        elif lemma == "class2_rotational":
            ok = value == (verdict.tag is ClassTag.II)
        elif lemma == "class3_detB0":
            ok = value == (verdict.tag is ClassTag.III)
        elif lemma == "class1_2var_necessary":
            ok = value or verdict.tag is not ClassTag.I or abs(np.linalg.det(sysm.B)) <= 1e-10
        else:
            ok = value or verdict.tag is not ClassTag.III
        rows.append((name, lemma, ok, str(value)))
    try:
        seqs = delay_sequences(sysm, 5, verdict.crossings)
        worst = max((max(s.residuals) for s in seqs if s.residuals), default=0.0)
        rows.append((name, "tau_k residual", True, f"{worst:.2e}"))
    except ResidualCheckFailed as exc:
        rows.append((name, "tau_k residual", False, str(exc)))
        seqs = []
    if verdict.tag is not ClassTag.OTHER:
        crit = np.array([t for s in seqs for t in s.taus])
        bad = []
        for tau in rng.uniform(0.05, 30.0, n_tau):
            if len(crit) and np.min(np.abs(crit - tau)) < 1e-2:
                continue
            try:
                du = unstable_dimension(sysm, float(tau), verdict)
                ref = count_unstable(sysm, float(tau), exclude_axis_roots=True)
            except (OnBifurcation, RootOnContour):
                continue
            if du != ref:
                bad.append(f"tau={tau:.4f}: {du} vs {ref}")
        rows.append((name, "D_u vs oracle", not bad, "; ".join(bad) or "agree"))
    return rows


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.input or args.system:
        targets = [("input", _load_system(args), None)]
    else:
        targets = [(k, v, catalog.EXPECTED_CLASS.get(k)) for k, v in catalog.SYSTEMS.items()]
    rows = []
    for name, sysm, expected in targets:
        rows.extend(_verify_system(name, sysm, rng, expected))
    width = max(len(f"{r[0]} / {r[1]}") for r in rows)
    for name, check, ok, detail in rows:
        label = f"{name} / {check}"
        print(f"{'PASS' if ok else 'FAIL'}  {label:<{width}}  {detail}")
    failed = sum(not r[2] for r in rows)
    print(f"{len(rows) - failed}/{len(rows)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="JSON file with keys A and B")
    common.add_argument("--system", help="inline JSON system, e.g. '{\"A\": [[-0.5]], \"B\": [[-1]]}'")
    common.add_argument("--omega-max", type=_omega_max, default=None,
                        help="frequency window half-width or 'auto' (default)")
    common.add_argument("--samples", type=_samples, default=1024)
    common.add_argument("--kmax", type=_kmax, default=10)
    common.add_argument("--tau", type=float, default=None)
    common.add_argument("--out", help="output directory (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="ddeacs",
                                description="Delay-induced stability changes of x' = A x + B x(t - tau).")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[common], help="universality class verdict")
    sub.add_parser("acs", parents=[common], help="ACS branches and crossings")
    sub.add_parser("delays", parents=[common], help="critical delay sequences")
    sp = sub.add_parser("spectrum", parents=[common], help="characteristic roots at --tau")
    sp.add_argument("--N", type=int, default=None, help="collocation order")
    sp.add_argument("--region", type=float, nargs=4, metavar=("RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"))
    sl = sub.add_parser("sl", parents=[common], help="Stuart-Landau Hopf points and branches")
    sl.add_argument("--alpha", type=float, required=True)
    sl.add_argument("--beta", type=float, required=True)
    sl.add_argument("--nphi", type=int, default=2000)
    sl.add_argument("--simulate", action="store_true", help="also integrate at --tau")
    sl.add_argument("--z0", type=complex, default=1e-3)
    sl.add_argument("--dt", type=float, default=None)
    sl.add_argument("--t-end", type=float, default=None)
    sub.add_parser("verify", parents=[common], help="cross-check suite with a pass/fail table")
    return p


COMMANDS = {
    "classify": cmd_classify,
    "acs": cmd_acs,
    "delays": cmd_delays,
    "spectrum": cmd_spectrum,
    "sl": cmd_sl,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (Inconclusive, Degenerate, DegenerateFrequency, Unclassified, OnBifurcation,
            NonTransverseCrossing) as exc:
        print(f"ddeacs: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (NoConvergence, RootOnContour, QuadratureStall, BranchCollision,
            ResidualCheckFailed) as exc:
        print(f"ddeacs: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (InputError, StepTooLarge, ValueError) as exc:
        print(f"ddeacs: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
