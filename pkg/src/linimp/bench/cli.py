"""Command line interface ``linimp``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from ..auxvars import build_aux, consistency_defect
from ..errors import ConfigError, LinimpError
from ..fields import star_mesh, write_mesh
from ..integrate import method_from_spec, parse_complex
from ..stability import classify, stability_function
from ..tableau import collocation_tableau, cooper_defect, parse_nodes, registry
from .harness import (
    ExperimentConfig,
    convergence_study,
    emit_csv,
    emit_invariants_csv,
    invariant_study,
    resonant_steps,
    sorted_records,
)

PROBLEM_FLAGS = {
    "q": float,
    "alpha": float,
    "c": float,
    "x0": float,
    "left": float,
    "right": float,
    "M": int,
    "K": int,
    "R": float,
    "refine": int,
}


def parse_float(text: str) -> float:
    text = text.strip()
    if "^" in text:
        base, _, exp = text.partition("^")
        return float(base) ** float(exp)
    if "/" in text:
        num, _, den = text.partition("/")
        return float(num) / float(den)
    return float(text)


def parse_steps(text: str) -> list[float]:
    """``a..b/n`` gives n geometrically spaced steps from a to b; otherwise a comma list."""
    text = text.strip()
    if ".." in text:
        lo, _, rest = text.partition("..")
        hi, sep, n = rest.rpartition("/")
        if not sep:
            raise argparse.ArgumentTypeError(f"step range {text!r} needs a point count: a..b/n")
        count = int(n)
        if count < 1:
            raise argparse.ArgumentTypeError("point count must be positive")
        a, b = parse_float(lo), parse_float(hi)
        if count == 1:
            return [a]
        return [float(x) for x in np.geomspace(a, b, count)]
    return [parse_float(t) for t in text.split(",") if t.strip()]


def parse_int_range(text: str) -> list[int]:
    if ".." in text:
        lo, _, hi = text.partition("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in text.split(",") if t.strip()]


def read_config(path) -> dict[str, str]:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{n}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _add_problem_flags(p: argparse.ArgumentParser) -> None:
    for name, typ in PROBLEM_FLAGS.items():
        p.add_argument(f"--{name}", type=typ, default=None, help=f"problem parameter {name}")


def _problem_params(args) -> dict:
    return {k: getattr(args, k) for k in PROBLEM_FLAGS if getattr(args, k, None) is not None}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="linimp", description="Linearly implicit time integrators and benchmarks.")
    ap.add_argument("--config", help="key=value file mirroring the command-line flags")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tableau", help="print a collocation tableau")
    p.add_argument("name", nargs="?", help="registry name")
    p.add_argument("--nodes", help="comma separated nodes, fractions allowed")
    p.add_argument("--digits", type=int, default=12)

    p = sub.add_parser("stability", help="classify a registry tableau")
    p.add_argument("name")
    p.add_argument("--json", action="store_true", help="machine readable report")

    p = sub.add_parser("aux", help="build the auxiliary update (D, Theta)")
    p.add_argument("--nodes", required=True)
    p.add_argument("--eigs", required=True, help="comma separated, e.g. 0.5,-0.5 or i/2,-i/2")

    p = sub.add_parser("mesh", help="write the hexagram mesh")
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--refine", type=int, default=0)
    p.add_argument("--out", required=True)

    for name, helptext in (("converge", "convergence study"), ("efficiency", "CPU time against error")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--problem", required=True, choices=["soliton1d", "nlh1d", "nonlocal", "star2d"])
        p.add_argument("--methods", nargs="+", required=True)
        p.add_argument("--T", type=parse_float, required=True)
        p.add_argument("--hs", type=parse_steps, required=True)
        p.add_argument("--norm", choices=["final", "max"], default="final")
        p.add_argument("--reference", choices=["auto", "exact", "cached"], default="auto")
        p.add_argument("--out")
        p.add_argument("--check-residuals", action="store_true")
        _add_problem_flags(p)

    p = sub.add_parser("resonance", help="nonlocal problem at resonant steps 1/(alpha k^2)")
    p.add_argument("--method", default="li:fiveStageNotASI")
    p.add_argument("--modes", type=parse_int_range, default=parse_int_range("1..30"))
    p.add_argument("--alpha", type=parse_float, default=3 * np.sqrt(7) / 56)
    p.add_argument("--T", type=parse_float, default=1.0)
    p.add_argument("--K", type=int, default=30)
    p.add_argument("--out")
    p.add_argument("--check-residuals", action="store_true")

    p = sub.add_parser("invariants", help="mass and energy deviation series")
    p.add_argument("--problem", default="star2d", choices=["soliton1d", "nlh1d", "nonlocal", "star2d"])
    p.add_argument("--methods", nargs="+", default=["li:gauss2:eig=0.5,-0.5", "li:trapezoid2:eig=0.5,-0.5", "cn"])
    p.add_argument("--h", type=parse_float, required=True)
    p.add_argument("--T", type=parse_float, default=0.01)
    p.add_argument("--out")
    p.add_argument("--check-residuals", action="store_true")
    _add_problem_flags(p)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config(known.config)
    command = next((a for a in rest if not a.startswith("-")), None)
    subs = [a for a in ap._actions if isinstance(a, argparse._SubParsersAction)][0]
    target = subs.choices.get(command)
    if target is None:
        raise ConfigError(f"config file given but no known subcommand in {argv}")
    actions = {a.dest: a for a in target._actions}
    defaults = {}
    for key, raw in values.items():
        act = actions.get(key)
        if act is None:
            raise ConfigError(f"{known.config}: unknown key {key!r} for {command}")
        if act.nargs in ("+", "*"):
            value = raw.split()
        elif isinstance(act, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes", "on")
        else:
            value = act.type(raw) if act.type else raw
        defaults[key] = value
        act.required = False
    target.set_defaults(**defaults)


def _cmd_tableau(args) -> int:
    if args.nodes:
        t = collocation_tableau(parse_nodes(args.nodes), name="custom")
    elif args.name:
        t = registry(args.name)
    else:
        raise ConfigError("give a registry name or --nodes")
    print(f"# {t.name} (s = {t.s})")
    print(t.to_text(args.digits))
    print()
    print(t.to_csv(), end="")
    print(f"cooper_defect,{cooper_defect(t)!r}")
    return 0


def _cmd_stability(args) -> int:
    t = registry(args.name)
    rep = classify(t)
    if args.json:
        print(rep.to_json())
        return 0
    R = stability_function(t)
    for k, v in rep.flags().items():
        print(f"{k:>4}: {v}")
    print("R numerator (ascending):", np.array2string(R.numerator.coeffs, precision=12))
    print("R denominator (ascending):", np.array2string(R.denominator.coeffs, precision=12))
    print("denominator roots:", np.array2string(np.asarray(rep.poles), precision=10))
    for k, w in rep.witnesses.items():
        print(f"witness {k}: {w}")
    return 0


def _cmd_aux(args) -> int:
    nodes = parse_nodes(args.nodes)
    eig = [parse_complex(e) for e in args.eigs.split(",") if e.strip()]
    a = build_aux(nodes, eig)
    np.set_printoptions(precision=12, linewidth=160)
    print("D =")
    print(a.D)
    print("Theta =", a.theta)
    print(f"rho(D) = {a.rho!r}")
    print(f"consistency defect = {consistency_defect(a)!r}")
    return 0


def _cmd_mesh(args) -> int:
    m = star_mesh(args.R, args.refine)
    write_mesh(m, args.out)
    print(f"wrote {m.size} triangles, {m.vertices.shape[0]} vertices to {args.out}")
    return 0


def _print_records(records, slopes=None) -> None:
    for r in sorted_records(records):
        print(f"{r.method:40s} h={r.h:<12.6g} final={r.final_error:<12.4e} max={r.max_error:<12.4e} "
              f"cpu={r.cpu_seconds:<8.3f} steps={r.steps:<6d} {r.status}")
    for m, s in (slopes or {}).items():
        print(f"slope {m}: {s.slope:.3f} ({s.used} points, {s.excluded} excluded)")


def _cmd_converge(args) -> int:
    cfg = ExperimentConfig(
        problem=args.problem,
        methods=args.methods,
        hs=args.hs,
        T=args.T,
        problem_params=_problem_params(args),
        norm=args.norm,
        out=args.out,
        reference=args.reference,
        check_residuals=args.check_residuals,
    )
    records, slopes = convergence_study(cfg)
    _print_records(records, slopes if args.command == "converge" else None)
    if args.out:
        emit_csv(records, args.out)
    return 0


def _cmd_resonance(args) -> int:
    from .harness import run_one
    from ..problems import nonlocal_cubic

    p = nonlocal_cubic(args.K)
    method_from_spec(args.method)
    records = []
    for k, h in zip(args.modes, resonant_steps(args.alpha, args.modes)):
        if h >= args.T:
            print(f"skip k={k}: step {h:.4g} >= T", file=sys.stderr)
            continue
        rec = run_one(args.method, p, h, args.T, check_residuals=args.check_residuals)
        records.append(rec)
        err = f"{np.log10(rec.final_error):.3f}" if np.isfinite(rec.final_error) and rec.final_error > 0 else "inf"
        mode = "" if rec.mode is None else f" mode index {rec.mode}"
        print(f"k={k:<3d} h={h:<12.6g} log10(err)={err:<8s} {rec.status}{mode}")
    if args.out:
        emit_csv(records, args.out)
    return 0


def _cmd_invariants(args) -> int:
    cfg = ExperimentConfig(
        problem=args.problem,
        methods=args.methods,
        hs=[args.h],
        T=args.T,
        problem_params=_problem_params(args),
        check_residuals=args.check_residuals,
    )
    series = invariant_study(cfg)
    for s in series:
        if s.status != "completed":
            print(f"{s.method}: {s.status}")
            continue
        e = "n/a" if s.energy_deviation is None else f"{np.max(s.energy_deviation):.3e}"
        print(f"{s.method:40s} max mass deviation {np.max(s.mass_deviation):.3e}  max energy deviation {e}")
    if args.out:
        emit_invariants_csv(series, args.out)
    return 0


COMMANDS = {
    "tableau": _cmd_tableau,
    "stability": _cmd_stability,
    "aux": _cmd_aux,
    "mesh": _cmd_mesh,
    "converge": _cmd_converge,
    "efficiency": _cmd_converge,
    "resonance": _cmd_resonance,
    "invariants": _cmd_invariants,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        _apply_config(ap, argv)
        args = ap.parse_args(argv)
        return COMMANDS[args.command](args)
    except (LinimpError, OSError) as exc:
        print(f"linimp: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
