"""Command line: simulate, validate-partition, validate-inversions, gen-code, patterns."""

from __future__ import annotations

import argparse
import os
import sys

from . import sim_harness as sh
from .channel import ebn0_to_sigma
from .gf2_codes import BchSpec, bch_construct, write_alist
from .metrics import summary_csv, summary_jsonl, write_rows
from .pattern_gen import build_basis, gamma_cdf, gamma_orbgrand


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI file; [common] and [<command>] sections")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "jsonl"])
    p.add_argument("--workers", type=int)


def _merged(args, defaults: dict, section: str) -> dict:
    """Flag values win over the config file, which wins over ``defaults``."""
    file_opts = sh.read_config_file(args.config, section) if args.config else {}
    out = {}
    for k, dv in defaults.items():
        v = getattr(args, k, None)
        if v is None and k in file_opts:
            v = file_opts[k]
            conv = type(dv) if dv is not None and not isinstance(dv, (list, tuple)) else None
            if isinstance(dv, bool):
                v = sh._bool(v)
            elif conv is not None:
                v = conv(v)
        out[k] = dv if v is None else v
    return out


def cmd_simulate(args) -> int:
    file_opts = sh.read_config_file(args.config, "simulate") if args.config else {}
    cfg = sh.make_config(
        file_opts,
        code=args.code, variants=args.variants, ebn0=args.ebn0, frames=args.frames, t_max=args.t_max,
        d=args.d, window=args.window, seed=args.seed, eta_every=args.eta_every, crn=args.crn or None,
        timing=args.timing or None, exact_ci=args.exact_ci or None, chunk=args.chunk, workers=args.workers,
        out=args.out, format=args.format,
    )
    summary = sh.run_sweep(cfg)
    text = summary_csv(summary) if cfg.format == "csv" else summary_jsonl(summary)
    _emit(text, cfg.out)
    return 0


def cmd_validate_partition(args) -> int:
    o = _merged(args, {"n_max": 2000, "gamma": "orb", "ebn0": 5.0, "n": 127, "t_max": 10_000,
                       "out": None, "format": "csv"}, "validate-partition")
    rows = sh.run_partition_validation(o["n_max"], o["gamma"], float(o["ebn0"]), N=o["n"], T=o["t_max"])
    text = write_rows(rows, sh.PARTITION_COLUMNS, None, o["format"])
    _emit(text, o["out"])
    return 0


def cmd_validate_inversions(args) -> int:
    o = _merged(args, {"ebn0": "5,6", "samples": 1000, "d": 1, "window": "16", "t_max": 10_000,
                       "seed": 0, "out": None, "format": "csv"}, "validate-inversions")
    ebn0 = [float(x) for x in str(o["ebn0"]).split(",") if x.strip()]
    rows = sh.run_inversion_validation(ebn0, int(o["samples"]), int(o["d"]), int(o["seed"]),
                                       T=int(o["t_max"]), window=sh._window(o["window"]))
    _emit(write_rows(rows, sh.INVERSION_COLUMNS, None, o["format"]), o["out"])
    return 0


def companion_path(path: str) -> str:
    stem, ext = os.path.splitext(path)
    return f"{stem}.G{ext or '.alist'}"


def cmd_gen_code(args) -> int:
    if not args.bch or not args.out:
        raise SystemExit("gen-code needs --bch m t and --out")
    m, t = args.bch
    code = bch_construct(BchSpec(m, t))
    write_alist(code.H, args.out)
    write_alist(code.G, companion_path(args.out))
    print(f"{code.name}: n={code.n} k={code.k} -> {args.out}, {companion_path(args.out)}", file=sys.stderr)
    return 0


def pattern_rows(gamma: str, N: int, T: int, ebn0_db: float = 5.0, rate: float | None = None) -> list[dict]:
    if gamma == "orb":
        g = gamma_orbgrand(N)
    elif gamma == "cdf":
        g = gamma_cdf(N, ebn0_to_sigma(ebn0_db, rate if rate is not None else 1.0))
    else:
        raise ValueError(f"unknown gamma {gamma!r}")
    basis = build_basis(g, T)
    # 1-based coordinates in the dump
    return [{"t": t + 1, "weight": float(w), "support": " ".join(str(j + 1) for j in s)}
            for t, (w, s) in enumerate(zip(basis.weights, basis.supports))]


def cmd_patterns(args) -> int:
    o = _merged(args, {"gamma": "orb", "n": 127, "t": 100, "ebn0": 5.0, "rate": 1.0,
                       "out": None, "format": "csv"}, "patterns")
    rows = pattern_rows(o["gamma"], int(o["n"]), int(o["t"]), float(o["ebn0"]), float(o["rate"]))
    if args.dump or o["out"]:
        _emit(write_rows(rows, ["t", "weight", "support"], None, o["format"]), o["out"])
    else:
        ws = [r["weight"] for r in rows]
        print(f"{len(rows)} patterns, weights {ws[0]:g}..{ws[-1]:g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="grandlab", description="ORB-type GRAND decoders and fine-tuning experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="BLER / tests / eta sweep")
    _common(p)
    p.add_argument("--code", help="bch:n:k or alist:<path>")
    p.add_argument("--variants", help="comma list of orb,cdf,sgrand,ft-cdf,ft-orb")
    p.add_argument("--ebn0", help="comma list of Eb/N0 values in dB")
    p.add_argument("--frames", type=int)
    p.add_argument("--t-max", dest="t_max", type=int)
    p.add_argument("--d", type=int, choices=[1, 2])
    p.add_argument("--window", help="candidate window M, or 'all'")
    p.add_argument("--eta-every", dest="eta_every", type=int, help="sample eta on 1 in K frames (0: off)")
    p.add_argument("--chunk", type=int, help="frames per task")
    p.add_argument("--crn", action="store_true", help="common random numbers across variants")
    p.add_argument("--timing", action="store_true", help="record wall time (output no longer deterministic)")
    p.add_argument("--exact-ci", dest="exact_ci", action="store_true", help="Clopper-Pearson BLER interval")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate-partition", help="exact position count vs estimator")
    _common(p)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--gamma", choices=["orb", "cdf"])
    p.add_argument("--ebn0", type=float)
    p.add_argument("--n", type=int, help="code length N")
    p.add_argument("--t-max", dest="t_max", type=int, help="basis size for cdf")
    p.set_defaults(func=cmd_validate_partition)

    p = sub.add_parser("validate-inversions", help="exact vs estimated reverse pairs")
    _common(p)
    p.add_argument("--ebn0", help="comma list")
    p.add_argument("--samples", type=int)
    p.add_argument("--d", type=int, choices=[1, 2])
    p.add_argument("--window")
    p.add_argument("--t-max", dest="t_max", type=int)
    p.set_defaults(func=cmd_validate_inversions)

    p = sub.add_parser("gen-code", help="write a BCH code as alist (H and companion G)")
    _common(p)
    p.add_argument("--bch", nargs=2, type=int, metavar=("M", "T"))
    p.set_defaults(func=cmd_gen_code)

    p = sub.add_parser("patterns", help="basis error patterns")
    _common(p)
    p.add_argument("--gamma", choices=["orb", "cdf"])
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--ebn0", type=float, help="for cdf weights")
    p.add_argument("--rate", type=float, help="code rate for the cdf noise level")
    p.add_argument("--dump", action="store_true", help="write t, weight, support rows")
    p.set_defaults(func=cmd_patterns)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except sh.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
