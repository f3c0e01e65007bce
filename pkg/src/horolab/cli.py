"""Command-line front end.

Subcommands: field, totient, equidist, vonneumann, duality-check.
Exit codes: 0 success, 2 configuration error, 3 guard violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, runner
from .nfq import make_field, rational_field
from .runner import ConfigError, GuardError


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=Path("runs"),
                   help="output directory (default: runs/)")
    p.add_argument("--plot", action="store_true",
                   help="also render PNG figures alongside the CSV output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="horolab",
        description="Exact arithmetic and equidistribution experiments on "
                    "expanding horospheres.",
    )
    ap.add_argument("--version", action="version", version=f"horolab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("field", help="print a field context")
    p.add_argument("--D", required=True,
                   help="squarefree radicand, or 'rational' for Q")

    p = sub.add_parser("totient", help="emit the totient ratio table")
    p.add_argument("--field", required=True, help="radicand or 'rational'")
    p.add_argument("--bound", type=int, required=True, help="norm bound >= 16")
    _add_out(p)

    p = sub.add_parser("equidist", help="run the equidistribution pipeline")
    p.add_argument("--config", type=Path, required=True, help="JSON run config")
    p.add_argument("--seed", type=int, default=0, help="master seed (u64)")
    _add_out(p)

    p = sub.add_parser("vonneumann", help="exact effective von Neumann report")
    p.add_argument("--Ks", required=True,
                   help="comma-separated averaging horizons, e.g. 16,64,256")
    p.add_argument("--sigma", type=float, default=0.9, help="exponent in (0,1)")
    p.add_argument("--freq", action="append", default=None, metavar="M,N",
                   help="add cos(2 pi (Mx + Ny)) to the test function "
                        "(repeatable; default 1,0)")
    _add_out(p)

    p = sub.add_parser("duality-check", help="verify the duality identity")
    p.add_argument("--field", required=True, help="radicand or 'rational'")
    p.add_argument("--bound", type=int, required=True, help="norm bound on y")
    _add_out(p)
    return ap


def _field_spec(text: str):
    if text == "rational":
        return "rational"
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"field must be an integer or 'rational', got {text!r}")


def _cmd_field(args) -> int:
    spec = _field_spec(args.D)
    ctx = rational_field() if spec == "rational" else make_field(spec)
    info = {
        "degree": ctx.degree,
        "discriminant": ctx.disc,
        "omega": "1" if ctx.degree == 1 else f"omega with omega^2 = "
                 f"{ctx.omega_trace}*omega + {ctx.omega_norm_neg}",
        "fundamental_unit": str(ctx.eps0),
        "totally_positive_unit": str(ctx.eps_tp),
    }
    if ctx.degree == 2:
        info["eps_tp_embeddings"] = list(ctx.eps_tp.embed())
    print(json.dumps(info, indent=2))
    return 0


def _finish(manifest, args) -> int:
    path = manifest.write(args.out)
    if args.plot:
        from . import plots
        renderer = {
            "equidist": plots.render_equidist,
            "totient": plots.render_totient,
            "vonneumann": plots.render_vonneumann,
            "duality-check": plots.render_duality,
        }[manifest.command]
        for fig in renderer(args.out):
            print(f"figure: {fig}")
    print(f"run {manifest.run_id}: manifest at {path}")
    for line in json.dumps(manifest.summary, indent=2).splitlines():
        print(line)
    return 0


def _cmd_totient(args) -> int:
    return _finish(runner.run_totient(_field_spec(args.field), args.bound, args.out), args)


def _cmd_equidist(args) -> int:
    try:
        raw = json.loads(args.config.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {args.config}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}")
    cfg = runner.load_config(raw)
    return _finish(runner.run_equidist(cfg, args.seed, args.out), args)


def _cmd_vonneumann(args) -> int:
    try:
        Ks = [int(k) for k in args.Ks.split(",") if k]
    except ValueError:
        raise ConfigError(f"--Ks must be comma-separated integers, got {args.Ks!r}")
    freqs = []
    for text in args.freq or ["1,0"]:
        try:
            m, n = (int(v) for v in text.split(","))
        except ValueError:
            raise ConfigError(f"--freq must look like M,N; got {text!r}")
        freqs.append((m, n))
    return _finish(runner.run_vonneumann(freqs, Ks, args.sigma, args.out), args)


def _cmd_duality(args) -> int:
    return _finish(runner.run_duality_check(_field_spec(args.field), args.bound, args.out), args)


_COMMANDS = {
    "field": _cmd_field,
    "totient": _cmd_totient,
    "equidist": _cmd_equidist,
    "vonneumann": _cmd_vonneumann,
    "duality-check": _cmd_duality,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError) as e:
        if isinstance(e, GuardError):
            print(f"guard violation: {e}", file=sys.stderr)
            return 3
        print(f"config error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
