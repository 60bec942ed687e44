"""Command-line front end.

Subcommands: zoo, curve, mixing, spectral, constants, family, audit.
Configs are parsed and validated before any computation starts; numeric
failures during execution exit with code 3 and a message naming the
module and operation, audit violations exit 1, usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import divergences as dv
from .audit import run_audit
from .chains import FiniteChain, load_chain, save_chain_json, save_chain_text
from .cutoff import (
    ChainFamily,
    Thresholds,
    chain_family,
    classify_types,
    cutoff_diagnosis,
    family_profile,
)
from .errors import CutoffLabError
from .expr import parse_expression
from .functional import lsi_lower_bound, nonlinear_constant
from .mixing import curve_from_chain, mixing_time
from .spectral import spectral_summary
from .zoo import (
    HypercubeMember,
    PakMember,
    ProductExampleMember,
    default_pak_c,
    default_product_p,
    get_family,
)

EPILOG = """\
output schemas (emitted exactly as documented):
  curve CSV      header `t,value` (or `t,value,state` with --start); floats %.12g
  mixing JSON    {"epsilon", "t", "t_lo", "t_hi"}
  spectral JSON  {"lambda", "kappa", "lambda_prime", "beta1": {"re","im"},
                  "gamma1": {"re","im"}, "eigenvalues": [{"re","im"}, ...]}
  constants JSON {"p", "kind", "value", "lower_bound", "restarts"}
  family JSON    {"family", "spec", "time_kind", "eps_grid", "thresholds",
                  "table": [{"n","missing","error","lambda","kappa",
                             "lambda_prime","mix":{eps: t}}],
                  "ratios": [{"eta","eps","values"}], "verdict", "window",
                  "window_prediction", "product_trend", "product_condition",
                  "type_row"}
  family CSV     header `n,lambda,kappa,lambda_prime,t@<eps>...` (written
                 next to the JSON report, same stem, .csv suffix); with
                 --figures, <stem>_ratios.png and <stem>_trend.png are
                 rendered from the report by plots/render.py

expression grammar for --cn/--pn/--lng (arithmetic over the index n):
  expr    := term (('+'|'-') term)*
  term    := factor (('*'|'/') factor)*
  factor  := '-' factor | primary
  primary := INT | 'n' | 'ln' primary | 'sqrt' primary
           | 'pow' '(' expr ',' expr ')' | '(' expr ')'
  examples: "1/(n*sqrt(ln n))"   "1/(2*ln n)"   "pow(n,2)"

CUTOFFLAB_THREADS sizes the family worker pool when --threads is absent
(default 1); outputs are byte-identical for any thread count.
"""


class NumericFailure(Exception):
    """Tags a failure with the module.operation that raised it."""

    def __init__(self, where: str, err):
        super().__init__(f"{where}: {err}")


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _json_dump(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=False)
    if path:
        Path(path).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("CUTOFFLAB_THREADS", "")
    return int(env) if env.isdigit() and int(env) > 0 else 1


# -- config -> objects -------------------------------------------------------------

ZOO_NAMES = ("hypercube", "pak", "product")


def _zoo_member(parser, args):
    name = args.zoo
    n = args.n
    if n is None:
        parser.error("--n is required with --zoo")
    try:
        if name == "hypercube":
            return HypercubeMember(n)
        if name == "pak":
            c = args.c if args.c is not None else default_pak_c(n)
            return PakMember(n, c)
        if name == "product":
            p = args.p if args.p is not None else default_product_p(n)
            ln_g = args.lng if args.lng is not None else float(n * n)
            return ProductExampleMember(p, ln_g, n)
    except (CutoffLabError, ValueError, ZeroDivisionError) as err:
        parser.error(f"zoo member rejected: {err}")
    parser.error(f"unknown zoo name {name!r}; choose from {ZOO_NAMES}")


def _load_chain_checked(path: str, time_kind: str | None) -> FiniteChain:
    try:
        return load_chain(path, time_kind)
    except CutoffLabError as err:
        raise NumericFailure("chains.load_chain", err) from err


def _curve_source(parser, args):
    """Return (curve factory spec -> DivergenceCurve, chain or None)."""
    if args.chain:
        chain = _load_chain_checked(args.chain, getattr(args, "time_kind", None))
        return (lambda spec: curve_from_chain(chain, spec)), chain
    if args.zoo:
        member = _zoo_member(parser, args)
        return member.curve, None
    parser.error("need either --zoo NAME --n N or --chain FILE")


def _parse_spec(parser, token: str):
    try:
        return dv.DivergenceSpec.parse(token)
    except CutoffLabError as err:
        parser.error(f"bad --spec {token!r}: {err}")


def _parse_int_list(parser, text: str, flag: str):
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        parser.error(f"{flag} wants a comma-separated integer list, got {text!r}")
    if not values:
        parser.error(f"{flag} must be non-empty")
    return values


def _parse_float_list(parser, text: str, flag: str):
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        parser.error(f"{flag} wants a comma-separated float list, got {text!r}")
    if not values:
        parser.error(f"{flag} must be non-empty")
    return values


def _parse_map(parser, text: str | None, flag: str):
    if text is None:
        return None
    try:
        return parse_expression(text)
    except CutoffLabError as err:
        parser.error(f"{flag} expression rejected: {err}")


# -- subcommand handlers ---------------------------------------------------------


def _cmd_zoo(parser, args) -> int:
    member = _zoo_member(parser, args)
    try:
        chain = member.chain()
    except CutoffLabError as err:
        raise NumericFailure("zoo.materialize", err) from err
    if args.out.endswith(".json"):
        save_chain_json(chain, args.out)
    else:
        save_chain_text(chain, args.out)
    print(f"wrote {chain.n}-state {chain.time_kind} chain to {args.out}")
    return 0


def _cmd_curve(parser, args) -> int:
    spec = _parse_spec(parser, args.spec)
    if args.tmax <= 0 or args.dt <= 0:
        parser.error("--tmax and --dt must be positive")
    steps = round(args.tmax / args.dt)
    ts = np.linspace(0.0, args.tmax, steps + 1)
    factory, chain = _curve_source(parser, args)
    if args.start is not None and chain is None:
        parser.error("--start needs --chain (zoo curves track the worst start)")
    try:
        lines = []
        if args.start is not None:
            lines.append("t,value,state")
            for t in ts:
                val = dv.pointwise_divergence(chain, args.start, t, spec)
                lines.append(f"{_fmt(t)},{_fmt(val)},{args.start}")
        else:
            curve = factory(spec)
            lines.append("t,value")
            for t in ts:
                lines.append(f"{_fmt(t)},{_fmt(curve(t))}")
    except CutoffLabError as err:
        raise NumericFailure("divergences.curve", err) from err
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"wrote {len(ts)} samples to {args.out}")
    return 0


def _cmd_mixing(parser, args) -> int:
    spec = _parse_spec(parser, args.spec)
    if args.eps <= 0:
        parser.error("--eps must be positive")
    factory, _ = _curve_source(parser, args)
    try:
        res = mixing_time(factory(spec), args.eps)
    except CutoffLabError as err:
        raise NumericFailure("mixing.mixing_time", err) from err
    _json_dump({"epsilon": res.epsilon, "t": res.t,
                "t_lo": res.t_lo, "t_hi": res.t_hi}, args.out)
    return 0


def _cmd_spectral(parser, args) -> int:
    if args.chain:
        chain = _load_chain_checked(args.chain, getattr(args, "time_kind", None))
    elif args.zoo:
        member = _zoo_member(parser, args)
        try:
            chain = member.chain()
        except CutoffLabError as err:
            raise NumericFailure("zoo.materialize", err) from err
    else:
        parser.error("need either --zoo NAME --n N or --chain FILE")
    try:
        summ = spectral_summary(chain)
    except CutoffLabError as err:
        raise NumericFailure("spectral.spectral_summary", err) from err
    _json_dump({
        "lambda": summ.lam,
        "kappa": summ.kappa,
        "lambda_prime": summ.lambda_prime,
        "beta1": {"re": summ.beta1.real, "im": summ.beta1.imag},
        "gamma1": {"re": summ.gamma1.real, "im": summ.gamma1.imag},
        "eigenvalues": [{"re": z.real, "im": z.imag} for z in summ.eigenvalues],
    }, args.out)
    return 0


def _cmd_constants(parser, args) -> int:
    if args.kind not in ("lsi", "poincare"):
        parser.error("--kind must be lsi or poincare")
    chain = _load_chain_checked(args.chain, getattr(args, "time_kind", None))
    try:
        est = nonlinear_constant(chain, args.p, args.kind,
                                 restarts=args.restarts, seed=args.seed)
        lower = lsi_lower_bound(chain) if args.kind == "lsi" else None
    except CutoffLabError as err:
        raise NumericFailure("functional.nonlinear_constant", err) from err
    _json_dump({"p": est.p, "kind": est.kind, "value": est.value,
                "lower_bound": lower, "restarts": est.restarts_used}, args.out)
    return 0


def _family_from_args(parser, args) -> ChainFamily:
    name = args.family or args.zoo
    if name is None:
        parser.error("need --family NAME (or --zoo NAME)")
    if name not in ("hypercube", "pak", "product", "product_example"):
        parser.error(f"unknown family {name!r}")
    if args.base is not None and args.base != "hypercube":
        parser.error("only --base hypercube is available")
    kwargs = {}
    if name == "pak":
        c_map = _parse_map(parser, args.cn, "--cn")
        if c_map is not None:
            kwargs["c_map"] = c_map
    elif name in ("product", "product_example"):
        p_map = _parse_map(parser, args.pn, "--pn")
        g_map = _parse_map(parser, args.lng, "--lng")
        if p_map is not None:
            kwargs["p_map"] = p_map
        if g_map is not None:
            kwargs["ln_g_map"] = g_map
    zoo_fam = get_family(name, **kwargs)
    ns = _parse_int_list(parser, args.n, "--n")
    try:
        return chain_family(zoo_fam, ns)
    except CutoffLabError as err:
        parser.error(f"--n rejected: {err}")


def _render_script() -> Path:
    return Path(__file__).resolve().parents[2] / "plots" / "render.py"


def _cmd_family(parser, args) -> int:
    family = _family_from_args(parser, args)
    spec = _parse_spec(parser, args.spec)
    if args.figures and not args.out:
        parser.error("--figures needs --out to name the report files")
    if args.figures and not _render_script().exists():
        parser.error("--figures needs plots/render.py next to the package")
    eps = None
    if args.eps:
        eps = tuple(_parse_float_list(parser, args.eps, "--eps"))
        if any(not (e > 0) for e in eps):
            parser.error("--eps thresholds must be positive")
    thr = Thresholds(delta_c=args.delta_c, precutoff_cap=args.cap,
                     growth_factor=args.growth, flat_slack=args.flat_slack)
    threads = _threads(args)
    try:
        table = family_profile(family, eps, spec, threads=threads)
        report = cutoff_diagnosis(table, thr)
        if args.classify:
            cls = classify_types(family, eps, thr, threads=threads)
            report.type_row = cls.to_dict()
    except CutoffLabError as err:
        raise NumericFailure("cutoff.family_profile", err) from err

    out = report.to_dict()
    _json_dump(out, args.out)
    if args.out:
        csv_path = str(Path(args.out).with_suffix(".csv"))
        cols = [f"t@{e:g}" for e in report.eps_grid]
        lines = ["n,lambda,kappa,lambda_prime," + ",".join(cols)]
        for row in report.rows:
            if row.missing:
                cells = [str(row.n)] + ["nan"] * (3 + len(cols))
            else:
                cells = [str(row.n), _fmt(row.lam), _fmt(row.kappa),
                         _fmt(row.lambda_prime)]
                cells += [_fmt(row.mix[e].t) for e in report.eps_grid]
            lines.append(",".join(cells))
        Path(csv_path).write_text("\n".join(lines) + "\n")
        if args.figures:
            stem = Path(args.out)
            for kind, suffix in (("ratios", "_ratios.png"),
                                 ("product-trend", "_trend.png")):
                img = stem.with_name(stem.stem + suffix)
                proc = subprocess.run(
                    [sys.executable, str(_render_script()), "--kind", kind,
                     "--in", args.out, "--out", str(img)],
                    capture_output=True, text=True)
                if proc.returncode != 0:
                    detail = proc.stderr.strip() or f"exit {proc.returncode}"
                    raise NumericFailure("plots.render", detail)
                print(f"wrote {img}")
    print(f"verdict: {report.verdict}")
    return 0


def _cmd_audit(parser, args) -> int:
    report = run_audit(seed=args.seed)
    for name, detail in report.results:
        status = "ok" if detail == "" else "FAIL"
        line = f"[{status}] {name}"
        if detail:
            line += f": {detail}"
        print(line)
    if args.out:
        _json_dump(report.to_dict(), args.out)
    if not report.passed:
        print("audit failed", file=sys.stderr)
        return 1
    print("audit passed")
    return 0


# -- parser ------------------------------------------------------------------------


def _add_source_args(sub, with_start: bool = False):
    sub.add_argument("--zoo", choices=ZOO_NAMES, help="zoo family name")
    sub.add_argument("--n", type=int, help="family index (zoo input)")
    sub.add_argument("--c", type=float, help="pak interpolation weight")
    sub.add_argument("--p", type=float, help="product slow-factor rate")
    sub.add_argument("--lng", type=float, help="product ln(g)")
    sub.add_argument("--chain", help="chain file (.json or text kernel)")
    sub.add_argument("--time-kind", dest="time_kind",
                     choices=("discrete", "continuized"),
                     help="time kind for text chain files")
    if with_start:
        sub.add_argument("--start", type=int,
                         help="emit the pointwise curve from this state")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cutofflab",
        description="Markov chain mixing, divergence curves, and cutoff "
                    "diagnosis.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    subs = parser.add_subparsers(dest="command", required=True)

    zoo = subs.add_parser("zoo", help="materialize a zoo chain to a file")
    zoo.add_argument("--name", dest="zoo", required=True, choices=ZOO_NAMES)
    zoo.add_argument("--n", type=int, required=True)
    zoo.add_argument("--c", type=float)
    zoo.add_argument("--p", type=float)
    zoo.add_argument("--lng", type=float)
    zoo.add_argument("--out", required=True)

    curve = subs.add_parser("curve", help="dump a divergence curve as CSV")
    _add_source_args(curve, with_start=True)
    curve.add_argument("--spec", required=True, help="divergence token, e.g. tv")
    curve.add_argument("--tmax", type=float, required=True)
    curve.add_argument("--dt", type=float, required=True)
    curve.add_argument("--out", required=True)

    mixing = subs.add_parser("mixing", help="mixing time at a threshold")
    _add_source_args(mixing)
    mixing.add_argument("--spec", required=True)
    mixing.add_argument("--eps", type=float, required=True)
    mixing.add_argument("--out")

    spectral = subs.add_parser("spectral", help="spectral summary as JSON")
    _add_source_args(spectral)
    spectral.add_argument("--out")

    constants = subs.add_parser("constants",
                                help="non-linear LSI/Poincare constants")
    constants.add_argument("--chain", required=True)
    constants.add_argument("--time-kind", dest="time_kind",
                           choices=("discrete", "continuized"))
    constants.add_argument("--p", type=float, required=True)
    constants.add_argument("--kind", default="lsi")
    constants.add_argument("--restarts", type=int, default=32)
    constants.add_argument("--seed", type=int, default=0)
    constants.add_argument("--out")

    family = subs.add_parser("family", help="profile a family and diagnose "
                                            "cutoff")
    family.add_argument("--family")
    family.add_argument("--zoo", help="alias for --family")
    family.add_argument("--base", help="base chain for pak (hypercube)")
    family.add_argument("--cn", help="pak c_n map, e.g. \"1/(n*sqrt(ln n))\"")
    family.add_argument("--pn", help="product p_n map, e.g. \"1/(2*ln n)\"")
    family.add_argument("--lng", help="product ln g_n map, e.g. \"n*n\"")
    family.add_argument("--n", required=True, help="comma-separated index list")
    family.add_argument("--spec", default="tv")
    family.add_argument("--eps", help="comma-separated thresholds")
    family.add_argument("--delta-c", dest="delta_c", type=float, default=0.15)
    family.add_argument("--cap", type=float, default=4.0)
    family.add_argument("--growth", type=float, default=2.0)
    family.add_argument("--flat-slack", dest="flat_slack", type=float,
                        default=0.2)
    family.add_argument("--classify", action="store_true",
                        help="attach the divergence-type classification row")
    family.add_argument("--figures", action="store_true",
                        help="render ratio and trend figures next to --out")
    family.add_argument("--threads", type=int)
    family.add_argument("--out")

    audit = subs.add_parser("audit", help="run the invariant suite")
    audit.add_argument("--seed", type=int, default=0)
    audit.add_argument("--out")

    return parser


HANDLERS = {
    "zoo": _cmd_zoo,
    "curve": _cmd_curve,
    "mixing": _cmd_mixing,
    "spectral": _cmd_spectral,
    "constants": _cmd_constants,
    "family": _cmd_family,
    "audit": _cmd_audit,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return HANDLERS[args.command](parser, args)
    except NumericFailure as err:
        print(f"numeric failure in {err}", file=sys.stderr)
        return 3
    except CutoffLabError as err:
        # anything a handler did not label still exits as a numeric failure
        print(f"numeric failure in {args.command}: {err}", file=sys.stderr)
        return 3
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
