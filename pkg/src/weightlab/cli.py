"""Command-line surface: weight specs in, JSON/CSV reports out.

Weight spec grammar (exact):
    const:c=<v> | power:delta=<v> | step:alpha=<v> | csv:<path>
    | prod:(<spec>,<spec>)

Exit codes: 0 success, 1 a verification block failed, 2 usage error.
All JSON reports carry a top-level {"schema": 1}; +inf constants are
encoded as the string "inf".  All randomness hangs off --seed (default 0),
so identical invocations are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import czd as czd_mod
from . import experiments as exp
from . import sawyer as pc
from .constants import (
    ConstantKind,
    doubling_check,
    global_constant,
    reverse_holder_check,
)
from .errors import ConfigError, CsvFormatError, NoParentError, UncachedExponentError
from .grid import build_grid
from .maximal import dyadic_maximal, uncentered_maximal, weighted_dyadic_maximal
from .norms import mixed_ratio
from .weights import (
    load_function_csv,
    parse_weight_spec,
    realize,
    save_function_csv,
)

SCHEMA = 1


def _emit_json(payload: dict) -> None:
    print(json.dumps({"schema": SCHEMA} | payload, sort_keys=True))


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise ConfigError(f"bad numeric list {text!r}") from None


def _grid_for_rows(nrows: int, J: int):
    L = (nrows).bit_length() - 1 - J
    if nrows != 1 << (J + L) or L < 0:
        raise ConfigError(f"{nrows} rows do not form a grid with J={J}")
    return build_grid(J, L)


def _realize_spec(text: str, grid, dual=(), power=()):
    return realize(parse_weight_spec(text), grid, dual_exponents=dual, power_exponents=power)


# ---------------------------------------------------------------------------
# subcommands

def _cmd_constants(args) -> int:
    grid = build_grid(args.J, args.L)
    kind_args = {}
    if args.kind in ("Ap", "Mixed"):
        if args.p is None:
            raise ConfigError(f"--p required for kind {args.kind}")
        kind_args["p"] = args.p
    if args.kind == "Mixed":
        if args.alpha is None or args.beta is None:
            raise ConfigError("--alpha and --beta required for kind Mixed")
        kind_args["alpha"] = args.alpha
        kind_args["beta"] = args.beta
    kind = ConstantKind(args.kind, **kind_args)
    dual = (args.p,) if args.kind in ("Ap", "Mixed") else ()
    w = _realize_spec(args.weight, grid, dual=dual)
    report = global_constant(w, kind)
    if args.format == "json":
        _emit_json(report.to_json_dict())
    else:
        print("level,value,argmax_index")
        for k, v, m in report.per_level:
            print(f"{k},{v!r},{m}")
    return 0


def _cmd_maximal(args) -> int:
    grid = _grid_for_rows(_count_rows(args.f), args.J)
    f = load_function_csv(args.f, grid)
    if args.variant == "dyadic":
        out = dyadic_maximal(f, signed=args.signed)
    elif args.variant == "uncentered":
        out = uncentered_maximal(f)
    elif args.variant == "weighted":
        if args.v is None:
            raise ConfigError("--v required for the weighted variant")
        v = _realize_spec(args.v, grid)
        out = weighted_dyadic_maximal(f, v)
    else:
        raise ConfigError(f"unknown variant {args.variant!r}")
    for val in out.values:
        print(repr(float(val)))
    return 0


def _cmd_czd(args) -> int:
    grid = _grid_for_rows(_count_rows(args.f), args.J)
    f = load_function_csv(args.f, grid)
    v = _realize_spec(args.v, grid)
    dec = czd_mod.cz_decompose(f, v, args.height)
    verify = czd_mod.verify_cz(dec, v, args.r)
    dom = czd_mod.pointwise_domination_check(dec, v)
    if args.out_g:
        save_function_csv(dec.good, args.out_g)
    if args.out_b:
        save_function_csv(dec.bad_total, args.out_b)
    payload = dec.to_json_dict() | {
        "verify": verify.to_json_dict(),
        "domination": dom.to_json_dict(),
    }
    _emit_json(payload)
    return 0 if (verify.all_ok and dom.all_ok) else 1


def _cmd_weaknorm(args) -> int:
    grid = _grid_for_rows(_count_rows(args.f), args.J)
    f = load_function_csv(args.f, grid)
    u = _realize_spec(args.u, grid)
    v = _realize_spec(args.v, grid)
    rep = mixed_ratio(f, u, v, variant=args.variant)
    _emit_json(rep.to_json_dict())
    return 0


def _cmd_sharpness_a1(args) -> int:
    res = exp.sharpness_a1_sweep(
        _floats(args.deltas), include_grid=args.grid, L=args.L, threads=args.threads
    )
    if args.format == "json":
        _emit_json(res.to_json_dict())
    else:
        print("delta,path,numerator,denominator,ratio")
        for r in res.rows:
            print(f"{r['delta']},{r['path']},{r['numerator']!r},{r['denominator']!r},{r['ratio']!r}")
    return 0


def _cmd_sharpness_product(args) -> int:
    res = exp.sharpness_product_sweep(_floats(args.alphas), _floats(args.deltas))
    ok = all(r["lower_ok"] for r in res.rows)
    if args.format == "json":
        _emit_json(res.to_json_dict())
    else:
        print("alpha,delta,numerator,denominator,ratio")
        for r in res.rows:
            print(f"{r['alpha']},{r['delta']},{r['numerator']!r},{r['denominator']!r},{r['ratio']!r}")
    return 0 if ok else 1


def _cmd_bound_audit(args) -> int:
    grid = build_grid(args.J, args.L)
    if args.v:
        weights = [(args.v, _realize_spec(args.v, grid))]
    else:
        weights = exp.step_family(grid, seed=args.seed)
    corpus = None
    if args.corpus:
        import os

        corpus = []
        for name in sorted(os.listdir(args.corpus)):
            if name.endswith(".csv"):
                corpus.append(
                    (name, load_function_csv(os.path.join(args.corpus, name), grid))
                )
    report = exp.bound_audit_ap(weights, args.p, corpus=corpus, seed=args.seed)
    _emit_json(report.to_json_dict())
    return 0 if report.all_ok else 1


def _cmd_sawyer_verify(args) -> int:
    grid = _grid_for_rows(_count_rows(args.g), args.J)
    g = load_function_csv(args.g, grid)
    u = _realize_spec(args.u, grid)
    v = _realize_spec(args.v, grid)
    record = pc.build_record(g, v, a=args.a, delta_frac=args.delta_frac)
    pc.principal_cubes(record, u)
    report = pc.verify_chain(record, u, v, g, seed=args.seed)
    _emit_json(record.to_json_dict() | {"chain": report.to_json_dict()})
    return 0 if report.all_ok else 1


def _cmd_lemma_check(args) -> int:
    grid = build_grid(args.J, args.L)
    w = _realize_spec(args.v, grid)
    report = exp.mixed_lemma_check([(args.v, w)], _floats(args.p_grid))
    _emit_json(report.to_json_dict())
    return 0 if report.all_ok else 1


def _cmd_rh_check(args) -> int:
    grid = build_grid(args.J, args.L)
    w = _realize_spec(args.weight, grid)
    report = reverse_holder_check(w, seed=args.seed)
    _emit_json(report.to_json_dict())
    return 0 if report.ok else 1


def _cmd_doubling(args) -> int:
    grid = build_grid(args.J, args.L)
    w = _realize_spec(args.weight, grid)
    report = doubling_check(w, args.p)
    _emit_json(report.to_json_dict())
    return 0 if report.parent_ok else 1


def _count_rows(path: str) -> int:
    with open(path, "r", encoding="ascii") as fh:
        return sum(1 for line in fh if line.strip())


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="weightlab",
        description="weight constants, maximal operators, CZ decompositions, "
        "and mixed weak-type experiments on dyadic grids",
    )
    ap.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    ap.add_argument("--threads", type=int, default=None, help="worker cap for sweeps")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="global weight constant over the dyadic grid")
    c.add_argument("--weight", required=True)
    c.add_argument("--kind", required=True, choices=["A1", "Ap", "AinfExp", "AinfFW", "Mixed"])
    c.add_argument("--p", type=float)
    c.add_argument("--alpha", type=float)
    c.add_argument("--beta", type=float)
    c.add_argument("--J", type=int, required=True)
    c.add_argument("--L", type=int, required=True)
    c.add_argument("--format", choices=["json", "csv"], default="json")
    c.set_defaults(func=_cmd_constants)

    m = sub.add_parser("maximal", help="apply a maximal operator to a CSV function")
    m.add_argument("--f", required=True)
    m.add_argument("--variant", required=True, choices=["dyadic", "uncentered", "weighted"])
    m.add_argument("--v", help="weight spec for the weighted variant")
    m.add_argument("--J", type=int, default=0)
    m.add_argument("--signed", action="store_true", help="tilde variant (|averages|)")
    m.set_defaults(func=_cmd_maximal)

    z = sub.add_parser("czd", help="Calderon-Zygmund decomposition with verification")
    z.add_argument("--f", required=True)
    z.add_argument("--v", required=True)
    z.add_argument("--height", type=float, required=True)
    z.add_argument("--r", type=float, default=2.0)
    z.add_argument("--J", type=int, default=0)
    z.add_argument("--out-g")
    z.add_argument("--out-b")
    z.set_defaults(func=_cmd_czd)

    w = sub.add_parser("weaknorm", help="mixed weak-type ratio report")
    w.add_argument("--f", required=True)
    w.add_argument("--u", required=True)
    w.add_argument("--v", required=True)
    w.add_argument("--variant", choices=["Md", "M"], default="Md")
    w.add_argument("--J", type=int, default=0)
    w.set_defaults(func=_cmd_weaknorm)

    s1 = sub.add_parser("sharpness-a1", help="linear-sharpness table")
    s1.add_argument("--deltas", required=True)
    s1.add_argument("--grid", action="store_true", help="add grid-path rows (delta >= 1/2)")
    s1.add_argument("--L", type=int, default=12)
    s1.add_argument("--format", choices=["json", "csv"], default="json")
    s1.set_defaults(func=_cmd_sharpness_a1)

    s2 = sub.add_parser("sharpness-product", help="product lower-bound table")
    s2.add_argument("--alphas", required=True)
    s2.add_argument("--deltas", required=True)
    s2.add_argument("--format", choices=["json", "csv"], default="json")
    s2.set_defaults(func=_cmd_sharpness_product)

    b = sub.add_parser("bound-audit", help="weak-type bound envelope audit")
    b.add_argument("--v", help="single weight spec (default: step/walk family)")
    b.add_argument("--p", type=float, required=True)
    b.add_argument("--J", type=int, default=1)
    b.add_argument("--L", type=int, default=8)
    b.add_argument("--corpus", help="directory of function CSVs")
    b.set_defaults(func=_cmd_bound_audit)

    sv = sub.add_parser("sawyer-verify", help="principal-cubes chain verification")
    sv.add_argument("--u", required=True)
    sv.add_argument("--v", required=True)
    sv.add_argument("--g", required=True)
    sv.add_argument("--a", type=float, default=4.0)
    sv.add_argument("--delta-frac", type=float, default=0.5, dest="delta_frac")
    sv.add_argument("--J", type=int, default=0)
    sv.set_defaults(func=_cmd_sawyer_verify)

    lc = sub.add_parser("lemma-check", help="mixed-constant chain and monotonicity")
    lc.add_argument("--v", required=True)
    lc.add_argument("--p-grid", required=True, dest="p_grid")
    lc.add_argument("--J", type=int, default=1)
    lc.add_argument("--L", type=int, default=8)
    lc.set_defaults(func=_cmd_lemma_check)

    rh = sub.add_parser("rh-check", help="reverse-Holder exponent check")
    rh.add_argument("--weight", required=True)
    rh.add_argument("--J", type=int, default=1)
    rh.add_argument("--L", type=int, default=8)
    rh.set_defaults(func=_cmd_rh_check)

    db = sub.add_parser("doubling", help="doubling-constant check")
    db.add_argument("--weight", required=True)
    db.add_argument("--p", type=float, default=1.0)
    db.add_argument("--J", type=int, default=1)
    db.add_argument("--L", type=int, default=8)
    db.set_defaults(func=_cmd_doubling)

    return ap


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ConfigError, CsvFormatError, UncachedExponentError, NoParentError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
