"""Command-line front end.

Exit codes: 0 on success, 1 on usage errors (bad arguments, unknown backend,
unattained level, divergent request), 2 when ``verify`` finds failures.
JSON output is canonical (sorted keys, fixed separators); CSV is a flat
mirror for plotting.  ``--output`` names a file, resolved against
$LCMLAB_OUTPUT_DIR when relative; files are written atomically.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from fractions import Fraction

from sympy import primerange

from . import kms
from .core import (DivergenceError, LcmlabError, LevelNotAttained, NoScale,
                   UsageError, normalize_pair)
from .selfsim import (ExceededCap, action_from_config, finite_state_check, singular_ratio_mc,
                      singular_ratios)
from .zoo import BACKENDS, ZappaSzepMonoid, instance_selftest, make_backend

OUTPUT_ENV = "LCMLAB_OUTPUT_DIR"
BACKEND_KEYS = ("c", "d", "m", "n", "q", "pmax", "action", "k", "digits")


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -- value conversion ---------------------------------------------------------

def jsonable(x):
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return x


def dump_json(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def dump_csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([jsonable(r.get(h, "")) for h in header])
    return buf.getvalue()


def int_list(v) -> list:
    if v is None:
        return []
    if isinstance(v, (list, tuple)):
        return [int(x) for x in v]
    if isinstance(v, int):
        return [v]
    try:
        return [int(x) for x in str(v).replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise UsageError(f"expected a comma separated integer list, got {v!r}") from exc


def irreducible_set(v) -> list:
    """'2,3,5', 'primes:50' or a list."""
    if isinstance(v, str) and v.startswith("primes:"):
        return list(primerange(2, int(v.split(":")[1]) + 1))
    if isinstance(v, str) and v in ("", "none", "empty"):
        return []
    return int_list(v)


def number(v):
    """Integers and p/q stay exact; anything else is a float."""
    if isinstance(v, (int, Fraction)):
        return v
    text = str(v).strip()
    try:
        return int(text)
    except ValueError:
        pass
    if "/" in text:
        return Fraction(text)
    return float(text)


# -- output ---------------------------------------------------------------------

def emit(args, text: str) -> None:
    out = getattr(args, "output", None)
    if not out:
        sys.stdout.write(text)
        return
    if not os.path.isabs(out) and os.environ.get(OUTPUT_ENV):
        out = os.path.join(os.environ[OUTPUT_ENV], out)
    folder = os.path.dirname(os.path.abspath(out))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".lcmlab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- helpers shared by commands -----------------------------------------------

def backend_from(args):
    params = {k: getattr(args, k, None) for k in BACKEND_KEYS}
    return make_backend(args.backend, **params)


def parse_elem(M, text):
    if text is None:
        raise UsageError("missing element argument")
    text = str(text).strip()
    if text in ("id", "1", "e", ""):
        return M.identity
    return M.parse(text)


def levels_from(M, args) -> list:
    lv = int_list(getattr(args, "levels", None))
    depth = getattr(args, "depth", None)
    if not lv and depth is not None and isinstance(M, ZappaSzepMonoid):
        lv = [M.size ** d for d in range(1, int(depth) + 1)]
    if not lv:
        raise UsageError("give --levels (or --depth for Zappa-Szep backends)")
    for n in lv:
        M.check_level(n)
    return lv


def trace_from(args):
    return kms.trace_from_text(getattr(args, "trace", None) or "dirac")


# -- commands ---------------------------------------------------------------

def cmd_info(args):
    M = backend_from(args)
    info = {"backend": M.prefix, "params": M.params(), "right_cancellative": M.right_cancellative,
            "absorbing_rule": M.absorbing_rule, "irreducible_kind": M.irreducible_kind,
            "generators": [M.format(g) for g in M.generators()],
            "core_samples": [M.format(g) for g in M.core_samples()]}
    try:
        info["beta_critical"] = kms.beta_critical(M)
        info["irreducibles_upto_50"] = M.irreducibles(50)
        info["levels_upto_64"] = M.levels(64)
    except NoScale as exc:
        info["beta_critical"] = None
        info["scale"] = str(exc)
    emit(args, dump_json(info))
    return 0


def cmd_classes(args):
    M = backend_from(args)
    rows = []
    for n in levels_from(M, args):
        for c in M.classes_at_level(n):
            rows.append({"level": n, "class": M.format_class(c), "rep": M.format(M.class_rep(c))})
    if args.format == "csv":
        emit(args, dump_csv(["level", "class", "rep"], rows))
    else:
        emit(args, dump_json({"backend": M.prefix, "params": M.params(), "classes": rows}))
    return 0


def _fa_rows(M, a, b, levels):
    rows = []
    for n in levels:
        fa = kms.fa_sets(M, a, b, n)
        d = len(fa.F - fa.A)
        rows.append({"n": n, "F": len(fa.F), "A": len(fa.A), "F_minus_A": d,
                     "ratio": Fraction(d, n), "method": fa.method})
    return rows


def cmd_fa_table(args):
    M = backend_from(args)
    a, b = parse_elem(M, args.a), parse_elem(M, args.b)
    rows = _fa_rows(M, a, b, levels_from(M, args))
    if args.format == "json":
        emit(args, dump_json({"backend": M.prefix, "params": M.params(),
                              "pair": [M.format(a), M.format(b)], "levels": rows}))
    else:
        emit(args, dump_csv(["n", "F", "A", "F_minus_A", "ratio", "method"], rows))
    return 0


def cmd_regularity(args):
    M = backend_from(args)
    a, b = parse_elem(M, args.a), parse_elem(M, args.b)
    levels = levels_from(M, args)
    beta = number(args.beta) if args.beta is not None else None
    I = irreducible_set(args.I) if args.I is not None else None
    rep = kms.regularity_series(M, a, b, levels, tol=args.tol, beta=beta, I=I,
                                max_level=args.max_level)
    if args.format == "csv":
        rows = [{"n": r["n"], "F": r["F"], "A": r["A"], "ratio": r["ratio"]} for r in rep.levels]
        emit(args, dump_csv(["n", "F", "A", "ratio"], rows))
    else:
        emit(args, dump_json(rep.as_dict()))
    return 0


def cmd_zeta(args):
    I = irreducible_set(args.I)
    beta = number(args.beta)
    z = kms.zeta(I, beta, mode=args.mode, tol=args.tol, max_level=args.max_level)
    if args.format == "json":
        emit(args, dump_json({"I": I, "beta": beta, **z.as_dict()}))
    else:
        text = f"{float(z.value)!r}\n"
        if z.tail_bound:
            text += f"tail_bound {z.tail_bound!r}\n"
        emit(args, text)
    return 0


def cmd_kms_value(args):
    M = backend_from(args)
    a, b = parse_elem(M, args.a), parse_elem(M, args.b)
    beta = number(args.beta)
    if float(beta) == 1:
        res = kms.psi1_value(M, a, b, levels_from(M, args))
        out = {"value": res["value"], "exact": str(res["value"]), "values": res["values"],
               "deltas": res["deltas"], "monotone": res["monotone"], "level": res["level"],
               "tail_bound": None}
    else:
        I = irreducible_set(args.I) if args.I is not None else M.irreducibles(args.max_level)
        res = kms.psi_beta_value(M, a, b, beta, I, args.max_level)
        out = {"value": res["value"], "tail_bound": res["tail_bound"], "zeta": res["zeta"], "I": I,
               "max_level": args.max_level}
    out.update({"backend": M.prefix, "params": M.params(), "pair": [M.format(a), M.format(b)],
                "beta": beta})
    emit(args, dump_json(out))
    return 0


def cmd_state_eval(args):
    M = backend_from(args)
    s, t = parse_elem(M, args.s), parse_elem(M, args.t)
    x = normalize_pair(M, s, t)
    tau = trace_from(args)
    out = {"backend": M.prefix, "params": M.params(), "monomial": [M.format(x.left), M.format(x.right)],
           "trace": tau.describe()}
    if args.ground:
        out.update({"state": "ground", "value": kms.ground_state_eval(M, tau, x), "tail_bound": 0.0})
    else:
        beta = number(args.beta)
        I = irreducible_set(args.I) if args.I is not None else None
        chain = int_list(args.levels) or None
        sv = kms.finite_type_state_eval(M, tau, beta, x, I, args.max_level, chain=chain)
        out.update({"state": "finite-type", "beta": beta, **sv.as_dict()})
    emit(args, dump_json(out))
    return 0


def cmd_selfsim(args):
    cfg = {"group": args.action or "odometer", "k": args.k or 2, "m": args.m or 1,
           "n": args.n or 2, "digits": args.digits or "D1"}
    A = action_from_config(cfg)
    gens = [A.parse(g) for g in args.g] if args.g else A.generators()
    depth = args.depth if args.depth is not None else 6
    out = {"action": cfg, "depth": depth, "cap": args.cap, "generators": []}
    for g in gens:
        fs = finite_state_check(A, g, args.cap)
        entry = {"g": A.format(g),
                 "finite_state": ({"result": "finite", "size": fs.size} if not isinstance(fs, ExceededCap)
                                  else {"result": "exceeded-cap", "cap": fs.cap, "profile": fs.profile}),
                 "rows": singular_ratios(A, g, depth)}
        if args.mc_samples:
            entry["monte_carlo"] = singular_ratio_mc(A, g, args.mc_depth or depth, args.mc_samples,
                                                     args.seed)
        out["generators"].append(entry)
    if args.format == "csv":
        rows = [{"g": e["g"], **r} for e in out["generators"] for r in e["rows"]]
        emit(args, dump_csv(["g", "depth", "F", "A", "ratio"], rows))
    else:
        emit(args, dump_json(out))
    return 0


def cmd_verify(args):
    M = backend_from(args)
    depth = args.depth if args.depth is not None else 3
    rep = instance_selftest(M, depth, args.level_bound)
    out = rep.as_dict()
    out.update({"backend": M.prefix, "params": M.params(), "depth": depth})
    emit(args, dump_json(out))
    return 0 if rep.ok else 2


COMMANDS = {
    "info": cmd_info, "classes": cmd_classes, "fa-table": cmd_fa_table,
    "regularity": cmd_regularity, "zeta": cmd_zeta, "kms-value": cmd_kms_value,
    "state-eval": cmd_state_eval, "selfsim": cmd_selfsim, "verify": cmd_verify,
}


# -- parser -------------------------------------------------------------------

def _backend_opts(p):
    p.add_argument("--backend", help=" | ".join(BACKENDS))
    p.add_argument("--c", type=int, help="BS parameter c")
    p.add_argument("--d", type=int, help="BS parameter d")
    p.add_argument("--m", type=int, help="shadowed m, or Heisenberg m")
    p.add_argument("--n", type=int, help="Heisenberg n")
    p.add_argument("--q", type=int, help="shift-space q")
    p.add_argument("--pmax", type=int, help="shift-space prime bound")
    p.add_argument("--action", help="Zappa-Szep action: odometer | heisenberg")
    p.add_argument("--k", type=int, help="odometer base")
    p.add_argument("--digits", help="Heisenberg digit set D1 | D2")


def _common(p, default_format="json"):
    p.add_argument("--config", help="JSON file with option defaults")
    p.add_argument("--output", help="output file (relative paths resolve against $%s)" % OUTPUT_ENV)
    p.add_argument("--format", choices=["json", "csv", "text"], default=default_format)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lcmlab", description="Scaled right LCM monoids and their KMS data.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("info", help="backend summary")
    _backend_opts(p)
    _common(p)

    p = sub.add_parser("classes", help="core-equivalence classes at levels")
    _backend_opts(p)
    _common(p)
    p.add_argument("--levels")
    p.add_argument("--depth", type=int)

    p = sub.add_parser("fa-table", help="|F_n|, |A_n| per level")
    _backend_opts(p)
    _common(p, "csv")
    p.add_argument("--a", required=False)
    p.add_argument("--b", default="id")
    p.add_argument("--levels")
    p.add_argument("--depth", type=int)

    p = sub.add_parser("regularity", help="regularity report")
    _backend_opts(p)
    _common(p)
    p.add_argument("--a")
    p.add_argument("--b", default="id")
    p.add_argument("--levels")
    p.add_argument("--depth", type=int)
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--beta")
    p.add_argument("--I")
    p.add_argument("--max-level", type=int)

    p = sub.add_parser("zeta", help="restricted partition function")
    _common(p, "text")
    p.add_argument("--I", default="")
    p.add_argument("--beta", required=False)
    p.add_argument("--mode", choices=["product", "sum"], default="product")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-level", type=int)

    p = sub.add_parser("kms-value", help="psi_1 or psi_beta on v_a v_b^*")
    _backend_opts(p)
    _common(p)
    p.add_argument("--a")
    p.add_argument("--b", default="id")
    p.add_argument("--beta", default="1")
    p.add_argument("--I")
    p.add_argument("--levels", help="divisibility chain for beta = 1")
    p.add_argument("--depth", type=int)
    p.add_argument("--max-level", type=int, default=256)

    p = sub.add_parser("state-eval", help="ground or finite-type state on v_s v_t^*")
    _backend_opts(p)
    _common(p)
    p.add_argument("--s", default="id")
    p.add_argument("--t", default="id")
    p.add_argument("--trace", default="dirac", help="dirac | one | period:m | angle:x")
    p.add_argument("--beta", default="2")
    p.add_argument("--I")
    p.add_argument("--levels", help="divisibility chain for beta = 1")
    p.add_argument("--max-level", type=int, default=64)
    p.add_argument("--ground", action="store_true")

    p = sub.add_parser("selfsim", help="finite-state probe and singular ratios")
    _common(p)
    p.add_argument("--action", default="odometer")
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--digits")
    p.add_argument("--g", action="append", help="group element (repeatable); default generators")
    p.add_argument("--depth", type=int)
    p.add_argument("--cap", type=int, default=10_000)
    p.add_argument("--mc-samples", type=int, default=0)
    p.add_argument("--mc-depth", type=int)

    p = sub.add_parser("verify", help="backend conformance suite")
    _backend_opts(p)
    _common(p)
    p.add_argument("--depth", type=int)
    p.add_argument("--level-bound", type=int, default=16)
    return parser


def _apply_config(parser, argv) -> None:
    """Load --config (if any) as defaults for the chosen subcommand."""
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        with open(known.config) as fh:
            cfg = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {known.config!r}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    subs = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in subs.choices.values():
        dests = {a.dest for a in sp._actions}
        sp.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()
                           if k.replace("-", "_") in dests})


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        if not args.command:
            parser.print_usage(sys.stderr)
            return 1
        needs_backend = args.command not in ("zeta", "selfsim")
        if needs_backend and not args.backend:
            raise UsageError("--backend is required")
        if args.command in ("fa-table", "regularity", "kms-value") and not args.a:
            raise UsageError("--a is required")
        if args.command == "zeta" and args.beta is None:
            raise UsageError("--beta is required")
        return COMMANDS[args.command](args)
    except LevelNotAttained as exc:
        print(f"lcmlab: level not attained: {exc}", file=sys.stderr)
    except DivergenceError as exc:
        print(f"lcmlab: divergent request: {exc}", file=sys.stderr)
    except NoScale as exc:
        print(f"lcmlab: no generalised scale: {exc}", file=sys.stderr)
    except UsageError as exc:
        print(f"lcmlab: usage error: {exc}", file=sys.stderr)
    except LcmlabError as exc:
        print(f"lcmlab: error: {exc}", file=sys.stderr)
    except (ValueError, KeyError) as exc:
        print(f"lcmlab: invalid input: {exc}", file=sys.stderr)
    return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
