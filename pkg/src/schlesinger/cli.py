"""Command-line front end.

Exit codes: 0 success, 1 verification failure (report on stdout), 2 usage or
input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

import numpy as np

from .errors import SchlesingerError
from .fuchsian import INF, eigenvalue_condition, random_sl2_system
from .io import SystemFileError, complex_json, format_system, load_system

DEFAULT_SEED = 20240917
log = logging.getLogger("schlesinger")


class UsageError(Exception):
    pass


def _complex_arg(text):
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _t_range(text):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError("expected t0:t1 or t0:t1:count")
    try:
        t0, t1 = float(parts[0]), float(parts[1])
        count = int(parts[2]) if len(parts) == 3 else 11
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad t-range {text!r}") from None
    if count < 2:
        raise argparse.ArgumentTypeError("t-range needs at least two points")
    return t0, t1, count


def _system(args, poles=None):
    if getattr(args, "system", None):
        return load_system(args.system)
    rng = np.random.default_rng(args.seed)
    if poles is None:
        poles = [0.0, 1.0, 0.3, INF]
    lam = [complex(rng.uniform(0.1, 0.4), rng.uniform(-0.05, 0.05)) for _ in poles]
    return random_sl2_system(rng, lam, poles=poles)


def _emit(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(obj):
    return json.dumps(complex_json(obj), indent=2, sort_keys=True) + "\n"


def _fmt(z):
    z = complex(z)
    return f"{z.real:+.10f}{z.imag:+.10f}i"


# subcommands -----------------------------------------------------------------------

def cmd_describe(args):
    S = _system(args)
    rows = []
    for k, (p, B) in enumerate(zip(S.poles, S.residues)):
        ev = np.linalg.eigvals(B)
        rows.append({"index": k + 1, "pole": "inf" if p is INF else p,
                     "marking": S.marking[k], "eigenvalues": sorted(ev, key=lambda v: (v.real, v.imag))})
    report = {"gauge": S.gauge, "n": S.n, "poles": rows,
              "eigenvalue_condition": bool(eigenvalue_condition(S.marking))}
    if args.format == "json":
        return _emit(args, _dumps(report)), 0
    lines = [f"gauge {S.gauge}, n = {S.n}, eigenvalue condition: {report['eigenvalue_condition']}"]
    for r in rows:
        pole = "inf" if r["pole"] == "inf" else _fmt(r["pole"])
        lines.append(f"  {r['index']:>2}  pole {pole:>30}  marking {_fmt(r['marking'])}")
    return _emit(args, "\n".join(lines) + "\n"), 0


def cmd_transform(args):
    from .weyl import act_on_system, parse_word
    if not args.word:
        raise UsageError("transform needs --word")
    S = _system(args)
    try:
        word = parse_word(args.word)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return _emit(args, format_system(act_on_system(word, S))), 0


def cmd_monodromy(args):
    from .monodromy import (LoopPlan, default_plan, local_exponent_error, monodromy,
                            product_error)
    S = _system(args)
    plan = default_plan(S, base=args.plan_base)
    rep = monodromy(S, plan, tol=args.tol or 1e-12)
    report = {"order": [k + 1 for k in plan.order], "base": plan.base,
              "matrices": {str(k + 1): M for k, M in rep.by_pole().items()},
              "product_error": product_error(rep),
              "local_exponent_error": local_exponent_error(rep, S)}
    if args.format == "json":
        return _emit(args, _dumps(report)), 0
    lines = [f"base point {_fmt(plan.base)}, loop order {report['order']}"]
    for k, M in rep.by_pole().items():
        lines.append(f"  M{k + 1} = [[{_fmt(M[0, 0])}, {_fmt(M[0, 1])}], [{_fmt(M[1, 0])}, {_fmt(M[1, 1])}]]")
    lines.append(f"product error {report['product_error']:.3e}, "
                 f"local exponent error {report['local_exponent_error']:.3e}")
    return _emit(args, "\n".join(lines) + "\n"), 0


def _verify_gauss(args, rng):
    from .special import HypergeomParams, verify_gauss_relation
    rows = []
    for _ in range(args.count):
        a, b, c = rng.uniform(0.1, 0.9, 3) + 1j * rng.uniform(-0.2, 0.2, 3)
        for z in (0.1, 0.3j, -0.25):
            r = verify_gauss_relation(HypergeomParams(a, b, c + 0.5), z)
            rows.append({"a": a, "b": b, "c": c + 0.5, "z": z, "residual": r["max"]})
    return rows, "residual"


def _verify_heun(args, rng):
    from .special import HeunParams, verify_heun_relation
    rows = []
    for _ in range(args.count):
        al, be, ga, de = rng.uniform(0.2, 1.4, 4)
        p = HeunParams(3.0, rng.uniform(-0.5, 0.5), al, be, ga + 0.3, de)
        r = verify_heun_relation(p, 0.05)
        rows.append({"a": p.a, "q": p.q, "alpha": al, "beta": be, "gamma": p.gamma,
                     "delta": de, "z": 0.05, "residual": r["fitted_residual"],
                     "residual_as_stated": r["residual_as_stated"], "q_hat": r["q_hat"],
                     "q_printed": r["q_printed"]})
    return rows, "residual"


def _verify_series(args, rng):
    from .special import HeunParams, heun_ode, heun_series
    rows = []
    for _ in range(args.count):
        al, be, ga, de = rng.uniform(0.2, 1.4, 4)
        p = HeunParams(3.0, rng.uniform(-0.5, 0.5), al, be, ga, de)
        ode = heun_ode(p.a, p.q, p.alpha, p.beta, p.gamma, p.delta)
        for z in (0.1, 0.3j, -0.3):
            y = heun_series(p, z, nderiv=2, nterms=40)
            rows.append({"alpha": al, "beta": be, "gamma": ga, "delta": de, "q": p.q, "z": z,
                         "residual": ode.residual(*y, z)})
    return rows, "residual"


VERIFIERS = {"gauss": (_verify_gauss, 1e-10), "heun": (_verify_heun, 1e-8),
             "series": (_verify_series, 1e-9)}


def cmd_verify(args):
    which = [k for k in VERIFIERS if getattr(args, k)]
    if len(which) != 1:
        raise UsageError("verify needs exactly one of --gauss, --heun, --series")
    fn, default_tol = VERIFIERS[which[0]]
    tol = args.tol or default_tol
    rng = np.random.default_rng(args.seed)
    rows, key = fn(args, rng)
    failures = [r for r in rows if not r[key] < tol]
    report = {"check": which[0], "seed": args.seed, "tol": tol, "rows": rows,
              "passed": not failures, "failures": len(failures)}
    if args.format == "json" or failures:
        _emit(args, _dumps(report))
    else:
        lines = [f"{which[0]} check, seed {args.seed}, tol {tol:.1e}"]
        for r in rows:
            params = ", ".join(f"{k}={_fmt(v) if isinstance(v, complex) else f'{v:.6g}'}"
                               for k, v in r.items() if k != key and not isinstance(v, str))
            lines.append(f"  {r[key]:.3e}  {params}")
        lines.append(f"all {len(rows)} residuals below {tol:.1e}")
        _emit(args, "\n".join(lines) + "\n")
    return None, 0 if not failures else 1


def cmd_flow(args):
    from .painleve import (HamiltonianState, hamilton_flow, hamiltonian, schlesinger_flow,
                           state_from_system, xp_coordinates, chart_params, normalize_infinity)
    if args.schlesinger == args.pvi:
        raise UsageError("flow needs exactly one of --schlesinger, --pvi")
    t0, t1, count = args.t_range or (0.3, 0.6, 11)
    S = _system(args, poles=[0.0, 1.0, t0, INF])
    kt = [k for k, p in enumerate(S.poles) if p is not INF and complex(p) not in (0, 1)]
    if len(kt) != 1 or abs(S.poles[kt[0]] - t0) > 1e-12:
        raise UsageError("flow needs a system with poles 0, 1, t0, inf where t0 starts the t-range")
    S = normalize_infinity(S)
    ts = np.linspace(t0, t1, count)
    state, P = state_from_system(S)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = ["t", "x_re", "x_im", "p_re", "p_im"]
    header += [f"{n}_{part}" for n in ("l0", "l1", "lt", "linf") for part in ("re", "im")]
    header += ["H_re", "H_im", "monodromy_drift"]
    writer.writerow(header)
    if args.schlesinger:
        from .monodromy import compare_projective, monodromy
        systems = schlesinger_flow(S, t1, tol=args.tol or 1e-12, t_eval=ts)
        checkpoints = {0, count // 2, count - 1}
        ref = monodromy(S)
        for m, s in enumerate(systems):
            st = xp_coordinates(s)
            Pm = chart_params(s)
            drift = ""
            if m in checkpoints:
                drift = f"{compare_projective(ref, monodromy(s, ref.plan))['residual']:.3e}"
            writer.writerow(_flow_row(ts[m], st, Pm, hamiltonian(st.x, st.p, st.t, Pm)) + [drift])
    else:
        traj = hamilton_flow(HamiltonianState(state.x, state.p, t0), P, t1,
                             tol=args.tol or 1e-12, t_eval=ts)
        for t, x, p in zip(traj.t, traj.x, traj.p):
            st = HamiltonianState(x, p, complex(t))
            writer.writerow(_flow_row(t, st, P, hamiltonian(x, p, t, P)) + [""])
    return _emit(args, out.getvalue()), 0


def _flow_row(t, st, P, H):
    row = [f"{complex(t).real:.12g}"]
    for v in (st.x, st.p, *P.as_tuple(), H):
        v = complex(v)
        row += [repr(float(v.real)), repr(float(v.imag))]
    return row


def cmd_enumerate(args):
    from .special import HeunParams, HypergeomParams, heun_expressions, kummer_solutions
    if args.kummer == args.heun:
        raise UsageError("enumerate needs exactly one of --kummer, --heun")
    if args.kummer:
        vals = args.params or [0.31, 0.57, 1.23]
        if len(vals) != 3:
            raise UsageError("--params for --kummer takes a, b, c")
        exprs = kummer_solutions(HypergeomParams(*vals))
    else:
        vals = args.params or [3.0, 0.31, 0.4, 0.6, 1.2, 0.9]
        if len(vals) != 6:
            raise UsageError("--params for --heun takes a, q, alpha, beta, gamma, delta")
        exprs = heun_expressions(HeunParams(*vals))
    rows = [{"index": k + 1, "sources": list(e.sources), "label": e.label(),
             "residual": e.ode_residual()} for k, e in enumerate(exprs)]
    if args.format == "json":
        return _emit(args, _dumps({"count": len(rows), "rows": rows})), 0
    lines = [f"{r['index']:>3}  {'->'.join(r['sources'])}  {r['label']}  res {r['residual']:.1e}"
             for r in rows]
    lines.append(f"{len(rows)} expressions")
    return _emit(args, "\n".join(lines) + "\n"), 0


def cmd_coxeter(args):
    from .weyl import coxeter_check
    results = [coxeter_check(n, rng=np.random.default_rng(args.seed)) for n in args.n]
    failed = [r for r in results if r["first_violation"] is not None
              or r["orbit_size"] != r["expected_orbit_size"]]
    if args.format == "json" or failed:
        _emit(args, _dumps({"results": results, "passed": not failed}))
    else:
        lines = []
        for r in results:
            lines.append(f"n = {r['n']}: {len(r['relations'])} relations hold, "
                         f"finite orbit {r['orbit_size']} (expected {r['expected_orbit_size']})")
        _emit(args, "\n".join(lines) + "\n")
    return None, 0 if not failed else 1


COMMANDS = {"describe": cmd_describe, "transform": cmd_transform, "monodromy": cmd_monodromy,
            "verify": cmd_verify, "flow": cmd_flow, "enumerate": cmd_enumerate,
            "coxeter": cmd_coxeter}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"random seed (default {DEFAULT_SEED})")
    common.add_argument("--tol", type=float, default=None, help="tolerance override")
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", default=None, help="write output to this file")
    parser = argparse.ArgumentParser(prog="schlesinger",
                                     description="Schlesinger transformations of rank-2 Fuchsian systems")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("describe", "transform", "monodromy"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("system", nargs="?", help="system file (random system when omitted)")
        if name == "transform":
            p.add_argument("--word", help='generator word, e.g. "t12.s1.p23"')
        if name == "monodromy":
            p.add_argument("--plan-base", type=_complex_arg, default=None,
                           help="base point of the loops, e.g. 2-3i")
    p = sub.add_parser("verify", parents=[common])
    for k in VERIFIERS:
        p.add_argument(f"--{k}", action="store_true")
    p.add_argument("--count", type=int, default=20, help="number of random parameter sets")
    p = sub.add_parser("flow", parents=[common])
    p.add_argument("system", nargs="?")
    p.add_argument("--schlesinger", action="store_true")
    p.add_argument("--pvi", action="store_true")
    p.add_argument("--t-range", type=_t_range, default=None, help="t0:t1[:count]")
    p = sub.add_parser("enumerate", parents=[common])
    p.add_argument("--kummer", action="store_true")
    p.add_argument("--heun", action="store_true")
    p.add_argument("--params", type=_complex_arg, nargs="+", default=None)
    p = sub.add_parser("coxeter", parents=[common])
    p.add_argument("--n", type=int, nargs="+", default=[3, 4, 5])
    return parser


def main(argv=None):
    logging.basicConfig(level=os.environ.get("SCHLES_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _, code = COMMANDS[args.command](args)
    except (UsageError, SystemFileError, FileNotFoundError) as exc:
        print(f"schlesinger {args.command}: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except SchlesingerError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 1
    return code


if __name__ == "__main__":
    sys.exit(main())
