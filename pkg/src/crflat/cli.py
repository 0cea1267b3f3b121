"""Command-line front end.

    crflat check --family thm54_ii --param D=0.5
    crflat check --form tube --expr "sqrt(t1^2+(1+t2)^2)-1-t2" --expect flat
    crflat param --p "v^2/2" --q "v" --grid-w 0.1
    crflat ode --ode-family case3 --params C=-1 D=0.7 --samples 8
    crflat families

Exit codes: 0 when every expectation holds, 1 on a mismatch, 2 on usage
errors (bad flags, malformed expressions, parameters out of range).
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import catalog, mapar
from .errors import (CRFlatError, ExprError, ParamOutOfRange, ProfileViolation,
                     UnknownFamily)
from .rigid import RigidReport
from .tube import DEFAULT_TOLERANCES, classify

LABELS = ("flat", "nonflat", "two_degenerate", "not_rank1", "out_of_domain")
CLOSED_FORM_TOL = 1e-9
ODE_TOL = 1e-10


class UsageError(Exception):
    pass


# -- serialization -------------------------------------------------------------

def _num(x):
    """JSON-ready number: floats stay floats, complex becomes [re, im]."""
    if x is None:
        return None
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)


def _point_json(point):
    return [_num(c) for c in point]


def report_record(index, rep):
    """Per-point record with a fixed key order."""
    rigid = isinstance(rep, RigidReport)
    ch = rep.s_chain
    rec = {"index": index, "point": _point_json(rep.point)}
    rec["S"] = _num(ch.S) if ch else None
    rec["S1"] = _num(ch.S1) if ch else None
    if rigid:
        rec["S1bar"] = _num(rep.S1bar)
    rec["J"] = _num(rep.J)
    rec["W"] = _num(rep.W)
    res = {"J_scaled": _num(rep.J_scaled), "W_scaled": _num(rep.W_scaled)}
    if rigid:
        res.update(cma=_num(rep.residual_cma), cma_scaled=_num(rep.residual_cma_scaled),
                   cmonge=_num(rep.residual_cmonge),
                   cmonge_scaled=_num(rep.residual_cmonge_scaled),
                   s1111=_num(rep.residual_s1111), polystruct=_num(rep.residual_polystruct),
                   reality=_num(rep.residual_reality))
    else:
        res.update(ma=_num(rep.residual_ma), ma_scaled=_num(rep.residual_ma_scaled),
                   monge=_num(rep.residual_monge),
                   monge_scaled=_num(rep.residual_monge_scaled))
    rec["residuals"] = res
    rec["predicates"] = {k: bool(v) for k, v in rep.predicates.items()}
    rec["flags"] = {k: bool(v) for k, v in rep.flags.items()}
    rec["label"] = classify(rep)
    rec["guard"] = rep.guard
    return rec


def _flatten(rec, prefix=""):
    out = {}
    for k, v in rec.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            for i, item in enumerate(v):
                if isinstance(item, list):
                    out[f"{key}.{i}.re"], out[f"{key}.{i}.im"] = item
                else:
                    out[f"{key}.{i}"] = item
        else:
            out[key] = v
    return out


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def to_csv(rows):
    """CSV of flattened records; columns in first-seen order across rows."""
    flat = [_flatten(r) for r in rows]
    cols = []
    for f in flat:
        cols.extend(k for k in f if k not in cols)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for f in flat:
        w.writerow([_csv_cell(f.get(c)) for c in cols])
    return buf.getvalue()


def to_json(doc):
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def _max(values):
    """Largest value, skipping None and NaN; list entries contribute their largest |item|."""
    vals = []
    for v in values:
        if isinstance(v, list):
            v = max(abs(x) for x in v) if v else None
        if v is not None and not math.isnan(v):
            vals.append(v)
    return max(vals) if vals else None


def summarize(records, expected):
    labels = [r["label"] for r in records]
    keys = sorted({k for r in records for k in r["residuals"]})
    return {
        "n_points": len(records),
        "labels": {lab: labels.count(lab) for lab in LABELS},
        "max_residuals": {k: _max(r["residuals"][k] for r in records) for k in keys},
        "expected": expected,
        "expectation_met": catalog.expectation_met(expected, labels),
    }


# -- argument handling ---------------------------------------------------------

def _kv_pairs(items):
    out = {}
    for item in items or []:
        for part in item.split(","):
            if not part:
                continue
            if "=" not in part:
                raise UsageError(f"expected K=V, got {part!r}")
            k, v = part.split("=", 1)
            try:
                out[k.strip()] = float(eval_number(v.strip()))
            except ValueError as exc:
                raise UsageError(f"bad value for {k}: {v!r}") from exc
    return out


def eval_number(text):
    """A real number, also accepting constant expressions such as pi/4."""
    try:
        return float(text)
    except ValueError:
        pass
    from . import expr as _expr
    try:
        val = _expr.eval_scalar(_expr.parse(text, "tube"), {"t1": 0.0, "t2": 0.0})
    except ExprError as exc:
        raise ValueError(str(exc)) from exc
    if isinstance(val, complex):
        raise ValueError(f"{text!r} is not real")
    return float(val)


def _gauge(text):
    if text is None:
        return None
    try:
        return [complex(c.replace(" ", "")) for c in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad gauge coefficients {text!r}") from exc


def _tolerances(args):
    return DEFAULT_TOLERANCES.override(flat=args.tol_flat, sing=args.tol_sing)


def _config(args, **extra):
    cfg = {"subcommand": args.command}
    cfg.update(extra)
    if hasattr(args, "order"):
        cfg["order"] = args.order
        tol = _tolerances(args)
        cfg["tolerances"] = {"flat": tol.flat, "sing": tol.sing, "degeneracy": tol.degeneracy,
                             "rank": tol.rank, "hessian": tol.hessian, "reality": tol.reality}
    return cfg


# -- subcommands ---------------------------------------------------------------

def run_check(args):
    if args.family and args.expr:
        raise UsageError("give either --family or --expr, not both")
    if args.family:
        spec = catalog.make_family(args.family, _kv_pairs(args.param), gauge=_gauge(args.gauge))
        expected = args.expect or spec.expected
    elif args.expr:
        if args.form is None:
            raise UsageError("--expr needs --form tube|rigid")
        spec = catalog.expr_spec(args.expr, args.form)
        expected = args.expect or "flat"
    else:
        raise UsageError("check needs --family NAME or --form F --expr STR")
    try:
        points = catalog.default_grid(spec.form, args.grid_center, args.grid_halfwidth,
                                      args.grid_n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    reps = catalog.evaluate_grid(spec, points, _tolerances(args), args.order)
    records = [report_record(i, r) for i, r in enumerate(reps)]
    source = ({"family": spec.name, "params": spec.params, "gauge": _num_list(_gauge(args.gauge))}
              if args.family else {"expr": args.expr})
    cfg = _config(args, form=spec.form, source=source,
                  grid={"center": args.grid_center, "halfwidth": args.grid_halfwidth,
                        "n": args.grid_n})
    summary = summarize(records, expected)
    return {"config": cfg, "points": records, "summary": summary}, records, summary["expectation_met"]


def _num_list(xs):
    return None if xs is None else [_num(x) for x in xs]


def run_param(args):
    profile = mapar.PQProfile(args.p, args.q, tuple(args.interval))
    tol = _tolerances(args)
    cfg = _config(args, p=args.p, q=args.q, interval=list(args.interval),
                  grid={"v_halfwidth": args.grid_halfwidth, "w_halfwidth": args.grid_w,
                        "n": args.grid_n})
    try:
        diag = mapar.pq_validate(profile)
    except ProfileViolation as exc:
        doc = {"config": cfg,
               "validation": {"passed": False, "condition": exc.condition, "at": exc.at},
               "points": [], "summary": {"expectation_met": False}}
        return doc, [], False
    is_const, dev = mapar.firstcur_check(profile)
    h, n = args.grid_halfwidth, args.grid_n
    vs = [0.0] if n == 1 else [-h + 2 * h * k / (n - 1) for k in range(n)]
    ws = [0.0] if n == 1 else [-args.grid_w + 2 * args.grid_w * k / (n - 1) for k in range(n)]
    spec = catalog.HypersurfaceSpec("param", "tube", None, profile=profile)
    records = []
    for v in vs:
        f1 = mapar.final1_residuals(profile, v)
        m_raw, m_scaled = mapar.monge_residual_1d(profile.p_expr, v)
        for w in ws:
            t = mapar.forward_map(profile, v, w)
            rep = catalog.evaluate_point(spec, t, tol, args.order)
            rec = report_record(len(records), rep)
            rec["v"], rec["w"] = float(v), float(w)
            try:
                cf = mapar.closed_form_residuals(profile, v, w, args.order)["max"]
            except CRFlatError:
                cf = None
            rec["residuals"].update(closed_form=_num(cf),
                                    final1=[float(x) for x in f1["signed"]],
                                    final1_scaled=[float(x) for x in f1["scaled"]],
                                    monge_1d=float(m_raw), monge_1d_scaled=float(m_scaled))
            records.append(rec)
    expected = args.expect or "unknown"
    summary = summarize(records, expected)
    inside = [r for r in records if r["label"] != "out_of_domain"]
    ma_ok = all(r["residuals"]["ma_scaled"] < tol.rank for r in inside)
    cf_ok = all(r["residuals"]["closed_form"] is not None
                and r["residuals"]["closed_form"] < CLOSED_FORM_TOL for r in inside)
    summary.update(ma_ok=ma_ok, closed_form_ok=cf_ok)
    ok = bool(inside) and ma_ok and cf_ok and summary["expectation_met"]
    summary["expectation_met"] = ok
    doc = {"config": cfg,
           "validation": {"passed": True, "p0": diag.p0, "q0": diag.q0,
                          "min_qprime": diag.min_qprime, "min_abs_pdd": diag.min_abs_pdd,
                          "n_samples": diag.n_samples},
           "firstcur": {"is_constant": bool(is_const), "max_deviation": float(dev)},
           "points": records, "summary": summary}
    return doc, records, ok


def run_ode(args):
    params = _kv_pairs(args.params)
    sigma = int(params.pop("sigma", 1))
    try:
        fam = mapar.OdeFamily(args.ode_family, sigma=sigma, **params)
    except TypeError as exc:
        raise UsageError(f"unknown ODE parameter in {sorted(params)}") from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    c, h, n = args.center, args.halfwidth, args.samples
    xs = [c] if n == 1 else [c - h + 2 * h * k / (n - 1) for k in range(n)]
    records = []
    for i, x in enumerate(xs):
        rec = {"index": i, "x": float(x)}
        try:
            r = mapar.liouville_residuals(fam, x)
            rec.update(g=r["g"], g_1=r["g_1"], g_2=r["g_2"], ode=r["ode"],
                       first_integral=r["first_integral"], C_recovered=r["C_recovered"],
                       label="ok" if max(r["ode"], r["first_integral"]) < args.tol_ode else "fail",
                       guard=None)
        except CRFlatError as exc:
            rec.update(g=None, g_1=None, g_2=None, ode=None, first_integral=None,
                       C_recovered=None, label="out_of_domain", guard=str(exc))
        if args.p:
            raw, sc = mapar.monge_residual_1d(args.p, x)
            rec["monge_1d"], rec["monge_1d_scaled"] = float(raw), float(sc)
        records.append(rec)
    inside = [r for r in records if r["label"] != "out_of_domain"]
    ok = bool(inside) and all(r["label"] == "ok" for r in inside)
    if args.p:
        ok = ok and all(r["monge_1d_scaled"] < args.tol_ode for r in records)
    cfg = {"subcommand": "ode", "family": fam.family,
           "params": {"sigma": fam.sigma, "C": fam.C, "D": fam.D, "beta": fam.beta},
           "samples": {"center": c, "halfwidth": h, "n": n}, "tol_ode": args.tol_ode,
           "p": args.p}
    summary = {"n_points": len(records),
               "n_out_of_domain": len(records) - len(inside),
               "max_ode": _max(r["ode"] for r in records),
               "max_first_integral": _max(r["first_integral"] for r in records),
               "expectation_met": ok}
    if args.p:
        summary["max_monge_1d_scaled"] = _max(r["monge_1d_scaled"] for r in records)
    return {"config": cfg, "points": records, "summary": summary}, records, ok


def run_families(args):
    rows = [{"name": n, "form": f, "expected": e, "params": p, "description": d}
            for n, f, e, p, d in catalog.list_families()]
    return {"config": {"subcommand": "families"}, "families": rows}, rows, True


# -- parser --------------------------------------------------------------------

def _order(text):
    n = int(text)
    if not 5 <= n <= 8:
        raise argparse.ArgumentTypeError(f"order must be in [5, 8], got {n}")
    return n


def _positive_int(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def _real(text):
    try:
        return eval_number(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser():
    ap = argparse.ArgumentParser(prog="crflat", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def output(p):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write the report here instead of stdout")

    def numerics(p):
        p.add_argument("--order", type=_order, default=6, help="jet order, 5..8 (default 6)")
        p.add_argument("--tol-flat", type=float, help="scaled |J|, |W| threshold")
        p.add_argument("--tol-sing", type=float, help="|S1| below which J uses the reduced formula")
        p.add_argument("--grid-halfwidth", type=float, default=catalog.DEFAULT_HALFWIDTH)
        p.add_argument("--grid-n", type=_positive_int, default=catalog.DEFAULT_GRID_N)
        p.add_argument("--expect", choices=("flat", "nonflat", "unknown"))

    p = sub.add_parser("check", help="evaluate invariants on a grid")
    p.add_argument("--family")
    p.add_argument("--param", nargs="+", metavar="K=V")
    p.add_argument("--gauge", help="comma-separated complex coefficients of u(z2)")
    p.add_argument("--form", choices=("tube", "rigid"))
    p.add_argument("--expr")
    p.add_argument("--grid-center", type=_real, nargs="+",
                   help="one value, or one per real coordinate (2 for tube, 4 for rigid)")
    numerics(p)
    output(p)

    p = sub.add_parser("param", help="Monge-Ampere tube from a (p, q) profile")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--grid-w", type=float, default=0.1, help="half-width of the w range")
    p.add_argument("--interval", type=_real, nargs=2, default=(-0.5, 0.5), metavar=("LO", "HI"))
    numerics(p)
    output(p)

    p = sub.add_parser("ode", help="Liouville-type ODE residuals")
    p.add_argument("--ode-family", required=True, choices=sorted(mapar.FAMILY_RANGES))
    p.add_argument("--params", nargs="*", metavar="K=V", help="sigma, C, D, beta")
    p.add_argument("--samples", type=_positive_int, default=8)
    p.add_argument("--center", type=_real, default=0.0)
    p.add_argument("--halfwidth", type=float, default=0.2)
    p.add_argument("--tol-ode", type=float, default=ODE_TOL)
    p.add_argument("--p", help="also tabulate the one-variable Monge residual of p(v) at the samples")
    output(p)

    p = sub.add_parser("families", help="list built-in families")
    output(p)
    return ap


RUNNERS = {"check": run_check, "param": run_param, "ode": run_ode, "families": run_families}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        doc, rows, ok = RUNNERS[args.command](args)
    except (UsageError, ExprError, ParamOutOfRange, UnknownFamily, ProfileViolation) as exc:
        msg = exc.args[0] if isinstance(exc, UnknownFamily) else str(exc)
        print(f"crflat: error: {msg}", file=sys.stderr)
        return 2
    text = to_csv(rows) if args.format == "csv" else to_json(doc)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
