"""Command-line driver: ``python -m slicereg <command>`` or ``slicereg <command>``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from . import fibers as Fb
from . import jacobian as Jc
from . import quaternion as Q
from . import registry as R
from . import singular as Sg
from .domain import DomainError
from .slicefn import SliceFunction
from .stem import StemError

EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3


class UsageError(Exception):
    pass


def parse_vector(text: str) -> np.ndarray:
    """``"w,x,y,z"``, a real number, or a unit name such as ``"-j"``."""
    parts = [p for p in text.replace(" ", "").split(",") if p]
    try:
        if len(parts) == 1:
            return R.parse_quaternion(parts[0] if not _is_number(parts[0]) else float(parts[0]))
        if len(parts) == 4:
            return np.array([float(p) for p in parts])
    except (ValueError, R.ASTError) as e:
        raise UsageError(str(e)) from None
    raise UsageError(f"expected 4 comma-separated numbers, got {text!r}")


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def parse_bbox(text: str) -> tuple:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 4:
        raise UsageError("--bbox needs a_min,a_max,b_min,b_max")
    return tuple(parts)


def load(args) -> SliceFunction:
    if not args.fn:
        raise UsageError("--fn is required")
    try:
        f = R.load_function(args.fn)
    except (KeyError, R.ASTError, json.JSONDecodeError, OSError) as e:
        raise UsageError(str(e)) from None
    if args.bbox:
        f = SliceFunction(f.stem, f.domain.with_bbox(parse_bbox(args.bbox)), f.name)
    return f


def emit(obj) -> None:
    print(json.dumps(obj, default=_json_default))


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, Q.Quaternion):
        return o.to_list()
    if isinstance(o, Q.ImaginaryUnit):
        return o.q.to_list()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def write_csv(rows, header, path: str | None) -> None:
    fh = open(path, "w", newline="") if path else io.StringIO()
    w = csv.writer(fh)
    w.writerow(header)
    w.writerows(rows)
    if path:
        fh.close()
    else:
        sys.stdout.write(fh.getvalue())


# -- commands ------------------------------------------------------------------------------------

def cmd_eval(args) -> int:
    f = load(args)
    if not args.x:
        raise UsageError("--x is required")
    emit(f.eval(parse_vector(args.x)).to_list())
    return 0


def cmd_jacobian(args) -> int:
    f = load(args)
    if not args.x:
        raise UsageError("--x is required")
    y = parse_vector(args.x)
    jm = Jc.jacobian_matrix(f, y)
    out = jm.to_json()
    out["det_formula"] = Jc.jacobian_det(f, y, "formula")
    out["det_matrix"] = Jc.jacobian_det(f, y, "matrix")
    out["rank"] = Jc.rank(f, y, args.tol or Jc.RANK_TOL)
    emit(out)
    return 0


def cmd_fiber(args) -> int:
    f = load(args)
    if not args.c:
        raise UsageError("--c is required")
    desc = Fb.solve_fiber(f, parse_vector(args.c), grid=args.grid or Fb.DEFAULT_GRID)
    emit(desc.to_json())
    if args.out and desc.wing is not None:
        _write_wing_csv(desc.wing, f, args)
    return 0


def _write_wing_csv(wing, f, args) -> None:
    z = f.domain.sample_d_plus(args.grid or 400, np.random.default_rng(args.seed))
    ph = wing.phi(z[:, 0], z[:, 1])
    rows = [(a, b, *p) for (a, b), p in zip(z, ph) if np.all(np.isfinite(p))]
    write_csv(rows, ["alpha", "beta", "phi0", "phi1", "phi2", "phi3"], args.out)


def cmd_wings(args) -> int:
    f = load(args)
    rep = Fb.find_wings(f, seed=args.seed)
    emit(rep.to_json())
    if args.out:
        z = f.domain.sample_d_plus(args.grid or 400, np.random.default_rng(args.seed))
        rows = []
        for k, w in enumerate(rep.wings):
            ph = w.phi(z[:, 0], z[:, 1])
            rows += [(k, *w.value.to_list(), a, b, *p)
                     for (a, b), p in zip(z, ph) if np.all(np.isfinite(p))]
        write_csv(rows, ["wing", "c0", "c1", "c2", "c3", "alpha", "beta",
                         "phi0", "phi1", "phi2", "phi3"], args.out)
    return 0


def _triple(f, args):
    kw = {"grid": args.grid} if args.grid else {}
    return Sg.dimension_triple(f, seed=args.seed, **kw)


def cmd_classify(args) -> int:
    f = load(args)
    tr = _triple(f, args)
    out = tr.to_json()
    out["class"] = {k: v for k, v in f.classify().to_json().items() if k != "residuals"}
    out["residuals"] = f.classify().to_json()["residuals"]
    if not tr.whole:
        out["witnesses"] = [p.to_list() for p in tr.evidence["extra"].witnesses[:5]]
        out["degenerate"] = {k: v for k, v in tr.evidence["degenerate"].to_json().items()
                             if k != "curve"}
        out["wings"] = tr.evidence["wings"].to_json()
        out["notes"] = tr.evidence["extra"].notes + ([tr.evidence["violation"]]
                                                     if "violation" in tr.evidence else [])
    emit(out)
    return 0


def cmd_sample_singular(args) -> int:
    f = load(args)
    tr = _triple(f, args)
    if tr.whole:
        raise UsageError("slice constant function: N_f is the whole domain")
    rows = Sg.singular_point_cloud(f, tr, n=args.grid or 200, rng=np.random.default_rng(args.seed))
    write_csv(rows, ["x0", "x1", "x2", "x3", "det", "set"], args.out)
    return 0


def table_rows(seed: int = 42, grid: int | None = None, tol: float | None = None) -> list:
    rows = []
    for e in R.TABLE:
        t0 = time.perf_counter()
        f = e.function()
        kw = {"grid": grid} if grid else {}
        tr = Sg.dimension_triple(f, seed=seed, **kw)
        row = {"row": e.row, "name": e.name, "description": e.description,
               "computed": list(tr.triple) + [tr.n],
               "expected": list(e.triple) + [max(e.triple)]}
        ok = tuple(tr.triple) == tuple(e.triple)
        if e.witness is not None:
            sing = Sg.in_singular_set(f, e.witness, tol or Sg.TOL_SINGULAR)
            dist = Sg.distance_to_df_wf(f, e.witness, tr)
            row["witness"] = {"point": list(e.witness), "singular": sing,
                              "distance": dist if math.isfinite(dist) else "inf"}
            ok = ok and sing and dist > 1e-3
        row["ok"] = ok
        row["seconds"] = round(time.perf_counter() - t0, 3)
        rows.append(row)
    return rows


def cmd_table(args) -> int:
    rows = table_rows(args.seed, args.grid, args.tol)
    for r in rows:
        r.pop("seconds")
    emit({"rows": rows, "ok": all(r["ok"] for r in rows)})
    if args.out:
        write_csv([(r["row"], r["name"], *r["computed"], *r["expected"], r["ok"]) for r in rows],
                  ["row", "name", "d", "w", "m", "n", "d_exp", "w_exp", "m_exp", "n_exp", "ok"],
                  args.out)
    return 0 if all(r["ok"] for r in rows) else EXIT_MISMATCH


def univalence_checks(n: int = 1000, seed: int = 42) -> dict:
    """The boundary-univalence example for ``f(x) = x - x^{-1}`` on ``1/3 < |y| < 4``."""
    f = R.get("xminv")
    out = {}
    f2 = f.eval(2.0).w
    fm = f.eval(-0.5).w
    out["a_values"] = {"f(2)": f2, "f(-1/2)": fm, "pass": f2 == 1.5 and fm == 1.5}

    t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    shells = {}
    ok_b = True
    for r in (1.0 / 3.0, 4.0):
        closed = (r - 1 / r) * np.cos(t) + 1j * (r + 1 / r) * np.sin(t)
        x = np.zeros((n, 4))
        x[:, 0], x[:, 1] = r * np.cos(t), r * np.sin(t)
        val = f.eval_array(x, check=False)
        formula_err = float(np.max(np.abs(val[:, 0] + 1j * val[:, 1] - closed)))
        d = np.abs(closed[:, None] - closed[None, :])
        d[np.diag_indices(n)] = np.inf
        min_gap = float(d.min())
        shells[f"r={r:.6g}"] = {"formula_error": formula_err, "min_pair_distance": min_gap,
                                "max_abs": float(np.abs(closed).max()),
                                "min_abs": float(np.abs(closed).min())}
        ok_b &= formula_err < 1e-12 and min_gap > 0.0
    inner, outer = shells["r=0.333333"], shells["r=4"]
    cross = inner["max_abs"] <= 10 / 3 + 1e-12 and outer["min_abs"] >= 15 / 4 - 1e-12
    out["b_boundary"] = {"shells": shells, "cross_shell": cross, "pass": bool(ok_b and cross)}

    det = Jc.jacobian_det(f, 3.0)
    f3 = f.eval(3.0).w
    fb = f.eval(-1.0 / 3.0).w
    out["c_interior"] = {"det_J(3)": det, "expected": (10 / 9) ** 4,
                         "rel_error": abs(det - (10 / 9) ** 4) / (10 / 9) ** 4,
                         "f(3)": f3, "f(-1/3)": fb,
                         "pass": abs(det - (10 / 9) ** 4) <= 1e-12 * (10 / 9) ** 4
                         and abs(f3 - fb) < 1e-12 and det != 0.0}

    units = Q.random_units(np.random.default_rng(seed), 100)
    on_s = Sg.in_singular_set_array(f, units)
    off = units * 2.0
    off_s = Sg.in_singular_set_array(f, off)
    out["singular_set"] = {"on_S": int(on_s.sum()), "off_S": int(off_s.sum()),
                           "pass": bool(on_s.all() and not off_s.any())}
    out["pass"] = all(v["pass"] for v in out.values() if isinstance(v, dict))
    return out


def cmd_univalence_demo(args) -> int:
    out = univalence_checks(seed=args.seed)
    emit(out)
    return 0 if out["pass"] else EXIT_MISMATCH


COMMANDS = {
    "table": (cmd_table, "reproduce the dimension-triple table"),
    "univalence-demo": (cmd_univalence_demo, "boundary univalence example for x - 1/x"),
    "eval": (cmd_eval, "evaluate f at --x"),
    "jacobian": (cmd_jacobian, "Jacobian matrix, determinant and rank at --x"),
    "fiber": (cmd_fiber, "classify the fiber over --c"),
    "wings": (cmd_wings, "wing set of f"),
    "classify": (cmd_classify, "class flags and dimension triple"),
    "sample-singular": (cmd_sample_singular, "CSV point cloud of the singular set"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slicereg", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        s = sub.add_parser(name, help=help_)
        s.add_argument("--fn", help="registry name, JSON AST or @file.json")
        s.add_argument("--x", help="point w,x,y,z")
        s.add_argument("--c", help="value w,x,y,z")
        s.add_argument("--out", help="CSV output path")
        s.add_argument("--seed", type=int, default=42)
        s.add_argument("--grid", type=int, default=None)
        s.add_argument("--tol", type=float, default=None)
        s.add_argument("--bbox", help="a_min,a_max,b_min,b_max")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fn = COMMANDS[args.command][0]
    try:
        return fn(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, StemError) as e:
        print(f"domain error: {e}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    raise SystemExit(main())
