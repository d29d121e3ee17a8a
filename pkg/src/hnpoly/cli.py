"""hnpoly command line: one operation per call, or a manifest of runs.

Exit codes: 0 all good, 1 a tolerance check failed, 2 usage or input error,
3 an enumeration budget ran out.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from . import arvol, filtered, graded, lattices, measures, polygons
from .errors import BudgetExceeded

EXIT_OK, EXIT_TOL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
DEFAULT_TOL = 1e-9


class InputError(ValueError):
    pass


# -- JSON plumbing -------------------------------------------------------------


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def atomic_write(path: str, text: str):
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_input(spec, base: Optional[Path] = None):
    """A path to a JSON file, or the JSON object itself."""
    if isinstance(spec, (dict, list)):
        return spec
    if not isinstance(spec, str):
        raise InputError(f"cannot read input {spec!r}")
    p = Path(spec)
    if base is not None and not p.is_absolute():
        p = base / p
    if not p.exists():
        raise InputError(f"missing input file {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}: {exc}") from None


def lookup(result: dict, key: str):
    """Dotted access; integer parts index lists."""
    cur: Any = result
    for part in key.split("."):
        if isinstance(cur, list):
            cur = cur[int(part)]
        else:
            cur = cur[part]
    return cur


# -- operations ----------------------------------------------------------------


@dataclass
class Context:
    inputs: list
    params: dict
    seed: int = 0
    budget: Optional[int] = None
    csv: dict = field(default_factory=dict)  # optional CSV rendering of the result

    def one(self, what: str):
        if not self.inputs:
            raise InputError(f"this operation needs a {what} input")
        return self.inputs[0]

    def two(self, what: str):
        if len(self.inputs) != 2:
            raise InputError(f"this operation needs two {what} inputs")
        return self.inputs

    def get(self, key, default=None, cast=float):
        v = self.params.get(key, default)
        if v is None:
            raise InputError(f"missing parameter {key!r}")
        return cast(v)


def _measure(data) -> measures.AtomicMeasure:
    return measures.AtomicMeasure.from_json(data)


def _poly_result(ctx: Context, P: polygons.Polygon) -> dict:
    ctx.csv["text"] = P.to_csv()
    return P.to_json()


def op_measures(op: str, ctx: Context) -> dict:
    if op == "polygon":
        return _poly_result(ctx, polygons.polygon_of(_measure(ctx.one("measure"))))
    if op == "translate":
        return measures.translate(_measure(ctx.one("measure")), ctx.get("a")).to_json()
    if op == "dilate":
        return measures.dilate(_measure(ctx.one("measure")), ctx.get("eps")).to_json()
    if op == "truncate":
        return measures.truncate(_measure(ctx.one("measure")), ctx.get("alpha")).to_json()
    if op == "dominates":
        a, b = ctx.two("measure")
        return {"dominates": measures.dominates(_measure(a), _measure(b))}
    if op == "w1":
        a, b = ctx.two("measure")
        return {"w1": measures.w1_distance(_measure(a), _measure(b))}
    if op == "positive-part":
        return {"value": measures.positive_part_integral(_measure(ctx.one("measure")), ctx.get("a", 0.0))}
    raise InputError(f"unknown measures operation {op!r}")


def op_polygons(op: str, ctx: Context) -> dict:
    if op == "max":
        t, v = polygons.max_value(polygons.Polygon.from_json(ctx.one("polygon")))
        return {"t": [t.numerator, t.denominator], "value": v}
    if op == "distance":
        a, b = ctx.two("polygon")
        return {"distance": polygons.sup_distance(polygons.Polygon.from_json(a), polygons.Polygon.from_json(b))}
    if op == "dual":
        g = polygons.legendre_dual(polygons.Polygon.from_json(ctx.one("polygon")))
        grid = [float(a) for a in ctx.params.get("a_grid", [])]
        return {"breakpoints": g.breakpoints(), "values": [[a, g(a)] for a in grid]}
    if op == "csv":
        return _poly_result(ctx, polygons.Polygon.from_json(ctx.one("polygon")))
    raise InputError(f"unknown polygons operation {op!r}")


def op_filtered(op: str, ctx: Context) -> dict:
    V = filtered.FilteredSpace.from_json(ctx.one("filtered space"))
    if op == "measure":
        return filtered.measure_of(V).to_json()
    if op == "lambda":
        lo, hi, plus = filtered.lambda_invariants(V)
        return {"lambda_min": lo, "lambda_max": hi, "lambda_plus": plus}
    raise InputError(f"unknown filtered operation {op!r}")


def op_lattice(op: str, ctx: Context) -> dict:
    E = lattices.HermitianLattice.from_json(ctx.one("lattice"))
    budget = ctx.budget or lattices.DEFAULT_BUDGET
    if op == "degree":
        return {"degree": lattices.degree(E), "slope": lattices.slope(E)}
    if op == "h0":
        return {"h0": lattices.h0(E, budget)}
    if op == "minimum":
        return {"first_minimum": lattices.first_minimum(E, budget)}
    if op in ("hn", "degplus"):
        bound = ctx.params.get("search_bound")
        P = lattices.hn_polygon(E, None if bound is None else float(bound), budget)
        if op == "hn":
            return P.to_json()
        return {"deg_plus": P.positive_degree, "mu_plus": P.positive_degree / E.rank, "certified": P.certified}
    raise InputError(f"unknown lattice operation {op!r}")


def op_graded(op: str, ctx: Context) -> dict:
    budget = ctx.budget or graded.DEFAULT_MONOMIAL_BUDGET
    if op == "count":
        cb = graded.counting_bound(ctx.get("q", cast=int), ctx.get("alpha"), ctx.get("beta"), ctx.get("n", cast=int))
        return {"u": cb.u, "v": cb.v, "ratio": float(cb.ratio), "limit": cb.limit}
    model = graded.model_from_json(ctx.one("model"))
    n = ctx.get("n", cast=int)
    if op == "measure":
        return graded.graded_measure(model, n, budget).to_json()
    if op == "lambda":
        rows = graded.lambda_sequences(model, n, budget=budget)
        return {"rows": [[r.n, r.lambda_max, r.lambda_plus] for r in rows]}
    if op == "bigness":
        return graded.bigness_check(model, n, ctx.get("threshold", 0.0), budget).to_json()
    if op == "audit":
        return graded.quasi_filtration_audit(model, n, ctx.get("samples", 20000, int), ctx.seed).to_json()
    raise InputError(f"unknown graded operation {op!r}")


def _grid(v) -> list[float]:
    if isinstance(v, str):
        return [float(x) for x in v.split(",") if x.strip()]
    return [float(x) for x in v]


def op_arvol(op: str, ctx: Context) -> dict:
    F = arvol.SectionFamily.from_json(ctx.one("family"))
    nmax = ctx.get("nmax", cast=int)
    alpha = ctx.params.get("alpha")
    alpha = None if alpha is None else float(alpha)
    prefix = ctx.budget or arvol.PREFIX_BUDGET
    if op == "volume":
        rep = arvol.volume_experiment(F, nmax, ctx.params.get("ns"), prefix)
        ctx.csv["text"] = rep.to_csv()
        return rep.to_json()
    if op == "polygon":
        res = arvol.asymptotic_polygon(F, nmax, alpha)
        ctx.csv["text"] = res.polygon.to_csv()
        return res.to_json()
    if op == "via-volumes":
        res = arvol.polygon_via_volumes(F, _grid(ctx.get("a_grid", cast=lambda x: x)), nmax,
                                        ctx.get("origin_tol", 0.05), prefix)
        ref = arvol.asymptotic_polygon(F, nmax)
        out = res.to_json()
        out["distance_to_asymptotic"] = polygons.sup_distance(res.polygon, ref.polygon)
        ctx.csv["text"] = res.polygon.to_csv()
        return out
    if op == "bigness":
        return arvol.bigness_criterion(F, nmax).to_json()
    if op == "continuity":
        p_list = [int(p) for p in _grid(ctx.get("p_list", "2,4,8", cast=lambda x: x))]
        rows = arvol.continuity_experiment(F, ctx.get("shift", 0.0), alpha, p_list, nmax)
        return {"rows": [[r.p, r.distance] for r in rows]}
    raise InputError(f"unknown arvol operation {op!r}")


MODULES: dict[str, Callable[[str, Context], dict]] = {
    "measures": op_measures,
    "polygons": op_polygons,
    "filtered": op_filtered,
    "lattice": op_lattice,
    "graded": op_graded,
    "arvol": op_arvol,
}

OPS = {
    "measures": ["polygon", "translate", "dilate", "truncate", "dominates", "w1", "positive-part"],
    "polygons": ["max", "distance", "dual", "csv"],
    "filtered": ["measure", "lambda"],
    "lattice": ["degree", "h0", "hn", "degplus", "minimum"],
    "graded": ["measure", "lambda", "bigness", "count", "audit"],
    "arvol": ["volume", "polygon", "via-volumes", "bigness", "continuity"],
}


TWO_INPUTS = {("measures", "dominates"), ("measures", "w1"), ("polygons", "distance")}


def execute(module: str, op: str, ctx: Context) -> dict:
    if module not in MODULES:
        raise InputError(f"unknown module {module!r}")
    return MODULES[module](op, ctx)


@dataclass
class Check:
    key: str
    expected: float
    got: Any
    tol: float

    @property
    def passed(self) -> bool:
        if isinstance(self.expected, bool) or isinstance(self.got, bool):
            return self.got == self.expected
        try:
            return abs(float(self.got) - float(self.expected)) <= self.tol
        except (TypeError, ValueError):
            return False

    def to_json(self) -> dict:
        gap = None
        if not isinstance(self.got, bool) and isinstance(self.got, (int, float)):
            gap = abs(float(self.got) - float(self.expected))
        return {"key": self.key, "expected": self.expected, "got": self.got, "tol": self.tol,
                "gap": gap, "passed": self.passed}


def check_expectations(result: dict, expects, default_tol: float) -> list[Check]:
    out = []
    for e in expects:
        try:
            got = lookup(result, e["key"])
        except (KeyError, IndexError, ValueError, TypeError):
            got = None
        out.append(Check(e["key"], e["value"], got, float(e.get("tol", default_tol))))
    return out


def write_result(result: dict, out: Optional[str], csv_text: Optional[str]):
    if out is None:
        sys.stdout.write(dumps(result))
    elif out.endswith(".csv"):
        if csv_text is None:
            raise InputError("this operation has no CSV form")
        atomic_write(out, csv_text)
    else:
        atomic_write(out, dumps(result))


# -- manifests -----------------------------------------------------------------


@dataclass
class RunOutcome:
    name: str
    status: str  # pass | fail | error | budget
    message: str = ""
    checks: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "message": self.message,
                "checks": [c.to_json() for c in self.checks]}


def run_one(run: dict, base: Path, seed: int, budget: Optional[int], default_tol: float) -> RunOutcome:
    name = str(run.get("name", "?"))
    try:
        module, op = run["module"], run["op"]
        raw = run.get("input")
        if raw is None:
            raw = []
        elif not ((module, op) in TWO_INPUTS and isinstance(raw, list)):
            raw = [raw]
        inputs = [load_input(x, base) for x in raw]
        ctx = Context(inputs, dict(run.get("params", {})), int(run.get("seed", seed)), run.get("budget", budget))
        result = execute(module, op, ctx)
        if run.get("out"):
            out = str(base / run["out"]) if not os.path.isabs(run["out"]) else run["out"]
            write_result(result, out, ctx.csv.get("text"))
    except BudgetExceeded as exc:
        return RunOutcome(name, "budget", str(exc))
    except (InputError, KeyError, ValueError, TypeError) as exc:
        return RunOutcome(name, "error", f"{type(exc).__name__}: {exc}")
    checks = check_expectations(result, run.get("expect", []), default_tol)
    failed = [c for c in checks if not c.passed]
    if failed:
        msg = "; ".join(f"{c.key}: got {c.got}, expected {c.expected} +- {c.tol}" for c in failed)
        return RunOutcome(name, "fail", msg, checks)
    return RunOutcome(name, "pass", "", checks)


def run_manifest(path: str, seed: int = 0, budget: Optional[int] = None,
                 default_tol: float = DEFAULT_TOL) -> tuple[int, dict]:
    data = load_input(path)
    runs = data.get("runs", []) if isinstance(data, dict) else data
    if not isinstance(runs, list):
        raise InputError("a manifest holds a list of runs")
    base = Path(path).resolve().parent
    outcomes = [run_one(r, base, seed, budget, default_tol) for r in runs]
    statuses = {o.status for o in outcomes}
    code = EXIT_OK
    if "error" in statuses:
        code = EXIT_USAGE
    elif "budget" in statuses:
        code = EXIT_BUDGET
    elif "fail" in statuses:
        code = EXIT_TOL
    summary = {
        "runs": [o.to_json() for o in outcomes],
        "passed": sum(o.status == "pass" for o in outcomes),
        "total": len(outcomes),
        "exit_code": code,
    }
    return code, summary


# -- argument parsing ----------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="seed for sampled checks (default 0)")
    p.add_argument("--budget-vectors", type=int, default=None, help="enumeration cap")
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOL, help="default tolerance for --expect")
    p.add_argument("--out", default=None, help="output path (.json or .csv); stdout if absent")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="hnpoly", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="module", required=True)

    run = sub.add_parser("run", parents=[common], help="execute an experiment manifest")
    run.add_argument("manifest")

    for module, ops in OPS.items():
        mp = sub.add_parser(module, help=f"{module} operations")
        osub = mp.add_subparsers(dest="op", required=True)
        for op in ops:
            p = osub.add_parser(op, parents=[common])
            p.add_argument("--in", dest="inputs", action="append", default=[], help="input JSON (repeatable)")
            p.add_argument("--model", dest="inputs", action="append", help="graded model JSON")
            p.add_argument("--family", dest="inputs", action="append", help="section family JSON")
            p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
            p.add_argument("--expect", action="append", default=[], metavar="KEY=VALUE")
            for flag in ("--a", "--eps", "--alpha", "--beta", "--search-bound", "--threshold", "--shift"):
                p.add_argument(flag, type=float, default=None)
            for flag in ("--n", "--nmax", "--q", "--samples"):
                p.add_argument(flag, type=int, default=None)
            p.add_argument("--p-list", default=None)
            p.add_argument("--a-grid", default=None)
    return parser


def _params_from_args(args) -> dict:
    params = {}
    for key in ("a", "eps", "alpha", "beta", "search_bound", "threshold", "shift", "n", "nmax", "q", "samples",
                "p_list", "a_grid"):
        v = getattr(args, key, None)
        if v is not None:
            params[key] = v
    for item in args.param:
        k, _, v = item.partition("=")
        try:
            params[k] = json.loads(v)
        except json.JSONDecodeError:
            params[k] = v
    if "a_grid" in params:
        params["a_grid"] = _grid(params["a_grid"])
    return params


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    if args.module == "run":
        try:
            code, summary = run_manifest(args.manifest, args.seed, args.budget_vectors, args.tolerance)
        except InputError as exc:
            print(f"hnpoly: {exc}", file=sys.stderr)
            return EXIT_USAGE
        for o in summary["runs"]:
            print(f"[{o['status']:>6}] {o['name']}" + (f"  {o['message']}" if o["message"] else ""),
                  file=sys.stderr)
        write_result(summary, args.out, None)
        return code

    try:
        inputs = [load_input(x) for x in args.inputs]
        ctx = Context(inputs, _params_from_args(args), args.seed, args.budget_vectors)
        result = execute(args.module, args.op, ctx)
        write_result(result, args.out, ctx.csv.get("text"))
    except BudgetExceeded as exc:
        print(f"hnpoly: {exc}", file=sys.stderr)
        if exc.partial is not None and hasattr(exc.partial, "to_json"):
            sys.stdout.write(dumps({"partial": exc.partial.to_json()}))
        return EXIT_BUDGET
    except (InputError, ValueError, KeyError) as exc:
        print(f"hnpoly: {exc}", file=sys.stderr)
        return EXIT_USAGE

    expects = []
    for item in args.expect:
        k, _, v = item.partition("=")
        try:
            expects.append({"key": k, "value": json.loads(v)})
        except json.JSONDecodeError:
            print(f"hnpoly: bad --expect {item!r}", file=sys.stderr)
            return EXIT_USAGE
    failed = [c for c in check_expectations(result, expects, args.tolerance) if not c.passed]
    for c in failed:
        print(f"hnpoly: {c.key} = {c.got}, expected {c.expected} +- {c.tol}", file=sys.stderr)
    return EXIT_TOL if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
