"""Command line harness: ``submax solve|sweep|trace|gen|check``.

CSV output uses a header row, ``,`` separators, ``.`` decimals and LF line
endings.  Column sets are fixed per command (schema version 1, see
``SWEEP_COLUMNS`` and ``TRACE_COLUMNS``).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .analysis import build_certificate
from .instances import (
    CoverageInstance,
    GeneratorParams,
    InstanceFormatError,
    coverage_constraint,
    coverage_objective,
    dumps,
    generate,
    load,
)
from .setfn import TOL, check_monotone, check_submodular
from .solvers import EXACT_MAX_N, SOLVERS, SolverConfig

CSV_SCHEMA_VERSION = 1
SWEEP_COLUMNS = ["bound", "solver", "g", "f", "iterations", "oracle_calls", "wall_ms", "repairs"]
TRACE_COLUMNS = ["t", "g", "f", "ghat", "size", "theta_size"]
SOLVE_COLUMNS = ["solver", "budget", "g", "f", "iterations", "oracle_calls", "repairs",
                 "kappa_g", "delta_f", "ratio", "solution"]
DEFAULT_BOUNDS = "50:100:5"
EXHAUSTIVE_CHECK_N = 15


class UsageError(Exception):
    pass


class CommandError(Exception):
    pass


def fmt(x) -> str:
    """Shortest round-trip text for a number; integral values print without '.0'."""
    if isinstance(x, bool) or x is None:
        return "" if x is None else str(x).lower()
    if isinstance(x, int):
        return str(x)
    if math.isfinite(x) and x == int(x) and abs(x) < 2**53:
        return str(int(x))
    return repr(float(x))


def _interval(text: str) -> tuple[int, int]:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            v = int(parts[0])
            return v, v
        if len(parts) == 2:
            return int(parts[0]), int(parts[1])
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected LO,HI integers, got {text!r}")


def parse_bounds(text: str) -> list[float]:
    """``"2,3,5"`` or an inclusive range ``"start:stop:step"``."""
    text = text.strip()
    if not text:
        raise UsageError("--bounds must list at least one budget")
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0 or stop < start:
                raise UsageError(f"bad bound range {text!r}: need step > 0 and stop >= start")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            out = [start + k * step for k in range(count)]
        else:
            out = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"cannot parse bounds {text!r}") from None
    if not out:
        raise UsageError("--bounds must list at least one budget")
    if any(not b >= 0 for b in out):
        raise UsageError("budgets must be >= 0")
    return out


def _add_source(p):
    p.add_argument("--instance", help="instance JSON file")
    p.add_argument("--items", type=int, help="generate: number of items")
    p.add_argument("--elements", type=int, help="generate: number of elements")
    p.add_argument("--degree", type=_interval, default=(1, 5), help="generate: per-item coverage LO,HI (default 1,5)")
    p.add_argument("--value-range", type=_interval, default=(1, 100), help="generate: element values LO,HI (default 1,100)")
    p.add_argument("--seed", type=int, default=0, help="generator / sampling seed (default 0)")
    p.add_argument("--positive-rate", type=float, default=None, help="generate: label elements positive with this probability")


def _params(args) -> GeneratorParams:
    if args.items is None:
        raise UsageError("give --instance or generator flags (--items, --elements)")
    elements = args.elements if args.elements is not None else args.items
    try:
        return GeneratorParams(args.items, elements, tuple(args.degree), tuple(args.value_range),
                               args.seed, args.positive_rate)
    except ValueError as err:
        raise UsageError(str(err)) from None


def _instance(args) -> CoverageInstance:
    if args.instance:
        try:
            return load(args.instance)
        except InstanceFormatError as err:
            raise CommandError(str(err)) from None
    return generate(_params(args))


def _write(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) if not isinstance(x, str) else x for x in r])
    return buf.getvalue()


def _check_result(res, b):
    if res.f_value > b + TOL:
        raise CommandError(f"{res.solver}: solution violates the budget: f={res.f_value} > {b}")
    prev = -math.inf
    for row in res.trace:
        if row.g_value < prev - TOL:
            raise CommandError(f"{res.solver}: objective decreased at iteration {row.t}")
        prev = row.g_value


def _run(solver, g, f, b, max_iters, n):
    if solver == "exact" and n > EXACT_MAX_N:
        raise UsageError(f"exact solver needs n <= {EXACT_MAX_N}, instance has {n} items")
    cfg = SolverConfig(b, max_iterations=max_iters)
    try:
        res = SOLVERS[solver](g, f, cfg)
    except ValueError as err:
        raise CommandError(str(err)) from None
    _check_result(res, b)
    return res


def cmd_solve(args) -> int:
    inst = _instance(args)
    g, f = coverage_objective(inst), coverage_constraint(inst)
    if args.budget is None or not args.budget >= 0:
        raise UsageError("--budget must be a number >= 0")
    res = _run(args.solver, g, f, args.budget, args.max_iters, inst.n_items)
    cert = None
    if args.budget > 0:
        try:
            cert = build_certificate(g, f, args.budget)
        except ValueError:
            cert = None
    sol = " ".join(str(j) for j in res.solution)
    ratio = "n/a" if cert is None else ("vacuous" if cert.vacuous else fmt(cert.ratio))
    if args.format == "csv":
        row = [res.solver, args.budget, res.g_value, res.f_value, res.iterations, res.oracle_calls,
               res.repairs, "" if cert is None else cert.kappa_g, "" if cert is None else cert.delta_f,
               ratio, sol]
        _write(_csv(SOLVE_COLUMNS, [row]), args.output)
        return 0
    lines = [
        f"solver        {res.solver}",
        f"budget        {fmt(args.budget)}",
        f"solution      {{{', '.join(str(j) for j in res.solution)}}}",
        f"g             {fmt(res.g_value)}",
        f"f             {fmt(res.f_value)}",
        f"iterations    {res.iterations}",
        f"oracle calls  {res.oracle_calls}",
        f"repairs       {res.repairs}",
    ]
    if cert is None:
        lines.append("certificate   n/a")
    else:
        lines.append(f"certificate   kappa_g={fmt(cert.kappa_g)} delta_f={fmt(cert.delta_f)} ratio={ratio}")
        if cert.zero_singletons:
            lines.append(f"              zero-value items excluded from curvature: {list(cert.zero_singletons)}")
    _write("\n".join(lines) + "\n", args.output)
    return 0


def _threads() -> int:
    raw = os.environ.get("SUBMAX_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"SUBMAX_THREADS must be an integer, got {raw!r}") from None


def cmd_sweep(args) -> int:
    bounds = parse_bounds(args.bounds)
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    if not solvers:
        raise UsageError("--solvers must name at least one solver")
    for s in solvers:
        if s not in SOLVERS:
            raise UsageError(f"unknown solver {s!r}; choose from {', '.join(SOLVERS)}")
    inst = _instance(args)
    n = inst.n_items
    if ("exact" in solvers or args.with_opt) and n > EXACT_MAX_N:
        raise UsageError(f"exact solver needs n <= {EXACT_MAX_N}, instance has {n} items")
    g, f = coverage_objective(inst), coverage_constraint(inst)
    cells = [(b, s) for b in bounds for s in solvers]

    def run(cell):
        b, s = cell
        t0 = time.perf_counter()
        res = _run(s, g, f, b, args.max_iters, n)
        ms = (time.perf_counter() - t0) * 1e3
        return [b, s, res.g_value, res.f_value, res.iterations, res.oracle_calls,
                round(ms, 3) if args.timing else "", res.repairs]

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(run, cells))
    header = list(SWEEP_COLUMNS)
    if args.with_opt:
        header.append("opt_g")
        opt = {b: SOLVERS["exact"](g, f, SolverConfig(b)).g_value for b in bounds}
        for r in rows:
            r.append(opt[r[0]])
    _write(_csv(header, rows), args.output)
    return 0


def cmd_trace(args) -> int:
    if args.budget is None or not args.budget >= 0:
        raise UsageError("--budget must be a number >= 0")
    inst = _instance(args)
    g, f = coverage_objective(inst), coverage_constraint(inst)
    res = _run(args.solver, g, f, args.budget, args.max_iters, inst.n_items)
    rows = [[r.t, r.g_value, r.f_value, r.ghat_value, len(r.X_t), len(r.theta_hat)] for r in res.trace]
    if args.format == "text":
        text = "".join(f"t={r[0]} g={fmt(r[1])} f={fmt(r[2])} ghat={fmt(r[3])} |X|={r[4]} |theta|={r[5]}\n"
                       for r in rows)
        _write(text, args.output)
    else:
        _write(_csv(TRACE_COLUMNS, rows), args.output)
    return 0


def cmd_gen(args) -> int:
    inst = generate(_params(args))
    text = dumps(inst)
    if args.output:
        _write(text, args.output)
    else:
        sys.stdout.write(text)
        return 0
    total = sum(inst.values[e] for e in inst.objective_elements())
    print(f"n_items={inst.n_items} n_elements={inst.n_elements} total_value={fmt(total)}")
    return 0


def cmd_check(args) -> int:
    inst = _instance(args)
    ok = True
    for oracle in (coverage_objective(inst), coverage_constraint(inst)):
        if oracle.n <= EXHAUSTIVE_CHECK_N:
            mode = "exhaustive"
            sub = check_submodular(oracle, EXHAUSTIVE_CHECK_N, max_report=10)
            mono = check_monotone(oracle, EXHAUSTIVE_CHECK_N)
        else:
            mode = f"sampled({args.samples})"
            sub = check_submodular(oracle, samples=args.samples, seed=args.seed)
            mono = check_monotone(oracle, samples=args.samples, seed=args.seed)
        status = "ok" if not sub and not mono else "FAIL"
        ok = ok and status == "ok"
        print(f"{oracle.name}: {mode} submodular violations={len(sub)} "
              f"monotone violations={len(mono)} {status}")
    print(f"instance: n_items={inst.n_items} n_elements={inst.n_elements} valid")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="submax", description="Budgeted submodular maximization: solve, sweep, trace, gen, check.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one instance at one budget")
    _add_source(s)
    s.add_argument("--budget", type=float, required=True)
    s.add_argument("--solver", choices=list(SOLVERS), default="em")
    s.add_argument("--max-iters", type=int, default=50)
    s.add_argument("--format", choices=["text", "csv"], default="text")
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("sweep", help="run solvers over a list of budgets, CSV out")
    _add_source(s)
    s.add_argument("--bounds", default=DEFAULT_BOUNDS,
                   help=f"comma list or inclusive start:stop:step (default {DEFAULT_BOUNDS}, 11 budgets)")
    s.add_argument("--solvers", default="em,sem,greedy", help="comma list from em,sem,greedy,exact")
    s.add_argument("--with-opt", action="store_true", help="append the exact optimum as column opt_g")
    s.add_argument("--timing", action="store_true", help="fill the wall_ms column (otherwise left empty)")
    s.add_argument("--max-iters", type=int, default=50)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("trace", help="per-iteration CSV of an EM or SEM run")
    _add_source(s)
    s.add_argument("--budget", type=float, required=True)
    s.add_argument("--solver", choices=["em", "sem"], default="em")
    s.add_argument("--max-iters", type=int, default=50)
    s.add_argument("--format", choices=["text", "csv"], default="csv")
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_trace)

    s = sub.add_parser("gen", help="generate a random coverage instance")
    _add_source(s)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("check", help="validate an instance and check submodularity/monotonicity")
    _add_source(s)
    s.add_argument("--samples", type=int, default=2000)
    s.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "max_iters", 1) < 1:
        parser.error("--max-iters must be >= 1")
    try:
        return args.func(args)
    except UsageError as err:
        parser.error(str(err))
    except CommandError as err:
        print(f"submax {args.command}: error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
