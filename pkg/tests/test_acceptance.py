"""Acceptance criteria 1-9.  Each test records one PASS/FAIL line that is
printed in the terminal summary."""

import math
import statistics
import subprocess
import sys
import time
from collections import Counter

import numpy as np
import pytest

import submax.solvers as solvers_mod
from submax import (
    GeneratorParams,
    SolverConfig,
    SubsetMask,
    build_certificate,
    coverage_constraint,
    coverage_objective,
    curvature,
    generate,
    solve_em,
    solve_exact,
    solve_greedy,
    solve_sem,
    value_table,
    verify_proposition3,
    verify_theorem2,
)
from submax.bounds import (
    alt_upper_bound_rows,
    lower_bound_rows,
    lower_bound_weight_table,
    upper_bound_rows,
)

from conftest import record

pytestmark = pytest.mark.acceptance
TOL = 1e-9


def pair(inst):
    return coverage_objective(inst), coverage_constraint(inst)


# -- shared instance families ----------------------------------------------

def small_instances():
    """200 seeded n_items=10 instances: sparse, dense and labeled coverage."""
    out = []
    for seed in range(200):
        kind = seed % 4
        if kind == 0:
            p = GeneratorParams(10, 30, (1, 5), seed=seed)
        elif kind == 1:
            p = GeneratorParams(10, 10, (2, 6), seed=seed)
        elif kind == 2:
            p = GeneratorParams(10, 40, (3, 12), seed=seed)
        else:
            p = GeneratorParams(10, 30, (1, 6), seed=seed, positive_rate=0.5)
        out.append(generate(p))
    return out


@pytest.fixture(scope="module")
def small():
    return small_instances()


@pytest.fixture(scope="module")
def variational_cells():
    """500 (instance, bound) cells with both EM and SEM results."""
    cells = []
    for seed in range(50):
        n = (20, 30, 40, 50)[seed % 4]
        kind = seed % 3
        if kind == 0:
            p = GeneratorParams(n, 3 * n, (1, 5), seed=1000 + seed)
        elif kind == 1:
            p = GeneratorParams(n, n, (8, 12), seed=1000 + seed)
        else:
            p = GeneratorParams(n, 3 * n, (2, 8), seed=1000 + seed, positive_rate=0.3)
        g, f = pair(generate(p))
        total = f(SubsetMask.full(n))
        for k in range(10):
            b = round(total * (0.05 + 0.1 * k))
            cfg = SolverConfig(b)
            cells.append((seed, b, f, solve_em(g, f, cfg), solve_sem(g, f, cfg)))
    return cells


# -- 1 ---------------------------------------------------------------------

def bound_violations(inst):
    """Exhaustive bound checks on every (anchor, subset) pair."""
    g, f = pair(inst)
    n = g.n
    gt, ft = value_table(g), value_table(f)
    masks = np.arange(1 << n)
    counts = Counter()

    L = lower_bound_rows(lower_bound_weight_table(gt, n), n)
    counts["lower"] = int(np.sum(L > gt[None, :] + TOL))
    counts["tight"] = int(np.sum(np.abs(L[masks, masks] - gt) > TOL))

    U = upper_bound_rows(ft, n, masks)
    counts["upper"] = int(np.sum(U < ft[None, :] - TOL))
    counts["upper tight"] = int(np.sum(np.abs(U[masks, masks] - ft) > TOL))
    # the divergence is U - f: nonnegative, zero on the diagonal
    counts["divergence"] = counts["upper"]
    V = alt_upper_bound_rows(ft, n, masks)
    counts["alt upper"] = int(np.sum(V < ft[None, :] - TOL))

    # theta monotonicity along the chain {} <= A & Y <= A
    U_empty = upper_bound_rows(ft, n, masks, 0)
    U_anchor = upper_bound_rows(ft, n, masks, masks[:, None])
    counts["theta chain"] = int(np.sum(U_empty < U - TOL) + np.sum(U < U_anchor - TOL))
    # and for every single-step enlargement theta - i -> theta, which
    # chains into any theta1 <= theta2: f(j | theta - i) >= f(j | theta)
    for i in range(n):
        with_i = masks[(masks >> i) & 1 == 1]
        for j in range(n):
            if j == i:
                continue
            t = with_i[(with_i >> j) & 1 == 0]
            drop = ft[(t & ~(1 << i)) | (1 << j)] - ft[t & ~(1 << i)]
            keep = ft[t | (1 << j)] - ft[t]
            counts["theta step"] += int(np.sum(drop < keep - TOL))
    return counts


def test_criterion_1_bound_correctness(small):
    start = time.perf_counter()
    total = Counter()
    for inst in small:
        total.update(bound_violations(inst))
    elapsed = time.perf_counter() - start
    bad = sum(total.values())
    ok = bad == 0 and elapsed < 60
    record(1, ok, f"200 instances, {dict(total) or 'no'} violations, {elapsed:.1f}s (limit 60s)")
    assert bad == 0, dict(total)
    assert elapsed < 60


# -- 2 ---------------------------------------------------------------------

def test_criterion_2_curvature_bound(small):
    checked = violations = skipped = 0
    for inst in small:
        g = coverage_objective(inst)
        try:
            curvature(g)
        except ValueError:
            skipped += 1
            continue
        rep = verify_theorem2(g)
        checked += rep.checked
        violations += len(rep.violations)
    ok = violations == 0 and skipped == 0
    record(2, ok, f"{checked} (anchor, subset) pairs, {violations} violations, "
                  f"{skipped} instances without curvature")
    assert ok


# -- 3 ---------------------------------------------------------------------

def test_criterion_3_monotone_feasible(variational_cells):
    bad = []
    for seed, b, f, em, sem in variational_cells:
        for res in (em, sem):
            gs = [0.0] + [row.g_value for row in res.trace]
            if any(y < x - TOL for x, y in zip(gs, gs[1:])):
                bad.append((seed, b, res.solver, "g decreased"))
            if any(row.f_value > b + TOL for row in res.trace):
                bad.append((seed, b, res.solver, "infeasible iterate"))
    repairs = sum(em.repairs + sem.repairs for *_, em, sem in variational_cells)
    record(3, not bad, f"{len(variational_cells)} cells x (em, sem), {len(bad)} violations, "
                       f"{repairs} feasibility repairs applied")
    assert len(variational_cells) == 500
    assert not bad, bad[:5]


# -- 4 and 5 ---------------------------------------------------------------

@pytest.fixture(scope="module")
def certified_runs():
    runs = []
    for seed in range(60):
        n = (10, 12, 14, 16, 18)[seed % 5]
        g, f = pair(generate(GeneratorParams(n, 4 * n, (1, 3), seed=seed)))
        try:
            kappa = curvature(g)
        except ValueError:
            continue
        if kappa >= 1:
            continue
        full = int(f(SubsetMask.full(n)))
        for b in range(1, full + 1):
            cfg = SolverConfig(b)
            opt = solve_exact(g, f, cfg).g_value
            runs.append((seed, g, f, b, build_certificate(g, f, b), opt,
                         solve_em(g, f, cfg), solve_sem(g, f, cfg)))
    return runs


def test_criterion_4_certified_ratio(certified_runs):
    cells = bad = 0
    instances = set()
    for seed, g, f, b, cert, opt, em, sem in certified_runs:
        if cert.vacuous:
            continue
        instances.add(seed)
        for res in (em, sem):
            cells += 1
            if not cert.holds(res.g_value, opt):
                bad += 1
    ok = bad == 0 and cells > 0
    record(4, ok, f"{len(instances)} instances (n 10..18), {cells} non-vacuous solver cells, "
                  f"{bad} ratio violations against exact OPT")
    assert ok


def test_criterion_5_surrogate_step(certified_runs):
    checked = bad = 0
    for seed, g, f, b, cert, opt, em, sem in certified_runs:
        if g.n > 12:
            continue
        for res in (em, sem):
            rep = verify_proposition3(g, f, b, res.trace)
            if rep.vacuous:
                continue
            checked += rep.checked
            bad += len(rep.violations)
    ok = bad == 0 and checked > 0
    record(5, ok, f"{checked} non-vacuous iterations (n <= 12), {bad} violations")
    assert ok


# -- 6 ---------------------------------------------------------------------

SIZES = (100, 128, 133, 144)
BOUNDS = tuple(range(50, 101, 5))


@pytest.fixture(scope="module")
def location_sweep():
    """Square location-style instances: as many elements as items, each item
    covering 8-12 of them, values uniform on 1..100."""
    start = time.perf_counter()
    cells = []
    for seed in range(52):
        n = SIZES[seed % 4]
        g, f = pair(generate(GeneratorParams(n, n, (8, 12), (1, 100), seed=seed)))
        for b in BOUNDS:
            cfg = SolverConfig(b)
            cells.append((n, seed, b, solve_em(g, f, cfg), solve_sem(g, f, cfg),
                          solve_greedy(g, f, cfg)))
    return cells, time.perf_counter() - start


def test_criterion_6_qualitative_replication(location_sweep):
    cells, elapsed = location_sweep
    n_cells = len(cells)
    ge_greedy = sum(em.g_value >= gr.g_value - TOL for _, _, _, em, _, gr in cells) / n_cells
    ge_sem = sum(em.g_value >= sem.g_value - TOL for _, _, _, em, sem, _ in cells) / n_cells
    iters = [em.iterations for _, _, _, em, _, _ in cells]
    med, worst = statistics.median(iters), max(iters)
    parts = {
        "em>=greedy in >=80%": ge_greedy >= 0.80,
        "em>=sem in >=95%": ge_sem >= 0.95,
        "median iterations <=5": med <= 5,
        "max iterations <=10": worst <= 10,
        "runtime <10min": elapsed < 600,
    }
    by_size = []
    for n in SIZES:
        sub = [c for c in cells if c[0] == n]
        wins = sum(em.g_value >= gr.g_value - TOL for _, _, _, em, _, gr in sub)
        ratio = statistics.mean(em.g_value / gr.g_value for _, _, _, em, _, gr in sub)
        by_size.append(f"n={n}: em>=greedy {wins}/{len(sub)}, mean em/greedy {ratio:.3f}")
    detail = (f"{n_cells // len(BOUNDS)} instances x {len(BOUNDS)} bounds; "
              f"em>=greedy {ge_greedy:.1%}, em>=sem {ge_sem:.1%}, "
              f"iterations median {med} max {worst}, {elapsed:.0f}s; "
              + "; ".join(f"{k}: {'ok' if v else 'MISSED'}" for k, v in parts.items()))
    record(6, all(parts.values()), detail)
    print("\n".join(by_size))
    assert n_cells // len(BOUNDS) >= 50
    assert all(parts.values()), detail


# -- 7 ---------------------------------------------------------------------

def first_row(res):
    if not res.trace:
        return None
    r = res.trace[0]
    return (r.X_t, r.g_value, r.f_value, r.ghat_value, r.theta_hat)


def test_criterion_7_first_iteration(variational_cells, location_sweep, small):
    pairs = [(em, sem) for *_, em, sem in variational_cells]
    pairs += [(em, sem) for _, _, _, em, sem, _ in location_sweep[0]]
    for inst in small[:50]:
        g, f = pair(inst)
        for b in (2, 4, 6, 8):
            pairs.append((solve_em(g, f, SolverConfig(b)), solve_sem(g, f, SolverConfig(b))))
    bad = sum(first_row(em) != first_row(sem) for em, sem in pairs)
    record(7, bad == 0, f"{len(pairs)} (em, sem) pairs from the empty start, {bad} first-row mismatches")
    assert bad == 0


# -- 8 ---------------------------------------------------------------------

CALLS_PER_ELEMENT = 4


def test_criterion_8_oracle_calls(monkeypatch):
    sorts = Counter()
    real = solvers_mod.ratio_prefix

    def counting(weights, costs, b):
        sorts["calls"] += 1
        return real(weights, costs, b)

    monkeypatch.setattr(solvers_mod, "ratio_prefix", counting)
    worst = {}
    sort_ok = True
    for n in (50, 100, 200):
        ratios = []
        for seed in range(5):
            for kind, p in (("sparse", GeneratorParams(n, 3 * n, (1, 5), seed=seed)),
                            ("dense", GeneratorParams(n, n, (8, 12), seed=seed))):
                g, f = pair(generate(p))
                b = f(SubsetMask.full(n)) * 0.6
                sorts.clear()
                res = solve_em(g, f, SolverConfig(b))
                passes = res.iterations + (1 if res.converged else 0)
                ratios.append(res.oracle_calls / passes / n)
                sort_ok &= sorts["calls"] == 2 * passes
        worst[n] = max(ratios)
    ok = all(v <= CALLS_PER_ELEMENT for v in worst.values()) and sort_ok
    record(8, ok, "max distinct oracle calls per EM iteration / n: "
                  + ", ".join(f"n={n}: {v:.2f}" for n, v in worst.items())
                  + f" (c={CALLS_PER_ELEMENT}); one sort per step: {sort_ok}")
    assert ok


# -- 9 ---------------------------------------------------------------------

def test_criterion_9_cli_determinism(tmp_path):
    outputs = []
    commands = [
        ["sweep", "--items", "100", "--elements", "100", "--degree", "8,12", "--seed", "7",
         "--solvers", "em,sem,greedy"],
        ["trace", "--items", "60", "--elements", "180", "--seed", "3", "--budget", "40"],
    ]
    for run in range(2):
        out = []
        for k, cmd in enumerate(commands):
            path = tmp_path / f"run{run}_{k}.csv"
            subprocess.run([sys.executable, "-m", "submax", *cmd, "-o", str(path)], check=True,
                           env={"SUBMAX_THREADS": "4", "PATH": ""})
            out.append(path.read_bytes())
        outputs.append(out)
    same = outputs[0] == outputs[1]
    rows = outputs[0][0].count(b"\n") - 1
    record(9, same, f"two runs of sweep ({rows} rows) and trace: byte-identical={same}")
    assert same
