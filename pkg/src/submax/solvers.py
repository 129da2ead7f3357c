"""Solvers for ``max g(X) s.t. f(X) <= b`` with monotone submodular g, f.

* :func:`solve_em` alternates an estimation step, which picks the variational
  parameter of the constraint's upper bound, with a maximization step that
  solves the modular surrogate by a ratio-sorted prefix.
* :func:`solve_sem` is the same loop with the estimation step replaced by
  ``theta = {}``.
* :func:`solve_greedy` adds the feasible element of largest true gain.
* :func:`solve_exact` enumerates all subsets (n <= 25).

Ordering conventions shared by the two prefix steps: elements are sorted by
descending ``weight / cost``; a zero cost counts as an infinite ratio;
ties go to the smaller element index.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import ModularBound, eval_lower_bound, lower_bound_at
from .setfn import TOL, SetFunction, SubsetMask, value_table

EXACT_MAX_N = 25


@dataclass(frozen=True)
class SolverConfig:
    """Budget and loop controls.

    ``initial`` defaults to the empty set.  With ``strict_feasibility_repair``
    on, a maximization step whose prefix violates the true constraint is
    truncated from its low-ratio end until it fits.
    """

    budget: float
    initial: SubsetMask | None = None
    max_iterations: int = 50
    strict_feasibility_repair: bool = True

    def __post_init__(self):
        if not self.budget >= 0:
            raise ValueError(f"budget must be >= 0, got {self.budget}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")

    def start(self, n: int) -> SubsetMask:
        if self.initial is None:
            return SubsetMask(n)
        if self.initial.n != n:
            raise ValueError(f"initial set lives on n={self.initial.n}, oracle has n={n}")
        return self.initial


@dataclass(frozen=True)
class IterationTrace:
    """One accepted update ``anchor -> X_t``.

    ``X_hat`` is the estimation step's intermediate set (None for SEM and
    greedy); ``ghat_value`` is the anchor's lower bound evaluated at ``X_t``.
    """

    t: int
    X_t: SubsetMask
    g_value: float
    f_value: float
    theta_hat: SubsetMask
    X_hat: SubsetMask | None
    ghat_value: float
    anchor: SubsetMask
    repairs: int = 0


@dataclass
class SolveResult:
    solver: str
    budget: float
    solution: SubsetMask
    g_value: float
    f_value: float
    trace: list[IterationTrace] = field(default_factory=list)
    oracle_calls: int = 0
    repairs: int = 0
    converged: bool = True
    certificate: object | None = None

    @property
    def iterations(self) -> int:
        return len(self.trace)


def ratio_prefix(weights, costs, b: float) -> list[int]:
    """Ratio-sorted order, cut at the longest prefix with cost sum <= b."""
    def key(j):
        c = costs[j]
        ratio = math.inf if c <= 0 else weights[j] / c
        return (-ratio, j)

    order = sorted(range(len(costs)), key=key)
    total = 0.0
    for k, j in enumerate(order):
        total += costs[j]
        if total > b + TOL:
            return order[:k]
    return order


def bits_of(elems) -> int:
    bits = 0
    for j in elems:
        bits |= 1 << j
    return bits


def step_costs(f: SetFunction, a: int, rest_base: int) -> list[float]:
    # members j of the anchor: f(j | A - j); others: f(j | rest_base)
    fa = f.value(a)
    fb = f.value(rest_base)
    out = []
    for j in range(f.n):
        bit = 1 << j
        if a & bit:
            out.append(fa - f.value(a & ~bit))
        else:
            out.append(f.value(rest_base | bit) - fb)
    return out


def e_step(g_bound: ModularBound, f: SetFunction, X_t: SubsetMask, b: float):
    """Return ``(X_hat, theta_hat)``.

    Costs are ``f(j | X_t - j)`` for members and ``f(j | X_t)`` otherwise;
    ``X_hat`` is the ratio-sorted prefix fitting the budget and
    ``theta_hat = X_t & X_hat``.
    """
    costs = step_costs(f, X_t.bits, X_t.bits)
    x_hat = SubsetMask(f.n, bits_of(ratio_prefix(g_bound.weights, costs, b)))
    return x_hat, x_hat & X_t


def _m_step(g_bound, f, X_t, theta_hat, b, repair):
    if not theta_hat <= X_t:
        raise ValueError(f"theta_hat {theta_hat!r} is not a subset of X_t {X_t!r}")
    costs = step_costs(f, X_t.bits, theta_hat.bits)
    chosen = ratio_prefix(g_bound.weights, costs, b)
    dropped = 0
    if repair:
        while chosen and f.value(bits_of(chosen)) > b + TOL:
            chosen.pop()
            dropped += 1
    return SubsetMask(f.n, bits_of(chosen)), dropped


def m_step(g_bound: ModularBound, f: SetFunction, X_t: SubsetMask, theta_hat: SubsetMask,
           b: float, repair: bool = False) -> SubsetMask:
    """Maximize the modular surrogate; return ``X_{t+1}``.

    Costs are ``f(j | X_t - j)`` for members of ``X_t`` and
    ``f(j | theta_hat)`` otherwise.  With ``repair`` the prefix is shortened
    until the true ``f`` fits the budget.
    """
    return _m_step(g_bound, f, X_t, theta_hat, b, repair)[0]


def _variational(g: SetFunction, f: SetFunction, cfg: SolverConfig, estimate: bool) -> SolveResult:
    if g.n != f.n:
        raise ValueError(f"objective has n={g.n}, constraint has n={f.n}")
    g, f = g.fresh(), f.fresh()
    b = cfg.budget
    x = cfg.start(g.n)
    if f(x) > b + TOL:
        raise ValueError(f"initial set is infeasible: f(X_0)={f(x)} > budget {b}")
    empty = SubsetMask(g.n)
    trace: list[IterationTrace] = []
    converged = False
    for t in range(1, cfg.max_iterations + 1):
        mb = lower_bound_at(g, x)
        if estimate:
            x_hat, theta = e_step(mb, f, x, b)
        else:
            x_hat, theta = None, empty
        x_new, dropped = _m_step(mb, f, x, theta, b, cfg.strict_feasibility_repair)
        gh_new = eval_lower_bound(mb, x_new)
        if gh_new <= eval_lower_bound(mb, x):
            converged = True
            break
        trace.append(IterationTrace(t, x_new, g(x_new), f(x_new), theta, x_hat, gh_new, x, dropped))
        x = x_new
    start = cfg.start(g.n)
    best, best_g = start, g(start)
    for row in trace:
        if row.f_value <= b + TOL and row.g_value > best_g:
            best, best_g = row.X_t, row.g_value
    return SolveResult(
        solver="em" if estimate else "sem",
        budget=b,
        solution=best,
        g_value=best_g,
        f_value=f(best),
        trace=trace,
        oracle_calls=g.calls + f.calls,
        repairs=sum(row.repairs for row in trace),
        converged=converged,
    )


def solve_em(g: SetFunction, f: SetFunction, cfg: SolverConfig) -> SolveResult:
    """Estimation-maximization loop.

    Stops when the new set does not strictly improve the anchor's lower
    bound, or after ``cfg.max_iterations`` steps.  The non-improving final
    candidate is discarded.
    """
    return _variational(g, f, cfg, estimate=True)


def solve_sem(g: SetFunction, f: SetFunction, cfg: SolverConfig) -> SolveResult:
    return _variational(g, f, cfg, estimate=False)


def solve_greedy(g: SetFunction, f: SetFunction, cfg: SolverConfig) -> SolveResult:
    """Add the feasible element with the largest positive gain until none is left.

    Uses lazy gain updates, which give the same picks as a full rescan when
    ``g`` is submodular.  Elements that once fail the budget are dropped for
    good since ``f`` is monotone.
    """
    g, f = g.fresh(), f.fresh()
    b = cfg.budget
    x = cfg.start(g.n)
    if f(x) > b + TOL:
        raise ValueError(f"initial set is infeasible: f(X_0)={f(x)} > budget {b}")
    bits = x.bits
    gx = g.value(bits)
    heap = [(-g.gain(j, bits), j, 0) for j in range(g.n) if not bits >> j & 1]
    heapq.heapify(heap)
    trace = []
    step = 0
    empty = SubsetMask(g.n)
    while heap:
        neg, j, stamp = heapq.heappop(heap)
        if stamp != step:
            heapq.heappush(heap, (-g.gain(j, bits), j, step))
            continue
        if -neg <= 0:
            break
        if f.value(bits | (1 << j)) > b + TOL:
            continue
        anchor = SubsetMask(g.n, bits)
        bits |= 1 << j
        gx = g.value(bits)
        step += 1
        x_new = SubsetMask(g.n, bits)
        trace.append(IterationTrace(step, x_new, gx, f.value(bits), empty, None, gx, anchor))
    sol = SubsetMask(g.n, bits)
    return SolveResult("greedy", b, sol, gx, f.value(bits), trace, g.calls + f.calls)


def solve_exact(g: SetFunction, f: SetFunction, cfg: SolverConfig) -> SolveResult:
    """Exhaustive maximizer.

    Returns the whole ground set when it fits the budget; otherwise ties go
    to the smallest bitmask.
    """
    n = g.n
    if n > EXACT_MAX_N:
        raise ValueError(f"exact solver refused: n={n} > {EXACT_MAX_N}")
    gt, ft = value_table(g), value_table(f)
    feasible = ft <= cfg.budget + TOL
    masked = np.where(feasible, gt, -np.inf)
    full = (1 << n) - 1
    best = full if feasible[full] else int(np.argmax(masked))
    sol = SubsetMask(n, best)
    return SolveResult("exact", cfg.budget, sol, float(gt[best]), float(ft[best]),
                       oracle_calls=2 << n)


SOLVERS = {
    "em": solve_em,
    "sem": solve_sem,
    "greedy": solve_greedy,
    "exact": solve_exact,
}

