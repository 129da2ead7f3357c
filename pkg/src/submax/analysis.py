"""Curvature, approximation certificates and empirical checks of the
guarantees behind the variational solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import DENSE_MAX_N, eval_lower_bound, lower_bound_at, lower_bound_weight_table
from .setfn import TOL, SetFunction, SubsetMask, max_singleton_gain, value_table
from .solvers import SolveResult, bits_of, ratio_prefix, step_costs

PROP3_MAX_N = 12


def zero_singletons(g: SetFunction) -> list[int]:
    """Elements whose singleton value is zero; they are left out of the curvature."""
    return [k for k in range(g.n) if g.value(1 << k) == 0]


def curvature(g: SetFunction) -> float:
    """``1 - min_k g(k | V - k) / g({k})`` over elements with ``g({k}) > 0``."""
    full = (1 << g.n) - 1
    gv = g.value(full)
    ratios = []
    for k in range(g.n):
        single = g.value(1 << k)
        if single == 0:
            continue
        ratios.append((gv - g.value(full & ~(1 << k))) / single)
    if not ratios:
        raise ValueError(f"curvature undefined: every singleton value of {g.name} is zero")
    return 1.0 - min(ratios)


@dataclass(frozen=True)
class ApproximationCertificate:
    kappa_g: float
    delta_f: float
    budget: float
    ratio: float
    vacuous: bool
    zero_singletons: tuple[int, ...] = ()

    def holds(self, value: float, opt: float, tol: float = TOL) -> bool:
        """Whether ``value >= ratio * opt`` (always true when vacuous)."""
        return self.vacuous or value >= self.ratio * opt - tol


def build_certificate(g: SetFunction, f: SetFunction, b: float) -> ApproximationCertificate:
    if not b > 0:
        raise ValueError(f"certificate needs a positive budget, got {b}")
    kappa = curvature(g)
    delta = max_singleton_gain(f)
    ratio = (1.0 - kappa) * (1.0 - 2.0 * delta / b)
    return ApproximationCertificate(kappa, delta, b, ratio, ratio <= 0,
                                    tuple(zero_singletons(g)))


def certify(result: SolveResult, g: SetFunction, f: SetFunction) -> SolveResult:
    """Attach a certificate to ``result`` in place and return it."""
    result.certificate = build_certificate(g, f, result.budget)
    return result


@dataclass(frozen=True)
class LowerBoundViolation:
    anchor: SubsetMask
    X: SubsetMask
    ghat: float
    required: float


@dataclass
class CurvatureBoundReport:
    kappa: float
    checked: int = 0
    violations: list[LowerBoundViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_theorem2(g: SetFunction, anchors=None, subsets=None, *, limit_n: int = 15,
                    tol: float = TOL, chunk_cells: int = 1 << 22) -> CurvatureBoundReport:
    """Check ``ghat_A(X) >= (1 - kappa) g(X)`` for anchor/subset pairs.

    ``anchors`` and ``subsets`` are iterables of :class:`SubsetMask`; either
    left as None means every subset, which needs ``n <= limit_n``.
    """
    n = g.n
    exhaustive = anchors is None or subsets is None
    if exhaustive and n > limit_n:
        raise ValueError(f"exhaustive check refused: n={n} > limit {limit_n}")
    kappa = curvature(g)
    factor = 1.0 - kappa
    report = CurvatureBoundReport(kappa)
    if n <= DENSE_MAX_N:
        table = value_table(g)
        a_bits = (np.arange(1 << n, dtype=np.int64) if anchors is None
                  else np.array([a.bits for a in anchors], dtype=np.int64))
        x_bits = (np.arange(1 << n, dtype=np.int64) if subsets is None
                  else np.array([x.bits for x in subsets], dtype=np.int64))
        members = ((x_bits[:, None] >> np.arange(n)) & 1).astype(float)
        required = factor * table[x_bits]
        step = max(1, chunk_cells // max(1, len(x_bits)))
        for lo in range(0, len(a_bits), step):
            chunk = a_bits[lo:lo + step]
            ghat = lower_bound_weight_table(table, n, chunk) @ members.T
            for r, c in zip(*np.nonzero(ghat < required[None, :] - tol)):
                report.violations.append(LowerBoundViolation(
                    SubsetMask(n, int(chunk[r])), SubsetMask(n, int(x_bits[c])),
                    float(ghat[r, c]), float(required[c])))
            report.checked += ghat.size
        return report
    subsets = list(subsets)
    for a in anchors:
        mb = lower_bound_at(g, a)
        for x in subsets:
            gh, need = eval_lower_bound(mb, x), factor * g(x)
            report.checked += 1
            if gh < need - tol:
                report.violations.append(LowerBoundViolation(a, x, gh, need))
    return report


@dataclass(frozen=True)
class SurrogateViolation:
    t: int
    ghat_step: float
    ghat_opt: float
    factor: float


@dataclass
class SurrogateStepReport:
    factor: float
    vacuous: bool
    checked: int = 0
    violations: list[SurrogateViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def surrogate_optimum(weights, costs, b: float, tol: float = TOL) -> float:
    """Best modular value ``sum w_j`` over sets with ``sum c_j <= b``, by enumeration."""
    n = len(weights)
    members = ((np.arange(1 << n, dtype=np.int64)[:, None] >> np.arange(n)) & 1).astype(float)
    value = members @ np.asarray(weights, dtype=float)
    cost = members @ np.asarray(costs, dtype=float)
    return float(value[cost <= b + tol].max())


def verify_proposition3(g: SetFunction, f: SetFunction, b: float, trace, *,
                        tol: float = TOL) -> SurrogateStepReport:
    """Per iteration, compare the maximization step's prefix with the
    surrogate optimum under the same per-element costs.

    Checks ``ghat(prefix) >= (1 - 2 delta_f / b) * ghat(OPT)`` where the
    prefix is recomputed without feasibility repair.  Vacuous when the factor
    is not positive.
    """
    if g.n > PROP3_MAX_N:
        raise ValueError(f"surrogate enumeration refused: n={g.n} > {PROP3_MAX_N}")
    factor = 1.0 - 2.0 * max_singleton_gain(f) / b if b > 0 else -math.inf
    report = SurrogateStepReport(factor, factor <= 0)
    if report.vacuous:
        return report
    for row in trace:
        mb = lower_bound_at(g, row.anchor)
        costs = step_costs(f, row.anchor.bits, row.theta_hat.bits)
        step = SubsetMask(g.n, bits_of(ratio_prefix(mb.weights, costs, b)))
        got = eval_lower_bound(mb, step)
        best = surrogate_optimum(mb.weights, costs, b, tol)
        report.checked += 1
        if got < factor * best - tol:
            report.violations.append(SurrogateViolation(row.t, got, best, factor))
    return report
