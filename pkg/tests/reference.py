"""Slow reference implementations on frozensets, independent of the
bitmask code paths.  Used as oracles by the tests."""

import itertools
import math


def powerset(items):
    items = list(items)
    return [frozenset(c) for r in range(len(items) + 1) for c in itertools.combinations(items, r)]


def coverage_value(covers, values, X, keep=None):
    covered = set()
    for i in X:
        covered |= set(covers[i])
    if keep is not None:
        covered &= set(keep)
    return sum(values[e] for e in covered)


class Fn:
    """Set function on frozensets with a plain dict cache."""

    def __init__(self, n, fn):
        self.n = n
        self.fn = fn

    def __call__(self, X):
        return self.fn(frozenset(X))

    def gain(self, j, X):
        X = frozenset(X)
        return self(X | {j}) - self(X)


def coverage_pair(inst):
    g = Fn(inst.n_items, lambda X: coverage_value(inst.covers, inst.values, X, inst.objective_elements()))
    ones = [1] * inst.n_elements
    f = Fn(inst.n_items, lambda X: coverage_value(inst.covers, ones, X, inst.constraint_elements()))
    return g, f


def chain_weights(g, anchor):
    order = sorted(anchor) + [j for j in range(g.n) if j not in anchor]
    w = {}
    prefix = set()
    for j in order:
        before = g(prefix)
        prefix.add(j)
        w[j] = g(prefix) - before
    return w


def ratio_prefix(w, cost, b):
    ratio = {j: (math.inf if cost[j] == 0 else w[j] / cost[j]) for j in w}
    order = sorted(w, key=lambda j: (-ratio[j], j))
    out, total = [], 0
    for j in order:
        total += cost[j]
        if total > b + 1e-9:
            break
        out.append(j)
    return out


def em_reference(g, f, b, estimate=True, max_iterations=50, repair=True):
    """Direct transcription of the EM/SEM loop; returns the accepted iterates."""
    X = frozenset()
    trace = []
    for _ in range(max_iterations):
        w = chain_weights(g, X)
        if estimate:
            cost_e = {j: (f.gain(j, X - {j}) if j in X else f.gain(j, X)) for j in range(g.n)}
            x_hat = frozenset(ratio_prefix(w, cost_e, b))
            theta = X & x_hat
        else:
            theta = frozenset()
        cost_m = {j: (f.gain(j, X - {j}) if j in X else f.gain(j, theta)) for j in range(g.n)}
        chosen = ratio_prefix(w, cost_m, b)
        while repair and chosen and f(chosen) > b + 1e-9:
            chosen.pop()
        new = frozenset(chosen)
        if sum(w[j] for j in new) <= sum(w[j] for j in X):
            break
        trace.append((new, theta))
        X = new
    return trace


def greedy_reference(g, f, b):
    S = frozenset()
    while True:
        best, best_gain = None, 0
        for j in range(g.n):
            if j in S or f(S | {j}) > b + 1e-9:
                continue
            gain = g.gain(j, S)
            if gain > best_gain:
                best, best_gain = j, gain
        if best is None:
            return S
        S = S | {best}


def exact_reference(g, f, b):
    best, best_val = frozenset(), 0
    for X in powerset(range(g.n)):
        if f(X) <= b + 1e-9 and g(X) > best_val:
            best, best_val = X, g(X)
    return best_val
