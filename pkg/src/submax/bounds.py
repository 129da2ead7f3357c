"""Modular bounds around an anchor set.

Lower bound for the objective: telescope ``g`` along a permutation chain
that lists the anchor's members first.  The resulting modular function is
exact at the anchor and below ``g`` everywhere.

Upper bound for the constraint: Nemhauser's modular upper bound
``f_hat(Y; theta) = f(A) - sum_{j in A\\Y} f(j | A-j) + sum_{j in Y\\A} f(j | theta)``
with ``theta`` a subset of the anchor ``A``.

The ``*_table``/``*_rows`` functions evaluate the same quantities for every
subset at once from a dense value table; they back the exhaustive checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .setfn import TOL, ContractError, GroundSet, SetFunction, SubsetMask

DENSE_MAX_N = 15
PAIR_TABLE_MAX_N = 11  # 4**n entries for the (subset, subset) sum tables


@dataclass(frozen=True)
class PermutationChain:
    order: tuple[int, ...]
    anchor: SubsetMask

    def __post_init__(self):
        n = self.anchor.n
        if sorted(self.order) != list(range(n)):
            raise ValueError(f"order is not a permutation of 0..{n - 1}: {self.order}")
        k = len(self.anchor)
        if set(self.order[:k]) != set(self.anchor):
            raise ValueError("anchor members must occupy the first positions of the chain")

    def prefixes(self):
        """Bitmasks S_0 = {} , S_1, ..., S_n of the induced chain."""
        bits = 0
        out = [0]
        for j in self.order:
            bits |= 1 << j
            out.append(bits)
        return out


@dataclass(frozen=True)
class ModularBound:
    weights: tuple[float, ...]
    anchor: SubsetMask

    def __call__(self, X: SubsetMask) -> float:
        return eval_lower_bound(self, X)


def chain_from_anchor(gs: GroundSet | int, X_t: SubsetMask) -> PermutationChain:
    n = gs if isinstance(gs, int) else gs.n
    if X_t.n != n:
        raise ValueError(f"anchor lives on n={X_t.n}, ground set has n={n}")
    members = list(X_t)
    rest = [j for j in range(n) if j not in X_t]
    return PermutationChain(tuple(members + rest), X_t)


def modular_lower_bound(g: SetFunction, chain: PermutationChain) -> ModularBound:
    """Weights ``w[pi_i] = g(S_i) - g(S_{i-1})`` along the chain.

    Raises ``ContractError`` if a weight is below ``-TOL`` (``g`` not monotone).
    """
    prefixes = chain.prefixes()
    vals = [g.value(b) for b in prefixes]
    weights = [0.0] * g.n
    for i, j in enumerate(chain.order):
        w = vals[i + 1] - vals[i]
        if w < -TOL:
            raise ContractError(f"negative chain weight {w} for element {j}: {g.name} is not monotone")
        weights[j] = w
    return ModularBound(tuple(weights), chain.anchor)


def lower_bound_at(g: SetFunction, X_t: SubsetMask) -> ModularBound:
    return modular_lower_bound(g, chain_from_anchor(g.n, X_t))


def eval_lower_bound(mb: ModularBound, X: SubsetMask) -> float:
    w = mb.weights
    return math.fsum(w[j] for j in X)


def _check_sets(f: SetFunction, *sets: SubsetMask):
    for s in sets:
        if s.n != f.n:
            raise ValueError(f"subset on n={s.n} does not match oracle n={f.n}")


def nemhauser_upper_bound(f: SetFunction, X_t: SubsetMask, theta: SubsetMask, Y: SubsetMask) -> float:
    """Modular upper bound of ``f(Y)`` anchored at ``X_t`` with parameter ``theta``.

    ``theta`` must be a subset of ``X_t``; ``theta = X_t & Y`` gives the
    classical inequality.
    """
    _check_sets(f, X_t, theta, Y)
    if not theta <= X_t:
        raise ContractError(f"theta {theta!r} is not a subset of the anchor {X_t!r}")
    a, t = X_t.bits, theta.bits
    fa = f.value(a)
    drop = math.fsum(f.value(a) - f.value(a & ~(1 << j)) for j in X_t - Y)
    add = math.fsum(f.gain(j, t) for j in Y - X_t)
    return fa - drop + add


def nemhauser_upper_bound_alt(f: SetFunction, X_t: SubsetMask, psi: SubsetMask, Y: SubsetMask) -> float:
    """The second Nemhauser bound; ``psi`` must contain ``X_t`` (classically ``X_t | Y``)."""
    _check_sets(f, X_t, psi, Y)
    if not X_t <= psi:
        raise ContractError(f"psi {psi!r} does not contain the anchor {X_t!r}")
    a, p = X_t.bits, psi.bits
    add = math.fsum(f.gain(j, a) for j in Y - X_t)
    drop = math.fsum(f.value(p) - f.value(p & ~(1 << j)) for j in X_t - Y)
    return f.value(a) + add - drop


def nemhauser_divergence(f: SetFunction, X_t: SubsetMask, theta: SubsetMask | None, Y: SubsetMask) -> float:
    """``f_hat(Y; X_t & Y) - f(Y)``; nonnegative for submodular ``f``."""
    inter = X_t & Y
    if theta is None:
        theta = inter
    elif theta != inter:
        raise ContractError(f"divergence is defined at theta = X_t & Y = {inter!r}, got {theta!r}")
    d = nemhauser_upper_bound(f, X_t, theta, Y) - f.value(Y.bits)
    if d < -TOL:
        raise ContractError(f"negative Nemhauser divergence {d}: {f.name} is not submodular")
    return d


# dense evaluation -------------------------------------------------------

def _masks(n):
    if n > DENSE_MAX_N:
        raise ValueError(f"dense bound evaluation needs n <= {DENSE_MAX_N}, got {n}")
    return np.arange(1 << n, dtype=np.int64)


def _bit(masks, j):
    return (masks >> j) & 1


def lower_bound_weight_table(g_table: np.ndarray, n: int, anchors=None) -> np.ndarray:
    """Chain weights for many anchors at once.

    Returns an array of shape ``(len(anchors), n)``; row ``r`` equals
    ``modular_lower_bound(g, chain_from_anchor(n, anchors[r])).weights``.
    All ``2**n`` anchors when ``anchors`` is None.
    """
    anchors = _masks(n) if anchors is None else np.asarray(anchors, dtype=np.int64)
    member = _bit(anchors[:, None], np.arange(n))
    order = np.argsort((1 - member) * n + np.arange(n), axis=1, kind="stable")
    prefix = np.cumsum(np.left_shift(1, order), axis=1)
    vals = g_table[prefix]
    prev = np.concatenate([np.zeros((len(anchors), 1)), vals[:, :-1]], axis=1)
    weights = np.empty((len(anchors), n))
    np.put_along_axis(weights, order, vals - prev, axis=1)
    return weights


def lower_bound_rows(weights: np.ndarray, n: int) -> np.ndarray:
    """``out[r, X] = sum_{j in X} weights[r, j]`` for every subset ``X``."""
    members = _bit(_masks(n)[:, None], np.arange(n)).astype(float)
    return weights @ members.T


def _members(bits: np.ndarray, n: int) -> np.ndarray:
    return ((bits[:, None] >> np.arange(n)) & 1).astype(float)


def _drop_weights(f_table, a, n):
    # row r, column j: f(j | A_r - j) for members of A_r, else 0
    bits = np.left_shift(1, np.arange(n))
    inside = (a[:, None] & bits) != 0
    return np.where(inside, f_table[a][:, None] - f_table[a[:, None] & ~bits], 0.0)


def _add_weights(f_table, a, base, n):
    # row r, column j: f(j | base_r) for non-members of A_r, else 0
    bits = np.left_shift(1, np.arange(n))
    inside = (a[:, None] & bits) != 0
    return np.where(inside, 0.0, f_table[base[:, None] | bits] - f_table[base][:, None])


def upper_bound_rows(f_table: np.ndarray, n: int, anchors, thetas=None) -> np.ndarray:
    """``out[r, Y] = f_hat_{A}(Y; theta)`` with ``A = anchors[r]``, for every ``Y``.

    ``thetas`` is either one subset per anchor (an integer or an array of
    shape ``(len(anchors),)`` or ``(len(anchors), 1)``) or a full
    ``(len(anchors), 2**n)`` array; each must be a subset of its anchor.  The
    default ``A & Y`` is evaluated per cell.
    """
    ys = _masks(n)
    a = np.asarray(anchors, dtype=np.int64).reshape(-1)
    in_y = _members(ys, n)
    out = f_table[a][:, None] - _drop_weights(f_table, a, n) @ (1.0 - in_y).T
    if thetas is not None:
        th = np.asarray(thetas, dtype=np.int64)
        if th.ndim == 2 and th.shape[1] != 1:
            th = np.broadcast_to(th, out.shape)
            if np.any(th & ~a[:, None]):
                raise ContractError("theta must be a subset of its anchor")
            tz = f_table[th]
            for j in range(n):
                bit = 1 << j
                delta = f_table[th | bit] - tz
                delta *= ((a & bit) == 0)[:, None]
                delta *= ((ys & bit) != 0)[None, :]
                out += delta
            return out
        th = np.broadcast_to(th.reshape(-1), a.shape)
        if np.any(th & ~a):
            raise ContractError("theta must be a subset of its anchor")
        return out + _add_weights(f_table, a, th, n) @ in_y.T
    if n <= PAIR_TABLE_MAX_N:
        # H[Z, W] = sum_{j in W} f(j | Z), looked up at Z = A & Y, W = Y - A
        gains = f_table[ys[:, None] | np.left_shift(1, np.arange(n))] - f_table[ys][:, None]
        H = (gains @ in_y.T).ravel()
        z = a[:, None] & ys[None, :]
        w = ys[None, :] & ~a[:, None]
        return out + H[(z << n) | w]
    z = a[:, None] & ys[None, :]
    tz = f_table[z]
    for j in range(n):
        bit = 1 << j
        rows = np.nonzero((a & bit) == 0)[0]
        cols = (ys & bit) != 0
        zj = z[rows][:, cols]
        out[np.ix_(rows, np.nonzero(cols)[0])] += f_table[zj | bit] - tz[rows][:, cols]
    return out


def upper_bound_theta_row(f_table: np.ndarray, n: int, anchor: int, theta: int) -> np.ndarray:
    """``f_hat_{anchor}(Y; theta)`` for every ``Y`` with a fixed ``theta``."""
    ys = _masks(n)
    out = np.full(1 << n, f_table[anchor])
    for j in range(n):
        bit = 1 << j
        in_y = (ys & bit) != 0
        if anchor & bit:
            out -= ~in_y * (f_table[anchor] - f_table[anchor & ~bit])
        else:
            out += in_y * (f_table[theta | bit] - f_table[theta])
    return out


def alt_upper_bound_rows(f_table: np.ndarray, n: int, anchors) -> np.ndarray:
    """``out[r, Y] = f_hat_{A}(Y; A | Y)`` with ``A = anchors[r]``, for every ``Y``."""
    ys = _masks(n)
    a = np.asarray(anchors, dtype=np.int64).reshape(-1)
    in_y = _members(ys, n)
    out = f_table[a][:, None] + _add_weights(f_table, a, a, n) @ in_y.T
    u = a[:, None] | ys[None, :]
    if n <= PAIR_TABLE_MAX_N:
        # K[U, D] = sum_{j in D} f(j | U - j), looked up at U = A | Y, D = A - Y
        K = (_drop_weights(f_table, ys, n) @ in_y.T).ravel()
        d = a[:, None] & ~ys[None, :]
        return out - K[(u << n) | d]
    tu = f_table[u]
    for j in range(n):
        bit = 1 << j
        rows = np.nonzero(a & bit)[0]
        cols = np.nonzero((ys & bit) == 0)[0]
        uj = u[np.ix_(rows, cols)]
        out[np.ix_(rows, cols)] -= tu[np.ix_(rows, cols)] - f_table[uj & ~bit]
    return out
