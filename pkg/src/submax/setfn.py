"""Ground sets, subset bitmasks and memoized set-function oracles.

Subsets are stored as Python integers used as bit vectors: bit ``j`` is set
when element ``j`` is a member.  The oracle memo is keyed on that raw bit
pattern.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, NamedTuple

import numpy as np

TOL = 1e-9
MAX_TABLE_N = 25


class ContractError(ValueError):
    """An oracle or caller broke a documented precondition."""


def iter_bits(bits: int) -> Iterator[int]:
    """Yield the indices of set bits in ascending order."""
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


@dataclass(frozen=True)
class GroundSet:
    """The universe ``{0, ..., n-1}``."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"ground set needs n >= 1, got {self.n}")

    def empty(self) -> SubsetMask:
        return SubsetMask(self.n)

    def full(self) -> SubsetMask:
        return SubsetMask(self.n, (1 << self.n) - 1)

    def subset(self, indices: Iterable[int]) -> SubsetMask:
        return SubsetMask.of(self.n, indices)


class SubsetMask:
    """Immutable fixed-width bit vector over ``n`` elements."""

    __slots__ = ("n", "bits")

    def __init__(self, n: int, bits: int = 0):
        if bits < 0 or bits >> n:
            raise ValueError(f"bits {bits:#x} do not fit in a ground set of size {n}")
        self.n = n
        self.bits = bits

    @classmethod
    def of(cls, n: int, indices: Iterable[int]) -> SubsetMask:
        bits = 0
        for j in indices:
            if not 0 <= j < n:
                raise ValueError(f"element {j} outside ground set of size {n}")
            bits |= 1 << j
        return cls(n, bits)

    @classmethod
    def full(cls, n: int) -> SubsetMask:
        return cls(n, (1 << n) - 1)

    def __contains__(self, j: int) -> bool:
        return bool(self.bits >> j & 1)

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.bits)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __bool__(self) -> bool:
        return self.bits != 0

    def _other(self, other: SubsetMask) -> int:
        if not isinstance(other, SubsetMask):
            return NotImplemented
        if other.n != self.n:
            raise ValueError(f"ground set mismatch: {self.n} vs {other.n}")
        return other.bits

    def __or__(self, other: SubsetMask) -> SubsetMask:
        return SubsetMask(self.n, self.bits | self._other(other))

    def __and__(self, other: SubsetMask) -> SubsetMask:
        return SubsetMask(self.n, self.bits & self._other(other))

    def __sub__(self, other: SubsetMask) -> SubsetMask:
        return SubsetMask(self.n, self.bits & ~self._other(other))

    def __le__(self, other: SubsetMask) -> bool:
        return self.bits & ~self._other(other) == 0

    def __ge__(self, other: SubsetMask) -> bool:
        return other <= self

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubsetMask):
            return NotImplemented
        return self.n == other.n and self.bits == other.bits

    def __hash__(self) -> int:
        return hash((self.n, self.bits))

    def __repr__(self) -> str:
        return f"SubsetMask(n={self.n}, {{{', '.join(map(str, self))}}})"

    def add(self, j: int) -> SubsetMask:
        return SubsetMask(self.n, self.bits | (1 << j))

    def remove(self, j: int) -> SubsetMask:
        return SubsetMask(self.n, self.bits & ~(1 << j))

    def complement(self) -> SubsetMask:
        return SubsetMask(self.n, ~self.bits & ((1 << self.n) - 1))

    def members(self) -> tuple[int, ...]:
        return tuple(self)


class SetFunction:
    """Memoized value oracle for a normalized set function.

    Parameters
    ----------
    n : int
        Size of the ground set.
    fn : callable
        Maps a raw bitmask (``int``) to a real value.  Must be deterministic
        and satisfy ``fn(0) == 0``.
    table_fn : callable, optional
        Vectorized evaluation over every subset, returning an array of length
        ``2**n`` indexed by bitmask.  Used by exhaustive routines when given.
    name : str, optional
        Label used in reports.
    """

    def __init__(
        self,
        n: int,
        fn: Callable[[int], float],
        table_fn: Callable[[], np.ndarray] | None = None,
        name: str = "f",
    ):
        self.ground = GroundSet(n)
        self.n = n
        self.fn = fn
        self.table_fn = table_fn
        self.name = name
        self._memo: dict[int, float] = {}
        self._calls = 0
        self._table: np.ndarray | None = None
        self._lock = threading.Lock()

    @classmethod
    def modular(cls, weights, name: str = "w") -> SetFunction:
        """``w(X) = sum of weights[j] for j in X``."""
        w = [float(x) for x in weights]

        def fn(bits):
            return sum(w[j] for j in iter_bits(bits))

        return cls(len(w), fn, name=name)

    @classmethod
    def from_table(cls, n: int, values, name: str = "f") -> SetFunction:
        """Oracle backed by an explicit table of ``2**n`` values."""
        table = np.asarray(values, dtype=float)
        if table.shape != (1 << n,):
            raise ValueError(f"table must have {1 << n} entries, got {table.shape}")
        return cls(n, lambda bits: float(table[bits]), table_fn=table.copy, name=name)

    @property
    def calls(self) -> int:
        """Number of distinct subsets evaluated (memo misses)."""
        return self._calls

    def value(self, bits: int) -> float:
        try:
            return self._memo[bits]
        except KeyError:
            pass
        v = self.fn(bits)
        with self._lock:
            if bits not in self._memo:
                self._memo[bits] = v
                self._calls += 1
            return self._memo[bits]

    def __call__(self, X: SubsetMask) -> float:
        return self.value(X.bits)

    def gain(self, j: int, bits: int) -> float:
        """``f(j | X)`` on raw bits; no membership check."""
        return self.value(bits | (1 << j)) - self.value(bits)

    def fresh(self) -> SetFunction:
        """Same function with an empty memo and a zeroed counter."""
        return SetFunction(self.n, self.fn, self.table_fn, self.name)

    def scaled(self, c: float) -> SetFunction:
        fn, table_fn = self.fn, self.table_fn
        return SetFunction(
            self.n,
            lambda bits: c * fn(bits),
            None if table_fn is None else (lambda: c * table_fn()),
            name=f"{c}*{self.name}",
        )

    def __repr__(self) -> str:
        return f"SetFunction({self.name!r}, n={self.n}, calls={self._calls})"


def evaluate(oracle: SetFunction, X: SubsetMask) -> float:
    return oracle.value(X.bits)


def marginal_gain(oracle: SetFunction, j: int, X: SubsetMask) -> float:
    """Return ``f(X + j) - f(X)``.

    Raises ``ContractError`` when ``j`` is already in ``X``.
    """
    if j in X:
        raise ContractError(f"marginal gain requires j not in X; {j} is in {X!r}")
    return oracle.value(X.bits | (1 << j)) - oracle.value(X.bits)


def max_singleton_gain(oracle: SetFunction) -> float:
    return max(oracle.value(1 << j) for j in range(oracle.n))


def value_table(oracle: SetFunction) -> np.ndarray:
    """Values of the oracle on all ``2**n`` subsets, indexed by bitmask.

    Bypasses the memo and its call counter; the table itself is cached on the
    oracle and returned read-only.
    """
    if oracle._table is not None:
        return oracle._table
    if oracle.n > MAX_TABLE_N:
        raise ValueError(f"value table needs n <= {MAX_TABLE_N}, got n={oracle.n}")
    if oracle.table_fn is not None:
        table = np.array(oracle.table_fn(), dtype=float)
    else:
        table = np.fromiter((oracle.fn(b) for b in range(1 << oracle.n)), float, 1 << oracle.n)
    table.flags.writeable = False
    oracle._table = table
    return table


def subset_bits_matrix(n: int) -> np.ndarray:
    """``(2**n, n)`` 0/1 matrix; row ``m`` is the membership vector of mask ``m``."""
    masks = np.arange(1 << n, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n)) & 1).astype(float)


class SubmodularityViolation(NamedTuple):
    X: SubsetMask
    Y: SubsetMask
    j: int
    gain_X: float
    gain_Y: float


class MonotonicityViolation(NamedTuple):
    X: SubsetMask
    j: int
    gain: float


def _iter_submasks(bits: int) -> Iterator[int]:
    sub = bits
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & bits


def _is_mirror(xb: int, yb: int, j: int) -> bool:
    # (X, X+i, j) and (X, X+j, i) state the same inequality; keep the one with j < i
    d = yb & ~xb
    return d.bit_count() == 1 and j > d.bit_length() - 1


def check_submodular(
    oracle: SetFunction,
    limit_n: int = 15,
    *,
    samples: int | None = None,
    seed: int = 0,
    tol: float = TOL,
    max_report: int | None = None,
) -> list[SubmodularityViolation]:
    """Find triples ``(X, Y, j)`` with ``X <= Y``, ``j not in Y`` and
    ``f(j|X) < f(j|Y) - tol``.

    Exhaustive by default (refused above ``limit_n``).  With ``samples`` set,
    draws that many random triples instead.  When ``Y = X + {i}`` the triple
    and its mirror ``(X, X + {j}, i)`` express one inequality, so only the
    one with ``j < i`` is reported.
    """
    n = oracle.n
    if samples is not None:
        return _sample_submodular(oracle, samples, seed, tol)
    if n > limit_n:
        raise ValueError(f"exhaustive submodularity check refused: n={n} > limit {limit_n}")
    table = value_table(oracle)
    masks = np.arange(1 << n, dtype=np.int64)
    out: list[SubmodularityViolation] = []
    for j in range(n):
        bit = 1 << j
        without = (masks & bit) == 0
        gains = np.full(1 << n, np.inf)
        gains[without] = table[masks[without] | bit] - table[masks[without]]
        # smallest gain over all subsets of each mask
        low = gains.copy()
        for i in range(n):
            if i == j:
                continue
            hi = masks[(masks >> i) & 1 == 1]
            low[hi] = np.minimum(low[hi], low[hi ^ (1 << i)])
        bad = np.nonzero(without & (low < gains - tol))[0]
        for yb in bad.tolist():
            gy = gains[yb]
            for xb in _iter_submasks(yb):
                if gains[xb] < gy - tol and not _is_mirror(xb, yb, j):
                    out.append(SubmodularityViolation(
                        SubsetMask(n, xb), SubsetMask(n, yb), j, float(gains[xb]), float(gy)))
                    if max_report is not None and len(out) >= max_report:
                        return out
    out.sort(key=lambda v: (v.j, v.Y.bits, v.X.bits))
    return out


def _sample_submodular(oracle, samples, seed, tol):
    n = oracle.n
    rng = np.random.default_rng(seed)
    out = []
    seen = set()
    for _ in range(samples):
        j = int(rng.integers(n))
        y = rng.random(n) < rng.random()
        y[j] = False
        x = y & (rng.random(n) < rng.random())
        yb = int(sum(1 << k for k in np.nonzero(y)[0].tolist()))
        xb = int(sum(1 << k for k in np.nonzero(x)[0].tolist()))
        if (xb, yb, j) in seen or _is_mirror(xb, yb, j):
            continue
        seen.add((xb, yb, j))
        gx, gy = oracle.gain(j, xb), oracle.gain(j, yb)
        if gx < gy - tol:
            out.append(SubmodularityViolation(SubsetMask(n, xb), SubsetMask(n, yb), j, gx, gy))
    return out


def check_monotone(
    oracle: SetFunction,
    limit_n: int = 15,
    *,
    samples: int | None = None,
    seed: int = 0,
    tol: float = TOL,
) -> list[MonotonicityViolation]:
    """Find pairs ``(X, j)``, ``j not in X``, with ``f(j|X) < -tol``."""
    n = oracle.n
    out: list[MonotonicityViolation] = []
    if samples is not None:
        rng = np.random.default_rng(seed)
        seen = set()
        for _ in range(samples):
            j = int(rng.integers(n))
            x = rng.random(n) < rng.random()
            x[j] = False
            xb = int(sum(1 << k for k in np.nonzero(x)[0].tolist()))
            if (xb, j) in seen:
                continue
            seen.add((xb, j))
            gain = oracle.gain(j, xb)
            if gain < -tol:
                out.append(MonotonicityViolation(SubsetMask(n, xb), j, gain))
        return out
    if n > limit_n:
        raise ValueError(f"exhaustive monotonicity check refused: n={n} > limit {limit_n}")
    table = value_table(oracle)
    masks = np.arange(1 << n, dtype=np.int64)
    for j in range(n):
        bit = 1 << j
        base = masks[(masks & bit) == 0]
        gains = table[base | bit] - table[base]
        for k in np.nonzero(gains < -tol)[0].tolist():
            out.append(MonotonicityViolation(SubsetMask(n, int(base[k])), j, float(gains[k])))
    out.sort(key=lambda v: (v.X.bits, v.j))
    return out


def all_masks(n: int) -> Iterator[SubsetMask]:
    """Every subset of ``{0..n-1}`` in increasing bitmask order."""
    return (SubsetMask(n, b) for b in range(1 << n))

