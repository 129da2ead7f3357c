"""Weighted bipartite coverage instances.

An instance has ``n_items`` selectable items (the ground set) and
``n_elements`` coverable elements with nonnegative values.  It induces two
monotone submodular oracles:

* objective ``g(X)``: total value of elements covered by the items in ``X``;
* constraint ``f(X)``: number of elements covered by ``X``.

When per-element labels are present (``True`` = positive/fraud, ``False`` =
normal), ``g`` only counts positive elements and ``f`` only counts normal
ones, which is the rule-selection setting.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .setfn import SetFunction, iter_bits

FORMAT_VERSION = 1
_FIELDS = {"version", "n_items", "n_elements", "values", "labels", "covers"}


class InstanceFormatError(ValueError):
    """Malformed or invariant-violating instance file."""

    def __init__(self, message: str, *, path=None, field: str | None = None, line: int | None = None):
        self.message = message
        self.path = None if path is None else str(path)
        self.field = field
        self.line = line
        where = []
        if self.path:
            where.append(self.path)
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(field)
        super().__init__(f"{': '.join(where)}: {message}" if where else message)


@dataclass(frozen=True)
class CoverageInstance:
    n_items: int
    n_elements: int
    covers: tuple[tuple[int, ...], ...]
    values: tuple[float, ...]
    labels: tuple[bool, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "covers", tuple(tuple(sorted(set(c))) for c in self.covers))
        object.__setattr__(self, "values", tuple(self.values))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(bool(x) for x in self.labels))
        validate(self)

    @property
    def labeled(self) -> bool:
        return self.labels is not None

    def objective_elements(self) -> list[int]:
        if self.labels is None:
            return list(range(self.n_elements))
        return [e for e, lab in enumerate(self.labels) if lab]

    def constraint_elements(self) -> list[int]:
        if self.labels is None:
            return list(range(self.n_elements))
        return [e for e, lab in enumerate(self.labels) if not lab]

    def restrict(self, items) -> CoverageInstance:
        """Sub-instance on the given items; elements keep their ids."""
        items = list(items)
        return CoverageInstance(len(items), self.n_elements, [self.covers[i] for i in items],
                                self.values, self.labels)


def validate(inst: CoverageInstance, path=None) -> None:
    def fail(msg, field):
        raise InstanceFormatError(msg, path=path, field=field)

    if inst.n_items < 1:
        fail(f"need at least one item, got {inst.n_items}", "n_items")
    if inst.n_elements < 1:
        fail(f"need at least one element, got {inst.n_elements}", "n_elements")
    if len(inst.covers) != inst.n_items:
        fail(f"expected {inst.n_items} entries, got {len(inst.covers)}", "covers")
    if len(inst.values) != inst.n_elements:
        fail(f"expected {inst.n_elements} entries, got {len(inst.values)}", "values")
    if inst.labels is not None and len(inst.labels) != inst.n_elements:
        fail(f"expected {inst.n_elements} entries, got {len(inst.labels)}", "labels")
    for e, v in enumerate(inst.values):
        if not math.isfinite(v) or v < 0:
            fail(f"element value must be finite and >= 0, got {v!r}", f"values[{e}]")
    for i, cov in enumerate(inst.covers):
        if not cov:
            fail(f"item {i} covers no elements", f"covers[{i}]")
        for e in cov:
            if not 0 <= e < inst.n_elements:
                fail(f"item {i} covers element id {e} outside [0, {inst.n_elements})",
                     f"covers[{i}]")


def tiny() -> CoverageInstance:
    """Three items over elements u=10, v=20, w=30; covers 0:{u,v}, 1:{v,w}, 2:{w}."""
    return CoverageInstance(3, 3, ((0, 1), (1, 2), (2,)), (10, 20, 30))


def _item_masks(inst: CoverageInstance, keep: list[int]) -> list[int]:
    keep_bits = 0
    for e in keep:
        keep_bits |= 1 << e
    masks = []
    for cov in inst.covers:
        m = 0
        for e in cov:
            m |= 1 << e
        masks.append(m & keep_bits)
    return masks


def _coverage_table(inst: CoverageInstance, elements: list[int], weights: list[float]) -> np.ndarray:
    n = inst.n_items
    # items covering each element, as an item bitmask; merge identical ones
    by_itemset: dict[int, float] = {}
    for e, w in zip(elements, weights):
        items = 0
        for i, cov in enumerate(inst.covers):
            if e in cov:
                items |= 1 << i
        if items and w:
            by_itemset[items] = by_itemset.get(items, 0.0) + w
    masks = np.arange(1 << n, dtype=np.int64)
    table = np.zeros(1 << n)
    for items in sorted(by_itemset):
        table += by_itemset[items] * ((masks & items) != 0)
    return table


def _weighted_counter(values: list[float], nbytes: int):
    # per-byte lookup tables: value of the elements whose bits fall in byte k
    tabs = []
    for k in range(nbytes):
        tab = [0] * 256
        for b in range(1, 256):
            low = b & -b
            e = 8 * k + low.bit_length() - 1
            tab[b] = tab[b ^ low] + (values[e] if e < len(values) else 0)
        tabs.append(tab)

    def count(bits: int) -> float:
        total = 0
        for k, byte in enumerate(bits.to_bytes(nbytes, "little")):
            if byte:
                total += tabs[k][byte]
        return float(total)

    return count


def _oracle(inst: CoverageInstance, keep: list[int], weights: list[float] | None, name: str):
    masks = _item_masks(inst, keep)
    if weights is None:
        def measure(u):
            return float(u.bit_count())
        table_weights = [1.0] * len(keep)
    else:
        vals = [0] * inst.n_elements
        for e in keep:
            vals[e] = weights[e]
        measure = _weighted_counter(vals, (inst.n_elements + 7) // 8)
        table_weights = [float(weights[e]) for e in keep]

    def fn(bits: int) -> float:
        u = 0
        for i in iter_bits(bits):
            u |= masks[i]
        return measure(u)

    return SetFunction(inst.n_items, fn,
                       table_fn=lambda: _coverage_table(inst, keep, table_weights), name=name)


def coverage_objective(inst: CoverageInstance) -> SetFunction:
    """Oracle ``g``: total value of covered (positive-labeled) elements."""
    values = [v if float(v) != int(v) else int(v) for v in inst.values]
    return _oracle(inst, inst.objective_elements(), values, "g")


def coverage_constraint(inst: CoverageInstance) -> SetFunction:
    """Oracle ``f``: count of covered (normal-labeled) elements."""
    return _oracle(inst, inst.constraint_elements(), None, "f")


@dataclass(frozen=True)
class GeneratorParams:
    """Parameters for :func:`generate`.

    ``coverage_degree`` and ``value_range`` are inclusive integer intervals.
    ``positive_rate``, when set, labels each element positive with that
    probability, producing a rule-selection style instance.
    """

    n_items: int
    n_elements: int
    coverage_degree: tuple[int, int] = (1, 5)
    value_range: tuple[int, int] = (1, 100)
    seed: int = 0
    positive_rate: float | None = None

    def __post_init__(self):
        if self.n_items < 1 or self.n_elements < 1:
            raise ValueError(f"need n_items, n_elements >= 1, got {self.n_items}, {self.n_elements}")
        lo, hi = self.coverage_degree
        if not 1 <= lo <= hi:
            raise ValueError(f"coverage_degree must satisfy 1 <= lo <= hi, got {self.coverage_degree}")
        if hi > self.n_elements:
            raise ValueError(f"coverage degree {hi} exceeds n_elements={self.n_elements}")
        vlo, vhi = self.value_range
        if not 0 <= vlo <= vhi:
            raise ValueError(f"value_range must satisfy 0 <= lo <= hi, got {self.value_range}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.positive_rate is not None and not 0 <= self.positive_rate <= 1:
            raise ValueError(f"positive_rate must be in [0, 1], got {self.positive_rate}")


def generate(params: GeneratorParams) -> CoverageInstance:
    rng = np.random.default_rng(params.seed)
    lo, hi = params.coverage_degree
    covers = []
    for _ in range(params.n_items):
        d = int(rng.integers(lo, hi + 1))
        covers.append(set(rng.choice(params.n_elements, size=d, replace=False).tolist()))
    values = rng.integers(params.value_range[0], params.value_range[1] + 1,
                          size=params.n_elements).tolist()
    covered = set().union(*covers)
    for e in range(params.n_elements):
        if e not in covered:
            covers[int(rng.integers(params.n_items))].add(e)
    labels = None
    if params.positive_rate is not None:
        labels = (rng.random(params.n_elements) < params.positive_rate).tolist()
    return CoverageInstance(params.n_items, params.n_elements, covers, values, labels)


def to_dict(inst: CoverageInstance) -> dict:
    doc = {
        "version": FORMAT_VERSION,
        "n_items": inst.n_items,
        "n_elements": inst.n_elements,
        "values": list(inst.values),
    }
    if inst.labels is not None:
        doc["labels"] = list(inst.labels)
    doc["covers"] = [list(c) for c in inst.covers]
    return doc


def dumps(inst: CoverageInstance) -> str:
    return json.dumps(to_dict(inst), separators=(",", ":")) + "\n"


def save(inst: CoverageInstance, path) -> None:
    Path(path).write_text(dumps(inst), encoding="utf-8", newline="\n")


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def _is_real(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def from_dict(doc, path=None) -> CoverageInstance:
    def fail(msg, field=None):
        raise InstanceFormatError(msg, path=path, field=field)

    if not isinstance(doc, dict):
        fail("top level must be a JSON object")
    unknown = sorted(set(doc) - _FIELDS)
    if unknown:
        fail(f"unknown field(s): {', '.join(unknown)}")
    for key in ("version", "n_items", "n_elements", "values", "covers"):
        if key not in doc:
            fail("missing required field", key)
    if doc["version"] != FORMAT_VERSION:
        fail(f"unsupported version {doc['version']!r}", "version")
    for key in ("n_items", "n_elements"):
        if not _is_int(doc[key]):
            fail(f"expected an integer, got {doc[key]!r}", key)
    if not isinstance(doc["values"], list):
        fail("expected an array", "values")
    for e, v in enumerate(doc["values"]):
        if not _is_real(v):
            fail(f"expected a number, got {v!r}", f"values[{e}]")
    labels = doc.get("labels")
    if labels is not None:
        if not isinstance(labels, list):
            fail("expected an array", "labels")
        for e, lab in enumerate(labels):
            if not isinstance(lab, bool):
                fail(f"expected true/false, got {lab!r}", f"labels[{e}]")
    if not isinstance(doc["covers"], list):
        fail("expected an array", "covers")
    for i, cov in enumerate(doc["covers"]):
        if not isinstance(cov, list):
            fail("expected an array of element ids", f"covers[{i}]")
        for e in cov:
            if not _is_int(e):
                fail(f"expected an integer element id, got {e!r}", f"covers[{i}]")
    try:
        return CoverageInstance(doc["n_items"], doc["n_elements"], doc["covers"],
                                doc["values"], labels)
    except InstanceFormatError as err:
        raise InstanceFormatError(err.message, path=path, field=err.field) from None


def loads(text: str, path=None) -> CoverageInstance:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as err:
        raise InstanceFormatError(f"invalid JSON: {err.msg} (column {err.colno})",
                                  path=path, line=err.lineno) from None
    except ValueError as err:
        raise InstanceFormatError(str(err), path=path) from None
    return from_dict(doc, path)


def load(path: str | os.PathLike) -> CoverageInstance:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise InstanceFormatError(f"cannot read file: {err.strerror}", path=path) from None
    return loads(text, path)
