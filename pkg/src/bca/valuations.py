"""Set-function valuations over a small item universe.

Item sets are bitmasks wrapped in :class:`ItemSet`.  Every valuation can
evaluate a single set directly and can also materialise its full value
table (one entry per subset), which the demand oracles and exhaustive
checkers index into.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

MAX_ITEMS = 24
MAX_CHECK_ITEMS = 10
TOL = 1e-9


class UniverseError(ValueError):
    """An item set or valuation does not live on the expected universe."""


class SizeLimitError(ValueError):
    """An exhaustive computation was requested beyond its enumeration cap."""


def _check_m(m: int) -> None:
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise UniverseError(f"universe size must be a positive integer, got {m!r}")
    if m > MAX_ITEMS:
        raise SizeLimitError(f"universe size {m} exceeds the cap of {MAX_ITEMS} items")


@dataclass(frozen=True)
class ItemSet:
    """A subset of ``{0, ..., m-1}`` stored as a bitmask."""

    mask: int
    m: int

    def __post_init__(self):
        _check_m(self.m)
        if self.mask < 0 or self.mask >> self.m:
            raise UniverseError(f"mask {self.mask:#x} has members outside range({self.m})")

    @classmethod
    def of(cls, members: Iterable[int], m: int) -> "ItemSet":
        mask = 0
        for j in members:
            if not 0 <= j < m:
                raise UniverseError(f"item {j} outside range({m})")
            mask |= 1 << j
        return cls(mask, m)

    @classmethod
    def empty(cls, m: int) -> "ItemSet":
        return cls(0, m)

    @classmethod
    def full(cls, m: int) -> "ItemSet":
        return cls((1 << m) - 1, m)

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.m) if self.mask >> j & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __contains__(self, j: int) -> bool:
        return 0 <= j < self.m and bool(self.mask >> j & 1)

    def __or__(self, other: "ItemSet") -> "ItemSet":
        return ItemSet(self.mask | self._same(other).mask, self.m)

    def __and__(self, other: "ItemSet") -> "ItemSet":
        return ItemSet(self.mask & self._same(other).mask, self.m)

    def __sub__(self, other: "ItemSet") -> "ItemSet":
        return ItemSet(self.mask & ~self._same(other).mask, self.m)

    def issubset(self, other: "ItemSet") -> bool:
        return self.mask & ~self._same(other).mask == 0

    def _same(self, other: "ItemSet") -> "ItemSet":
        if other.m != self.m:
            raise UniverseError(f"item sets over different universes ({self.m} vs {other.m})")
        return other

    def __repr__(self) -> str:
        return f"ItemSet({set(self.members) or '{}'}, m={self.m})"


def subsets(m: int) -> Iterator[ItemSet]:
    """All ``2**m`` subsets in mask order."""
    _check_m(m)
    for mask in range(1 << m):
        yield ItemSet(mask, m)


@lru_cache(maxsize=None)
def bit_matrix(m: int) -> np.ndarray:
    """``(2**m, m)`` 0/1 matrix; row ``s`` is the indicator vector of mask ``s``."""
    masks = np.arange(1 << m, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(m, dtype=np.int64)) & 1
    bits.setflags(write=False)
    return bits


def subset_sums(weights: Sequence[float]) -> np.ndarray:
    """Additive table: entry ``s`` is the sum of ``weights`` over mask ``s``."""
    w = np.asarray(weights, dtype=float)
    return bit_matrix(len(w)) @ w


class Valuation:
    """Monotone normalised set function on ``m`` items.

    Subclasses implement ``_eval`` (single set) and ``_table`` (all sets);
    the two routes are deliberately independent so tests can cross-check
    them.
    """

    m: int

    def value(self, S: ItemSet) -> float:
        if S.m != self.m:
            raise UniverseError(f"set over {S.m} items evaluated by a valuation over {self.m}")
        return float(self._eval(S.mask))

    def __call__(self, S: ItemSet) -> float:
        return self.value(S)

    @cached_property
    def table(self) -> np.ndarray:
        t = np.asarray(self._table(), dtype=float)
        t.setflags(write=False)
        return t

    def scaled(self, factor: float) -> "Valuation":
        raise NotImplementedError

    def _eval(self, mask: int) -> float:
        raise NotImplementedError

    def _table(self) -> np.ndarray:
        raise NotImplementedError


def _weights(ws: Iterable[float], what: str) -> tuple[float, ...]:
    out = tuple(float(w) for w in ws)
    for w in out:
        if not (w >= 0 and math.isfinite(w)):
            raise ValueError(f"{what} must be finite and nonnegative, got {w!r}")
    return out


@dataclass(frozen=True, eq=True)
class Additive(Valuation):
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", _weights(self.weights, "additive weights"))
        _check_m(len(self.weights))

    @property
    def m(self) -> int:
        return len(self.weights)

    def _eval(self, mask):
        return sum(w for j, w in enumerate(self.weights) if mask >> j & 1)

    def _table(self):
        return subset_sums(self.weights)

    def scaled(self, factor):
        return Additive(tuple(w * factor for w in self.weights))


@dataclass(frozen=True, eq=True)
class XOS(Valuation):
    """Maximum over additive clauses; ``clauses[k][j]`` is clause k's weight on item j."""

    clauses: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        clauses = tuple(_weights(c, "clause weights") for c in self.clauses)
        if not clauses:
            raise ValueError("an XOS valuation needs at least one clause")
        m = len(clauses[0])
        _check_m(m)
        for k, c in enumerate(clauses):
            if len(c) != m:
                raise UniverseError(f"clause {k} has length {len(c)}, expected {m}")
        object.__setattr__(self, "clauses", clauses)

    @property
    def m(self) -> int:
        return len(self.clauses[0])

    def clause_values(self, mask: int) -> list[float]:
        return [sum(w for j, w in enumerate(c) if mask >> j & 1) for c in self.clauses]

    def _eval(self, mask):
        return max(self.clause_values(mask))

    def _table(self):
        return np.max(bit_matrix(self.m) @ np.asarray(self.clauses, dtype=float).T, axis=1)

    def scaled(self, factor):
        return XOS(tuple(tuple(w * factor for w in c) for c in self.clauses))

    def without_clause(self, k: int) -> "XOS":
        if len(self.clauses) < 2:
            raise ValueError("cannot drop the only clause")
        return XOS(self.clauses[:k] + self.clauses[k + 1:])


@dataclass(frozen=True, eq=True)
class Coverage(Valuation):
    """Weighted coverage: item j covers the elements in ``covers[j]``."""

    covers: tuple[frozenset[int], ...]
    element_weights: tuple[float, ...]

    def __post_init__(self):
        covers = tuple(frozenset(int(e) for e in c) for c in self.covers)
        ew = _weights(self.element_weights, "element weights")
        _check_m(len(covers))
        for j, c in enumerate(covers):
            if any(not 0 <= e < len(ew) for e in c):
                raise ValueError(f"item {j} covers an element outside range({len(ew)})")
        object.__setattr__(self, "covers", covers)
        object.__setattr__(self, "element_weights", ew)

    @property
    def m(self) -> int:
        return len(self.covers)

    def _eval(self, mask):
        covered: set[int] = set()
        for j, c in enumerate(self.covers):
            if mask >> j & 1:
                covered |= c
        return sum(self.element_weights[e] for e in covered)

    def _table(self):
        # element e is covered by mask s iff s hits the items covering e
        hit = np.zeros((1 << self.m, len(self.element_weights)), dtype=bool)
        bits = bit_matrix(self.m).astype(bool)
        for e in range(len(self.element_weights)):
            owners = [j for j, c in enumerate(self.covers) if e in c]
            if owners:
                hit[:, e] = bits[:, owners].any(axis=1)
        return hit.astype(float) @ np.asarray(self.element_weights, dtype=float)

    def scaled(self, factor):
        return Coverage(self.covers, tuple(w * factor for w in self.element_weights))


@dataclass(frozen=True, eq=True)
class Capped(Valuation):
    """``min(inner, cap)``; the liquid valuation when ``cap`` is the budget."""

    inner: Valuation
    cap: float

    def __post_init__(self):
        cap = float(self.cap)
        if not cap >= 0:
            raise ValueError(f"cap must be nonnegative, got {self.cap!r}")
        object.__setattr__(self, "cap", cap)

    @property
    def m(self) -> int:
        return self.inner.m

    def _eval(self, mask):
        return min(self.inner._eval(mask), self.cap)

    def _table(self):
        return np.minimum(self.inner.table, self.cap)

    def scaled(self, factor):
        return Capped(self.inner.scaled(factor), self.cap * factor)


@dataclass(frozen=True, eq=False)
class Table(Valuation):
    """Explicit value table indexed by mask; used for hand-built stubs."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(x) for x in self.values)
        n = len(vals)
        if n < 2 or n & (n - 1):
            raise ValueError("table length must be a power of two >= 2")
        if vals[0] != 0:
            raise ValueError("table valuations must be normalised (value of the empty set is 0)")
        object.__setattr__(self, "values", vals)
        _check_m(self.m)

    @classmethod
    def from_dict(cls, m: int, values: dict[Iterable[int] | int, float]) -> "Table":
        """Build from ``{members: value}``; unspecified sets are 0."""
        vals = [0.0] * (1 << m)
        for key, x in values.items():
            mask = key if isinstance(key, int) else ItemSet.of(key, m).mask
            vals[mask] = float(x)
        return cls(tuple(vals))

    @property
    def m(self) -> int:
        return len(self.values).bit_length() - 1

    def _eval(self, mask):
        return self.values[mask]

    def _table(self):
        return np.array(self.values)

    def scaled(self, factor):
        return Table(tuple(x * factor for x in self.values))

    def __eq__(self, other):
        return isinstance(other, Table) and self.values == other.values

    def __hash__(self):
        return hash(self.values)


@dataclass(frozen=True)
class Bidder:
    valuation: Valuation
    budget: float

    def __post_init__(self):
        b = float(self.budget)
        if not b >= 0:
            raise ValueError(f"budget must be nonnegative, got {self.budget!r}")
        object.__setattr__(self, "budget", b)

    @property
    def m(self) -> int:
        return self.valuation.m


@dataclass(frozen=True)
class Instance:
    m: int
    bidders: tuple[Bidder, ...]

    def __post_init__(self):
        _check_m(self.m)
        object.__setattr__(self, "bidders", tuple(self.bidders))
        if not self.bidders:
            raise ValueError("an instance needs at least one bidder")
        for i, b in enumerate(self.bidders):
            if b.m != self.m:
                raise UniverseError(f"bidder {i} valuation is on {b.m} items, instance has {self.m}")

    @property
    def n(self) -> int:
        return len(self.bidders)

    def with_bidder(self, i: int, bidder: Bidder) -> "Instance":
        bidders = list(self.bidders)
        bidders[i] = bidder
        return Instance(self.m, tuple(bidders))

    def restricted(self, idx: Iterable[int]) -> "Instance":
        return Instance(self.m, tuple(self.bidders[i] for i in idx))


def liquid(b: Bidder) -> Capped:
    """The bidder's valuation capped at her budget."""
    v = b.valuation
    if isinstance(v, Capped) and v.cap == b.budget:
        return v
    return Capped(v, b.budget)


@dataclass(frozen=True)
class AdditiveClause:
    weights: tuple[float, ...]

    @property
    def m(self) -> int:
        return len(self.weights)

    def value(self, S: ItemSet) -> float:
        return sum(self.weights[j] for j in S)

    def __call__(self, S: ItemSet) -> float:
        return self.value(S)

    def __getitem__(self, j: int) -> float:
        return self.weights[j]


def xos_clause(v: Valuation, S: ItemSet) -> AdditiveClause:
    """Additive clause ``A`` with ``A(S) = v(S)`` and ``A <= v`` everywhere.

    For XOS valuations this is the maximising clause (lowest index on
    ties).  Coverage valuations are submodular, so the marginals of S's
    members taken in ascending order form a valid clause.  Capped
    valuations delegate to :func:`liquid_xos_clause`.
    """
    if S.m != v.m:
        raise UniverseError(f"set over {S.m} items, valuation over {v.m}")
    if isinstance(v, Additive):
        return AdditiveClause(v.weights)
    if isinstance(v, XOS):
        vals = v.clause_values(S.mask)
        best = max(vals)
        k = next(k for k, x in enumerate(vals) if x >= best - TOL)
        return AdditiveClause(v.clauses[k])
    if isinstance(v, Coverage):
        w = [0.0] * v.m
        prefix, prev = 0, 0.0
        for j in S:
            prefix |= 1 << j
            cur = v._eval(prefix)
            w[j] = cur - prev
            prev = cur
        return AdditiveClause(tuple(w))
    if isinstance(v, Capped):
        return liquid_xos_clause(v.inner, v.cap, S)
    raise TypeError(f"{type(v).__name__} valuations have no clause oracle")


def liquid_xos_clause(v: Valuation, B: float, S: ItemSet) -> AdditiveClause:
    """Clause for ``min(v, B)`` at ``S``: prefix-cap v's clause along S in index order."""
    base = xos_clause(v, S)
    w = [0.0] * v.m
    prefix = 0.0
    for j in S:
        if prefix + base[j] <= B:
            w[j] = base[j]
            prefix += base[j]
        else:
            w[j] = max(B - prefix, 0.0)
            prefix = B
    return AdditiveClause(tuple(w))


@dataclass(frozen=True)
class ClassReport:
    cls: str
    holds: bool
    witness: tuple[ItemSet, ...] | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.holds


CLASSES = ("monotone", "submodular", "subadditive", "xos-dominated-by")


def check_class(v: Valuation, cls: str,
                oracle: Callable[[Valuation, ItemSet], AdditiveClause] = xos_clause,
                tol: float = TOL) -> ClassReport:
    """Exhaustively test a class-defining inequality over all set pairs.

    ``xos-dominated-by`` checks that ``oracle(v, S)`` is dominated by ``v``
    on every set and tight at ``S``, for every ``S``.
    """
    if cls not in CLASSES:
        raise ValueError(f"unknown class {cls!r}; expected one of {CLASSES}")
    m = v.m
    if m > MAX_CHECK_ITEMS:
        raise SizeLimitError(f"exhaustive class checks are capped at {MAX_CHECK_ITEMS} items, got {m}")
    t = v.table
    masks = np.arange(1 << m)

    def pair(s, u):
        return ItemSet(int(s), m), ItemSet(int(u), m)

    if cls == "monotone":
        for j in range(m):
            grown = masks | (1 << j)
            bad = np.flatnonzero(t > t[grown] + tol)
            if bad.size:
                s = bad[0]
                return ClassReport(cls, False, pair(s, s | (1 << j)))
        return ClassReport(cls, True)

    if cls == "xos-dominated-by":
        bits = bit_matrix(m)
        for s in masks:
            S = ItemSet(int(s), m)
            a = bits @ np.asarray(oracle(v, S).weights, dtype=float)
            if abs(a[s] - t[s]) > tol:
                return ClassReport(cls, False, (S,), f"clause not tight: {a[s]} != {t[s]}")
            bad = np.flatnonzero(a > t + tol)
            if bad.size:
                return ClassReport(cls, False, pair(s, bad[0]), "clause exceeds the valuation")
        return ClassReport(cls, True)

    S, T = np.meshgrid(masks, masks, indexing="ij")
    if cls == "submodular":
        viol = t[S] + t[T] < t[S & T] + t[S | T] - tol
    else:
        viol = t[S] + t[T] < t[S | T] - tol
    bad = np.argwhere(viol)
    if bad.size:
        return ClassReport(cls, False, pair(*bad[0]))
    return ClassReport(cls, True)
