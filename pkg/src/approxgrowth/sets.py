"""Exact finite-set algebra over group elements.

Everything here is integer or :class:`fractions.Fraction` arithmetic.  Sets
are immutable :class:`ElementSet` values; products and powers respect a
per-context element budget (see :func:`limits`) so that runaway growth
aborts with :class:`~approxgrowth.errors.ResourceError` instead of
exhausting memory.
"""

from __future__ import annotations

import contextlib
import contextvars
import csv
import io
import json
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import DomainError, PreconditionError, ResourceError
from .groups import Element, Group

__all__ = [
    "DEFAULT_BUDGET",
    "limits",
    "get_budget",
    "ElementSet",
    "GrowthProfile",
    "FuzzReport",
    "PowerChain",
    "ScaledPowers",
    "in_power",
    "bfs_tree",
    "product",
    "power",
    "ball",
    "standard_generating_set",
    "growth_profile",
    "doubling_ratio",
    "convolution_value",
    "convolution",
    "energy",
    "random_subset",
    "random_symmetric_subset",
    "pluennecke_fuzz",
    "product_chain_check",
]

DEFAULT_BUDGET = 10**7

_budget: contextvars.ContextVar[int] = contextvars.ContextVar("budget", default=DEFAULT_BUDGET)


def get_budget() -> int:
    return _budget.get()


@contextlib.contextmanager
def limits(max_elements: int):
    """Temporarily cap the size of any computed set.

    The cap applies to the *projected* size of a product, i.e. the number of
    candidate products ``|A|*|B|``, so it bounds work as well as memory.
    """
    if max_elements < 1:
        raise ValueError("budget must be positive")
    token = _budget.set(max_elements)
    try:
        yield max_elements
    finally:
        _budget.reset(token)


def _check_projected(group: Group, projected: int, what: str) -> None:
    budget = _budget.get()
    if projected > budget:
        raise ResourceError(f"{what} would examine {projected} candidate elements", budget, projected)


class ElementSet:
    """Immutable finite set of canonical elements of one group."""

    __slots__ = ("group", "_elems", "_sorted", "_hash")

    def __init__(self, group: Group, elements: Iterable = (), *, canonical: bool = False):
        self.group = group
        if canonical:
            elems = frozenset(elements)
        else:
            canon = group.canon
            items = []
            for x in elements:
                if isinstance(x, Element):
                    if x.group != group:
                        raise DomainError(f"element of {x.group.spec()} in a set over {group.spec()}")
                    x = x.encoding
                items.append(canon(x))
            elems = frozenset(items)
        self._elems = elems
        self._sorted = None
        self._hash = None

    @classmethod
    def from_literals(cls, group: Group, literals: Iterable[str]) -> ElementSet:
        return cls(group, [group.parse(t) for t in literals], canonical=True)

    @classmethod
    def singleton_identity(cls, group: Group) -> ElementSet:
        return cls(group, [group.identity], canonical=True)

    @property
    def raw(self) -> frozenset:
        return self._elems

    def __len__(self) -> int:
        return len(self._elems)

    @property
    def cardinality(self) -> int:
        return len(self._elems)

    def __iter__(self) -> Iterator:
        return iter(self.sorted())

    def __contains__(self, x) -> bool:
        if isinstance(x, Element):
            return x.group == self.group and x.encoding in self._elems
        return x in self._elems

    def sorted(self) -> list:
        """Encodings in canonical order."""
        if self._sorted is None:
            self._sorted = sorted(self._elems)
        return self._sorted

    def elements(self) -> list[Element]:
        return [Element(self.group, x) for x in self.sorted()]

    def literals(self) -> list[str]:
        render = self.group.render
        return [render(x) for x in self.sorted()]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ElementSet):
            return NotImplemented
        return self.group == other.group and self._elems == other._elems

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.group, self._elems))
        return self._hash

    def __repr__(self) -> str:
        shown = self.literals()[:8]
        more = ", ..." if len(self) > 8 else ""
        return f"ElementSet({self.group.spec()}, {{{', '.join(shown)}{more}}}, size={len(self)})"

    def _same(self, other: ElementSet) -> None:
        if self.group != other.group:
            raise DomainError(f"sets over {self.group.spec()} and {other.group.spec()} cannot be combined")

    def issubset(self, other: ElementSet) -> bool:
        self._same(other)
        return self._elems <= other._elems

    __le__ = issubset

    def union(self, other: ElementSet) -> ElementSet:
        self._same(other)
        return ElementSet(self.group, self._elems | other._elems, canonical=True)

    def intersection(self, other: ElementSet) -> ElementSet:
        self._same(other)
        return ElementSet(self.group, self._elems & other._elems, canonical=True)

    def inverse(self) -> ElementSet:
        inv = self.group.inv
        return ElementSet(self.group, [inv(x) for x in self._elems], canonical=True)

    def translate(self, g) -> ElementSet:
        """Left translate ``gA``."""
        if isinstance(g, Element):
            g = g.encoding
        mul = self.group.mul
        return ElementSet(self.group, [mul(g, x) for x in self._elems], canonical=True)

    def is_symmetric(self) -> bool:
        inv = self.group.inv
        elems = self._elems
        return all(inv(x) in elems for x in elems)

    def has_identity(self) -> bool:
        return self.group.identity in self._elems

    def symmetrized(self) -> ElementSet:
        """``A ∪ A⁻¹ ∪ {e}``."""
        inv = self.group.inv
        items = set(self._elems)
        items.update(inv(x) for x in self._elems)
        items.add(self.group.identity)
        return ElementSet(self.group, items, canonical=True)

    def __mul__(self, other: ElementSet) -> ElementSet:
        return product(self, other)

    def __pow__(self, n: int) -> ElementSet:
        return power(self, n)


def _partial_product(mul, outer: list, inner: frozenset, outer_left: bool) -> set:
    if outer_left:
        return {mul(a, b) for a in outer for b in inner}
    return {mul(a, b) for b in outer for a in inner}


def product(A: ElementSet, B: ElementSet, *, shards: int = 1, executor=None) -> ElementSet:
    """The product set ``AB = {ab : a in A, b in B}``.

    The smaller operand is iterated on the outside.  With ``shards > 1`` the
    outer operand is split into that many chunks whose partial products are
    merged; ``executor`` (any ``concurrent.futures`` executor) may evaluate
    the chunks.  The result does not depend on either.
    """
    A._same(B)
    group = A.group
    _check_projected(group, len(A) * len(B), "product")
    if not A.raw or not B.raw:
        return ElementSet(group, (), canonical=True)
    outer_left = len(A) <= len(B)
    outer, inner = (A, B) if outer_left else (B, A)
    mul = group.mul
    if shards <= 1:
        return ElementSet(group, _partial_product(mul, outer.raw, inner.raw, outer_left), canonical=True)
    keys = outer.sorted()
    size = -(-len(keys) // shards)
    chunks = [keys[i : i + size] for i in range(0, len(keys), size)]
    if executor is None:
        parts = [_partial_product(mul, c, inner.raw, outer_left) for c in chunks]
    else:
        parts = list(
            executor.map(_partial_product, [mul] * len(chunks), chunks, [inner.raw] * len(chunks), [outer_left] * len(chunks))
        )
    merged: set = set()
    for p in parts:
        merged |= p
    return ElementSet(group, merged, canonical=True)


class PowerChain:
    """Lazily computed powers ``S^0, S^1, ...`` of a fixed set.

    When the identity lies in ``S`` the chain is nested, so each step only
    multiplies the newest layer by ``S`` and stops growing once it
    saturates.  Only the two most recent powers and those explicitly asked
    for are retained; sizes of every computed power are kept.

    The budget is charged cumulatively: building ``S^n`` examines every
    candidate product generated on the way, and that running total is what
    must stay within the budget.
    """

    def __init__(self, S: ElementSet):
        self.S = S
        self.group = S.group
        self.nested = S.has_identity()
        self.sizes: list[int] = [1]
        self.saturated_at: int | None = None
        self.work = 0
        self._n = 0
        self._prev: frozenset | None = None
        self._cur: frozenset = frozenset([self.group.identity])
        self._kept: dict[int, ElementSet] = {0: ElementSet.singleton_identity(self.group)}

    def _step(self) -> None:
        S = self.S.raw
        mul = self.group.mul
        cur = self._cur
        if self.nested:
            frontier = cur if self._prev is None else cur - self._prev
            step = len(cur) + len(frontier) * len(S)
            _check_projected(self.group, self.work + step, f"power {self._n + 1}")
            self.work += step
            new = set(cur)
            for x in frontier:
                for s in S:
                    new.add(mul(x, s))
            nxt = frozenset(new)
        else:
            step = len(cur) * len(S)
            _check_projected(self.group, self.work + step, f"power {self._n + 1}")
            self.work += step
            nxt = frozenset({mul(x, s) for x in cur for s in S})
        self._prev, self._cur = cur, nxt
        self._n += 1
        self.sizes.append(len(nxt))
        if self.nested and len(nxt) == len(cur):
            self.saturated_at = self._n - 1

    def size(self, n: int) -> int:
        if n < 0:
            raise PreconditionError(f"radius must be non-negative, got {n}")
        self._advance(n)
        if self.saturated_at is not None and n > self.saturated_at:
            return self.sizes[self.saturated_at]
        return self.sizes[n]

    def _advance(self, n: int) -> None:
        while self._n < n and self.saturated_at is None:
            self._step()

    def get(self, n: int) -> ElementSet:
        if n < 0:
            raise PreconditionError(f"radius must be non-negative, got {n}")
        if self.saturated_at is not None and n > self.saturated_at:
            n = self.saturated_at
        if n in self._kept:
            return self._kept[n]
        if n < self._n - 1 or (n == self._n - 1 and self._prev is None):
            # evicted; recompute from scratch
            fresh = PowerChain(self.S)
            result = fresh.get(n)
            self._kept[n] = result
            return result
        self._advance(n)
        if self.saturated_at is not None and n > self.saturated_at:
            return self.get(self.saturated_at)
        raw = self._cur if n == self._n else self._prev
        result = ElementSet(self.group, raw, canonical=True)
        self._kept[n] = result
        return result


class ScaledPowers:
    """View ``j -> T^j`` of a chain over ``S`` with ``T = S^scale``.

    Used when a tile is itself a power (``U = V²``): stepping through the
    smaller ``V`` is much cheaper than multiplying by ``U``.
    """

    def __init__(self, chain: PowerChain, scale: int):
        self.chain = chain
        self.scale = scale

    @property
    def group(self) -> Group:
        return self.chain.group

    def get(self, j: int) -> ElementSet:
        return self.chain.get(self.scale * j)

    def size(self, j: int) -> int:
        return self.chain.size(self.scale * j)


def in_power(powers, g, N: int) -> bool:
    """Whether ``g ∈ W^N`` for a symmetric ``W`` containing the identity.

    ``powers`` is a :class:`PowerChain` (or :class:`ScaledPowers`) for ``W``.
    Meets in the middle, ``g ∈ W^a W^b`` iff ``g w ∈ W^a`` for some
    ``w ∈ W^b``, so only ``W^ceil(N/2)`` is ever materialised.
    """
    a, b = (N + 1) // 2, N // 2
    Wa = powers.get(a).raw
    if g in Wa:
        return True
    mul = powers.group.mul
    return any(mul(g, w) in Wa for w in powers.get(b).raw)


def bfs_tree(S: ElementSet, radius: int) -> tuple[dict, dict]:
    """Breadth-first spanning tree of the ball ``S^radius`` in the Cayley graph.

    Returns ``(parent, depth)`` where ``x = parent[x] * s`` for some
    ``s ∈ S`` and ``depth[x]`` is the word length.  Neighbours are explored
    in canonical order so the tree is deterministic.
    """
    group = S.group
    mul = group.mul
    gens = [s for s in S.sorted() if s != group.identity]
    e = group.identity
    parent = {e: None}
    depth = {e: 0}
    layer = [e]
    for d in range(1, radius + 1):
        _check_projected(group, len(depth) + len(layer) * len(gens), f"ball {d}")
        nxt = []
        for x in layer:
            for s in gens:
                y = mul(x, s)
                if y not in depth:
                    depth[y] = d
                    parent[y] = x
                    nxt.append(y)
        if not nxt:
            break
        layer = sorted(nxt)
    return parent, depth


def power(S: ElementSet, n: int) -> ElementSet:
    """``S^n`` with ``S^0 = {e}``."""
    return PowerChain(S).get(n)


def standard_generating_set(group: Group) -> ElementSet:
    """Standard generators together with their inverses and the identity."""
    return ElementSet(group, group.standard_generators(), canonical=True).symmetrized()


def ball(group: Group, radius: int, generators: ElementSet | None = None) -> ElementSet:
    S = generators if generators is not None else standard_generating_set(group)
    return power(S, radius)


def _require_ball_generator(S: ElementSet) -> None:
    if not S.has_identity():
        raise PreconditionError("generating set must contain the identity")
    if not S.is_symmetric():
        raise PreconditionError("generating set must be symmetric")


@dataclass(frozen=True)
class GrowthProfile:
    """``values[n] = |S^n|`` for ``n = 0..N``."""

    generating_set: ElementSet
    values: tuple

    @property
    def radius(self) -> int:
        return len(self.values) - 1

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "beta"])
        for n, b in enumerate(self.values):
            w.writerow([n, b])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str, generating_set: ElementSet) -> GrowthProfile:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["n", "beta"]:
            raise ValueError("growth CSV must start with header n,beta")
        values = []
        for i, (n, b) in enumerate(rows[1:]):
            if int(n) != i:
                raise ValueError(f"row {i + 2}: expected n={i}, got {n}")
            values.append(int(b))
        return cls(generating_set, tuple(values))


def growth_profile(S: ElementSet, N: int) -> GrowthProfile:
    _require_ball_generator(S)
    if N < 0:
        raise PreconditionError(f"radius must be non-negative, got {N}")
    chain = PowerChain(S)
    return GrowthProfile(S, tuple(chain.size(n) for n in range(N + 1)))


def doubling_ratio(S: ElementSet, n: int) -> Fraction:
    """``|S^2n| / |S^n|`` as an exact rational."""
    _require_ball_generator(S)
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")
    chain = PowerChain(S)
    return Fraction(chain.size(2 * n), chain.size(n))


def _require_symmetric(B: ElementSet) -> None:
    if not B.is_symmetric():
        raise PreconditionError("B must be symmetric")


def convolution_value(A: ElementSet, B: ElementSet, x) -> int:
    """``1_A * 1_B (x) = |A ∩ xB|`` for symmetric ``B``, by direct intersection."""
    A._same(B)
    _require_symmetric(B)
    if isinstance(x, Element):
        if x.group != A.group:
            raise DomainError("x lies in a different group")
        x = x.encoding
    mul = A.group.mul
    inside = A.raw
    return sum(1 for b in B.raw if mul(x, b) in inside)


def convolution(A: ElementSet, B: ElementSet) -> dict:
    """Map ``x -> |A ∩ xB|`` over the support ``AB`` (``B`` symmetric).

    Computed by counting pairs: ``a = xb`` exactly when ``x = ab⁻¹``.
    """
    A._same(B)
    _require_symmetric(B)
    _check_projected(A.group, len(A) * len(B), "convolution")
    mul, inv = A.group.mul, A.group.inv
    binv = [inv(b) for b in B.raw]
    return dict(Counter(mul(a, b) for a in A.raw for b in binv))


def energy(A: ElementSet, B: ElementSet) -> int:
    """Multiplicative energy ``E(A,B) = sum_x |A ∩ xB|^2``."""
    return sum(c * c for c in convolution(A, B).values())


# -- random sets and fuzzing ---------------------------------------------------


def random_subset(pool: ElementSet, k: int, rng: random.Random) -> ElementSet:
    """Uniform ``k``-subset of ``pool``, without replacement."""
    k = min(k, len(pool))
    return ElementSet(pool.group, rng.sample(pool.sorted(), k), canonical=True)


def random_symmetric_subset(pool: ElementSet, k: int, rng: random.Random) -> ElementSet:
    return random_subset(pool, k, rng).symmetrized()


@dataclass
class FuzzReport:
    seed: int
    trials: int
    checks: Counter = field(default_factory=Counter)
    violations: list = field(default_factory=list)

    def merge(self, other: FuzzReport) -> None:
        self.checks.update(other.checks)
        self.violations.extend(other.violations)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "checks": dict(sorted(self.checks.items())),
            "violations": self.violations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _fraction_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def pluennecke_fuzz(
    group: Group,
    trials: int,
    seed: int,
    *,
    cap: int = 4,
    radius: int = 20,
    max_size: int = 8,
) -> FuzzReport:
    """Check ``|mA - nA| <= K^(m+n) |A|`` on random ``A`` with ``K = |A+A|/|A|``.

    ``A`` is drawn uniformly from the ball of the given radius, with size
    uniform in ``1..max_size``; every ``(m, n)`` with ``1 <= m+n <= cap`` is
    tested.  A violation means a bug in the set arithmetic.
    """
    if not group.abelian:
        raise PreconditionError(f"{group.spec()} is not abelian")
    rng = random.Random(seed)
    pool = ball(group, radius)
    report = FuzzReport(seed=seed, trials=trials)
    for trial in range(trials):
        A = random_subset(pool, rng.randint(1, max_size), rng)
        negA = A.inverse()
        K = Fraction(len(product(A, A)), len(A))
        pos = PowerChain(A)
        neg = PowerChain(negA)
        for total in range(1, cap + 1):
            for m in range(total + 1):
                n = total - m
                size = len(product(pos.get(m), neg.get(n)))
                report.checks["pluennecke"] += 1
                if size > K**total * len(A):
                    report.violations.append(
                        {
                            "check": "pluennecke",
                            "group": group.spec(),
                            "trial": trial,
                            "A": A.literals(),
                            "m": m,
                            "n": n,
                            "size": size,
                            "K": _fraction_str(K),
                        }
                    )
    return report


def product_chain_check(A: ElementSet, signs) -> bool:
    """``|A^e1 ... A^em| <= K^(3(m-2)) |A|`` with ``K = |A^3|/|A|``."""
    signs = list(signs)
    if len(signs) < 3:
        raise PreconditionError("need at least three factors")
    if any(e not in (1, -1) for e in signs):
        raise PreconditionError("signs must be +1 or -1")
    if not A.raw:
        raise PreconditionError("A must be non-empty")
    K = Fraction(len(power(A, 3)), len(A))
    Ainv = A.inverse()
    acc = A if signs[0] == 1 else Ainv
    for e in signs[1:]:
        acc = product(acc, A if e == 1 else Ainv)
    return len(acc) <= K ** (3 * (len(signs) - 2)) * len(A)
