"""Computational groups given by a canonical encoding and an explicit group law.

Elements are stored as plain hashable encodings (ints, tuples, strings) so
that set arithmetic stays cheap; :class:`Element` wraps an encoding together
with its group for the user-facing API.  The canonical order of every family
is Python's native ordering of the encodings, i.e. lexicographic.

Encodings per family:

==============  ==========================================================
lattice(d)      ``tuple`` of ``d`` ints
cyclic(q)       ``int`` in ``[0, q)``
dihedral(q)     ``(k, b)``: the element ``s^b r^k``, ``0 <= k < q``
heisenberg      ``(a, b, c)`` with ``(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')``
free(rank)      reduced ``str`` over ``a..``; uppercase letters are inverses
lamplighter     ``(lit, pos)``: sorted tuple of lit lamps and the cursor
product(...)    ``tuple`` of component encodings
==============  ==========================================================
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Hashable, Iterable

from .errors import DomainError, ElementParseError

__all__ = [
    "Group",
    "IntegerLattice",
    "Cyclic",
    "Dihedral",
    "Heisenberg",
    "FreeGroup",
    "Lamplighter",
    "DirectProduct",
    "Element",
    "parse_group",
    "parse_element",
    "multiply",
    "invert",
    "identity",
    "render",
]

Encoding = Hashable


class _Scanner:
    """Minimal cursor over a literal, used to report error positions."""

    def __init__(self, text: str, offset: int = 0):
        self.text = text
        self.pos = 0
        self.offset = offset

    def error(self, message: str, pos: int | None = None) -> ElementParseError:
        at = self.pos if pos is None else pos
        return ElementParseError(message, self.text, at + self.offset)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def accept(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str) -> None:
        if not self.accept(ch):
            found = self.peek() or "end of input"
            raise self.error(f"expected {ch!r}, found {found!r}")

    _INT = re.compile(r"[+-]?\d+")

    def integer(self) -> int:
        self.skip_ws()
        m = self._INT.match(self.text, self.pos)
        if m is None:
            raise self.error("expected a signed integer")
        self.pos = m.end()
        return int(m.group())

    def integer_list(self, open_: str, close: str) -> list[int]:
        self.expect(open_)
        values: list[int] = []
        if self.accept(close):
            return values
        values.append(self.integer())
        while not self.accept(close):
            self.expect(",")
            values.append(self.integer())
        return values

    def end(self) -> None:
        if self.peek():
            raise self.error(f"unexpected trailing {self.peek()!r}")


class Group:
    """Abstract computational group.

    Subclasses implement :meth:`mul`, :meth:`inv`, :meth:`canon`,
    :meth:`parse` and :meth:`render` on raw encodings.  Instances are
    immutable and compare by family parameters.
    """

    family: str = ""
    finite: bool = False
    abelian: bool = False
    identity: Encoding = None

    @property
    def order(self) -> int | None:
        return None

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def canon(self, x):
        """Validate ``x`` and return its canonical encoding."""
        raise NotImplementedError

    def parse(self, text: str):
        s = _Scanner(text)
        x = self._parse(s)
        s.end()
        return x

    def _parse(self, s: _Scanner):
        raise NotImplementedError

    def render(self, x) -> str:
        raise NotImplementedError

    def standard_generators(self) -> list:
        """A generating set, without identity or inverses."""
        raise NotImplementedError

    def is_element(self, x) -> bool:
        try:
            return self.canon(x) == x
        except DomainError:
            return False

    def element(self, x) -> Element:
        return Element(self, self.canon(x))

    def __str__(self) -> str:
        return self.spec()

    def spec(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True, repr=False)
class IntegerLattice(Group):
    dim: int = 1

    family = "lattice"
    abelian = True

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError(f"lattice dimension must be positive, got {self.dim}")

    @property
    def identity(self):
        return (0,) * self.dim

    def mul(self, a, b):
        d = self.dim
        if d == 1:
            return (a[0] + b[0],)
        if d == 2:
            return (a[0] + b[0], a[1] + b[1])
        return tuple([x + y for x, y in zip(a, b)])

    def inv(self, a):
        return tuple([-x for x in a])

    def canon(self, x):
        if isinstance(x, int) and not isinstance(x, bool) and self.dim == 1:
            return (x,)
        if not isinstance(x, (tuple, list)) or len(x) != self.dim:
            raise DomainError(f"{x!r} is not an element of {self.spec()}")
        if not all(isinstance(c, int) and not isinstance(c, bool) for c in x):
            raise DomainError(f"{x!r} has non-integer coordinates")
        return tuple(x)

    def _parse(self, s):
        if self.dim == 1 and s.peek() != "(":
            return (s.integer(),)
        start = s.pos
        values = s.integer_list("(", ")")
        if len(values) != self.dim:
            raise s.error(f"expected {self.dim} coordinates, got {len(values)}", start)
        return tuple(values)

    def render(self, x):
        return "(" + ",".join(str(c) for c in x) + ")"

    def standard_generators(self):
        gens = []
        for i in range(self.dim):
            e = [0] * self.dim
            e[i] = 1
            gens.append(tuple(e))
        return gens

    def spec(self):
        return f"lattice({self.dim})"

    __repr__ = spec


@dataclass(frozen=True, repr=False)
class Cyclic(Group):
    q: int = 1

    family = "cyclic"
    finite = True
    abelian = True
    identity = 0

    def __post_init__(self):
        if self.q < 1:
            raise DomainError(f"cyclic order must be positive, got {self.q}")

    @property
    def order(self):
        return self.q

    def mul(self, a, b):
        c = a + b
        return c - self.q if c >= self.q else c

    def inv(self, a):
        return (self.q - a) % self.q

    def canon(self, x):
        if not isinstance(x, int) or isinstance(x, bool):
            raise DomainError(f"{x!r} is not an element of {self.spec()}")
        return x % self.q

    def _parse(self, s):
        return s.integer() % self.q

    def render(self, x):
        return str(x)

    def standard_generators(self):
        return [1 % self.q]

    def spec(self):
        return f"cyclic({self.q})"

    __repr__ = spec


@dataclass(frozen=True, repr=False)
class Dihedral(Group):
    """Symmetries of a regular ``q``-gon; ``(k, b)`` encodes ``s^b r^k``."""

    q: int = 3

    family = "dihedral"
    finite = True
    identity = (0, 0)

    def __post_init__(self):
        if self.q < 1:
            raise DomainError(f"dihedral parameter must be positive, got {self.q}")

    @property
    def order(self):
        return 2 * self.q

    @property
    def abelian(self):
        return self.q <= 2

    def mul(self, a, b):
        # r^k s = s r^-k, so (s^b1 r^k1)(s^b2 r^k2) = s^(b1+b2) r^(+-k1 + k2)
        k1, b1 = a
        k2, b2 = b
        k = (k2 - k1) if b2 else (k1 + k2)
        return (k % self.q, b1 ^ b2)

    def inv(self, a):
        k, b = a
        if b:
            return a
        return ((-k) % self.q, 0)

    def canon(self, x):
        if (
            not isinstance(x, (tuple, list))
            or len(x) != 2
            or not all(isinstance(c, int) and not isinstance(c, bool) for c in x)
            or x[1] not in (0, 1)
        ):
            raise DomainError(f"{x!r} is not an element of {self.spec()}")
        return (x[0] % self.q, x[1])

    def _parse(self, s):
        if s.accept("e"):
            return (0, 0)
        b = 1 if s.accept("s") else 0
        k = 0
        if s.accept("r"):
            k = s.integer() if s.accept("^") else 1
        elif not b:
            raise s.error("expected 'r^k', 's r^k' or 'e'")
        return (k % self.q, b)

    def render(self, x):
        k, b = x
        return f"s r^{k}" if b else f"r^{k}"

    def standard_generators(self):
        return [(1 % self.q, 0), (0, 1)]

    def spec(self):
        return f"dihedral({self.q})"

    __repr__ = spec


@dataclass(frozen=True, repr=False)
class Heisenberg(Group):
    """Integer Heisenberg group, isomorphic to upper unitriangular 3x3 matrices."""

    family = "heisenberg"
    identity = (0, 0, 0)

    def mul(self, a, b):
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1])

    def inv(self, a):
        x, y, z = a
        return (-x, -y, x * y - z)

    def canon(self, x):
        if (
            not isinstance(x, (tuple, list))
            or len(x) != 3
            or not all(isinstance(c, int) and not isinstance(c, bool) for c in x)
        ):
            raise DomainError(f"{x!r} is not an element of heisenberg")
        return tuple(x)

    def _parse(self, s):
        start = s.pos
        values = s.integer_list("(", ")")
        if len(values) != 3:
            raise s.error(f"expected 3 coordinates, got {len(values)}", start)
        return tuple(values)

    def render(self, x):
        return "(" + ",".join(str(c) for c in x) + ")"

    def standard_generators(self):
        return [(1, 0, 0), (0, 1, 0)]

    def spec(self):
        return "heisenberg"

    __repr__ = spec


@dataclass(frozen=True, repr=False)
class FreeGroup(Group):
    """Free group on the first ``rank`` lowercase letters.

    Elements are freely reduced words; ``A`` is the inverse of ``a``.  The
    empty word is the identity and renders as ``1``.
    """

    rank: int = 2

    family = "free"
    identity = ""

    def __post_init__(self):
        if not 1 <= self.rank <= 26:
            raise DomainError(f"free group rank must lie in 1..26, got {self.rank}")

    def mul(self, a, b):
        i = len(a)
        j = 0
        n = len(b)
        while i > 0 and j < n and a[i - 1] == b[j].swapcase():
            i -= 1
            j += 1
        return a[:i] + b[j:]

    def inv(self, a):
        return a[::-1].swapcase()

    def canon(self, x):
        if not isinstance(x, str):
            raise DomainError(f"{x!r} is not an element of {self.spec()}")
        letters = self._letters()
        out: list[str] = []
        for ch in x:
            if ch.lower() not in letters:
                raise DomainError(f"{ch!r} is not a generator of {self.spec()}")
            if out and out[-1] == ch.swapcase():
                out.pop()
            else:
                out.append(ch)
        return "".join(out)

    def _letters(self) -> str:
        return "abcdefghijklmnopqrstuvwxyz"[: self.rank]

    def _parse(self, s):
        s.skip_ws()
        if s.accept("1"):
            return ""
        start = s.pos
        letters = self._letters()
        while s.pos < len(s.text) and s.text[s.pos].isalpha():
            if s.text[s.pos].lower() not in letters:
                raise s.error(f"{s.text[s.pos]!r} is not a generator of {self.spec()}")
            s.pos += 1
        return self.canon(s.text[start : s.pos])

    def render(self, x):
        return x if x else "1"

    def standard_generators(self):
        return list(self._letters())

    def spec(self):
        return f"free({self.rank})"

    __repr__ = spec


@dataclass(frozen=True, repr=False)
class Lamplighter(Group):
    """The lamplighter group Z/2 wr Z.

    ``(lit, pos)`` is a finite configuration of lit lamps together with the
    cursor; ``(f, p)(g, q) = (f xor (g shifted by p), p + q)``.
    """

    family = "lamplighter"
    identity = ((), 0)

    def mul(self, a, b):
        f, p = a
        g, q = b
        if not g:
            return (f, p + q)
        lit = set(f)
        lit.symmetric_difference_update([x + p for x in g])
        return (tuple(sorted(lit)), p + q)

    def inv(self, a):
        f, p = a
        return (tuple([x - p for x in f]), -p)

    def canon(self, x):
        try:
            f, p = x
            lit = sorted(set(f))
        except (TypeError, ValueError):
            raise DomainError(f"{x!r} is not an element of lamplighter") from None
        if not isinstance(p, int) or not all(isinstance(c, int) for c in lit):
            raise DomainError(f"{x!r} is not an element of lamplighter")
        return (tuple(lit), p)

    def _parse(self, s):
        lit = s.integer_list("{", "}")
        s.expect("@")
        pos = s.integer()
        return (tuple(sorted(set(lit))), pos)

    def render(self, x):
        f, p = x
        return "{" + ",".join(str(c) for c in f) + "}@" + str(p)

    def standard_generators(self):
        # cursor step t, and toggling the lamp under the cursor
        return [((), 1), ((0,), 0)]

    def spec(self):
        return "lamplighter"

    __repr__ = spec


@dataclass(frozen=True, repr=False)
class DirectProduct(Group):
    factors: tuple = ()

    family = "product"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) < 2:
            raise DomainError("a direct product needs at least two factors")
        for g in self.factors:
            if isinstance(g, DirectProduct):
                raise DomainError("nested direct products are not supported; flatten the factors")

    @property
    def identity(self):
        return tuple(g.identity for g in self.factors)

    @property
    def finite(self):
        return all(g.finite for g in self.factors)

    @property
    def abelian(self):
        return all(g.abelian for g in self.factors)

    @property
    def order(self):
        if not self.finite:
            return None
        total = 1
        for g in self.factors:
            total *= g.order
        return total

    def mul(self, a, b):
        return tuple([g.mul(x, y) for g, x, y in zip(self.factors, a, b)])

    def inv(self, a):
        return tuple([g.inv(x) for g, x in zip(self.factors, a)])

    def canon(self, x):
        if not isinstance(x, (tuple, list)) or len(x) != len(self.factors):
            raise DomainError(f"{x!r} is not an element of {self.spec()}")
        return tuple(g.canon(c) for g, c in zip(self.factors, x))

    def parse(self, text):
        parts = text.split(";")
        if len(parts) != len(self.factors):
            raise ElementParseError(
                f"expected {len(self.factors)} ';'-separated components, got {len(parts)}",
                text,
                0,
            )
        out = []
        offset = 0
        for g, part in zip(self.factors, parts):
            s = _Scanner(part, offset)
            try:
                out.append(g._parse(s))
                s.end()
            except ElementParseError as exc:
                raise ElementParseError(
                    f"bad {g.spec()} component", text, exc.position
                ) from exc
            offset += len(part) + 1
        return tuple(out)

    def render(self, x):
        return ";".join(g.render(c) for g, c in zip(self.factors, x))

    def standard_generators(self):
        gens = []
        ident = self.identity
        for i, g in enumerate(self.factors):
            for h in g.standard_generators():
                e = list(ident)
                e[i] = h
                gens.append(tuple(e))
        return gens

    def spec(self):
        return "product(" + ",".join(g.spec() for g in self.factors) + ")"

    __repr__ = spec


# -- group specs ------------------------------------------------------------


def _split_top_level(text: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p.strip() for p in parts]


_GROUP_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$", re.S)

_ALIASES = {"z": "lattice(1)", "integers": "lattice(1)", "z2": "lattice(2)"}


def parse_group(spec: str) -> Group:
    """Build a group from a spec such as ``lattice(2)`` or ``product(lattice(1),cyclic(5))``."""
    spec = _ALIASES.get(spec.strip().lower(), spec)
    m = _GROUP_RE.match(spec)
    if m is None:
        raise DomainError(f"cannot parse group spec {spec!r}")
    name, args = m.group(1), m.group(2)

    def int_arg() -> int:
        if args is None or not args.strip().lstrip("-").isdigit():
            raise DomainError(f"{name} needs one integer parameter, got {spec!r}")
        return int(args)

    if name == "lattice":
        return IntegerLattice(int_arg())
    if name == "cyclic":
        return Cyclic(int_arg())
    if name == "dihedral":
        return Dihedral(int_arg())
    if name == "free":
        return FreeGroup(int_arg())
    if name in ("heisenberg", "lamplighter"):
        if args not in (None, ""):
            raise DomainError(f"{name} takes no parameters")
        return Heisenberg() if name == "heisenberg" else Lamplighter()
    if name == "product":
        if not args:
            raise DomainError("product needs factor groups")
        return DirectProduct(tuple(parse_group(p) for p in _split_top_level(args)))
    raise DomainError(f"unknown group family {name!r}")


# -- elements -----------------------------------------------------------------


@dataclass(frozen=True)
class Element:
    """A canonical group element bound to its group."""

    group: Group
    encoding: Any

    def __mul__(self, other: Element) -> Element:
        return multiply(self, other)

    def inverse(self) -> Element:
        return invert(self)

    def __lt__(self, other: Element) -> bool:
        _same_group(self, other)
        return self.encoding < other.encoding

    def __str__(self) -> str:
        return self.group.render(self.encoding)

    def __repr__(self) -> str:
        return f"Element({self.group.spec()}, {self})"


def _same_group(g: Element, h: Element) -> None:
    if g.group != h.group:
        raise DomainError(f"elements of {g.group.spec()} and {h.group.spec()} cannot be combined")


def multiply(g: Element, h: Element) -> Element:
    _same_group(g, h)
    return Element(g.group, g.group.mul(g.encoding, h.encoding))


def invert(g: Element) -> Element:
    return Element(g.group, g.group.inv(g.encoding))


def identity(group: Group) -> Element:
    return Element(group, group.identity)


def parse_element(group: Group, text: str) -> Element:
    return Element(group, group.parse(text))


def render(g: Element) -> str:
    return g.group.render(g.encoding)


def parse_many(group: Group, literals: Iterable[str]) -> list:
    """Parse literals to raw encodings."""
    return [group.parse(t) for t in literals]
