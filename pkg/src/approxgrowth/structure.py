"""From small doubling to approximate groups, and controlling translates of them.

The operations here are constructive versions of the structural steps that
turn a set of small doubling into a covering by translates of an
approximate group, then make those translates well separated, pull the
translating elements into a small ball, and propagate the resulting
inclusion to larger radii.  Every inequality the arguments guarantee is
checked at runtime and raises :class:`SoundnessError` when it fails.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .covering import (
    ApproxGroupCertificate,
    CoverCertificate,
    format_rational,
    ruzsa_cover,
    set_from_spec,
    set_to_spec,
    tripling_to_approx,
    verify_cover,
)
from .errors import PreconditionError, ResourceError, SoundnessError
from .groups import Group, parse_group
from .sets import (
    ElementSet,
    PowerChain,
    bfs_tree,
    convolution,
    in_power,
    product,
)

log = logging.getLogger(__name__)

__all__ = [
    "HighMultiplicitySet",
    "DoublingCover",
    "DisjointTranslatesCertificate",
    "high_multiplicity_set",
    "doubling_to_approx",
    "disjointify",
    "verify_disjoint_translates",
    "local_coset_check",
    "bounded_representatives",
    "coverage_layers",
    "propagate_inclusion",
    "inclusion_witnesses",
]


def _require_symmetric_with_identity(A: ElementSet, name: str) -> None:
    if not A.raw:
        raise PreconditionError(f"{name} must be non-empty")
    if not A.has_identity():
        raise PreconditionError(f"{name} must contain the identity")
    if not A.is_symmetric():
        raise PreconditionError(f"{name} must be symmetric")


def _soundness(ok: bool, message: str) -> None:
    if not ok:
        raise SoundnessError(message)


@dataclass(frozen=True)
class HighMultiplicitySet:
    """``V = {x : |A ∩ xA| > |A|/2K}`` together with its growth checks.

    ``growth[j]`` records ``|A V^j A|`` for the exponents that were checked.
    """

    source: ElementSet
    parameter: Fraction
    v_set: ElementSet
    growth: dict = field(default_factory=dict)

    @property
    def threshold(self) -> Fraction:
        return Fraction(len(self.source)) / (2 * self.parameter)


def high_multiplicity_set(A: ElementSet, K, *, max_exponent: int = 3) -> HighMultiplicitySet:
    """Elements whose translate of ``A`` overlaps ``A`` in more than ``|A|/2K`` points.

    Requires ``A`` symmetric with identity and ``|A²| <= K|A|``.  Checks that
    ``V`` is symmetric, contains the identity, lies in ``A²``, has
    ``2K|V| >= |A|``, and that ``|A V^j A| <= 2^j K^(2j+1) |A|`` for
    ``j = 1..max_exponent``.
    """
    K = Fraction(K)
    _require_symmetric_with_identity(A, "A")
    A2 = product(A, A)
    if len(A2) > K * len(A):
        raise PreconditionError(
            f"|A^2|/|A| = {format_rational(Fraction(len(A2), len(A)))} exceeds K = {format_rational(K)}"
        )
    size = len(A)
    overlaps = convolution(A, A)
    V = ElementSet(A.group, [x for x, c in overlaps.items() if 2 * K * c > size], canonical=True)

    _soundness(V.is_symmetric(), "V is not symmetric")
    _soundness(V.has_identity(), "V does not contain the identity")
    _soundness(V.issubset(A2), "V is not contained in A^2")
    _soundness(2 * K * len(V) >= size, f"|V| = {len(V)} is below |A|/2K")

    growth = {}
    AVj = A
    for j in range(1, max_exponent + 1):
        AVj = product(AVj, V)
        size_j = len(product(AVj, A))
        growth[j] = size_j
        _soundness(
            size_j <= 2**j * K ** (2 * j + 1) * size,
            f"|A V^{j} A| = {size_j} exceeds 2^{j} K^{2 * j + 1} |A|",
        )
    return HighMultiplicitySet(source=A, parameter=K, v_set=V, growth=growth)


@dataclass(frozen=True)
class DoublingCover:
    """A set of small doubling covered by few translates of an approximate group.

    ``cover`` certifies ``A ⊆ X U`` with ``U = V²``; ``approx`` certifies
    that ``U`` is an approximate group.  ``bounds`` maps each checked
    inequality to its ``(realized, bound)`` pair.
    """

    high: HighMultiplicitySet
    u: ElementSet
    cover: CoverCertificate
    approx: ApproxGroupCertificate
    bounds: dict
    v_powers: PowerChain = field(repr=False, compare=False, default=None)

    @property
    def v(self) -> ElementSet:
        return self.high.v_set

    @property
    def centers(self) -> tuple:
        return self.cover.centers


def doubling_to_approx(A: ElementSet, K) -> DoublingCover:
    """Cover ``A`` (with ``|A²| <= K|A|``) by at most ``4K⁴`` translates of a
    ``2¹²K²⁴``-approximate group ``U ⊆ A⁴`` of size at most ``4K⁵|A|``."""
    K = Fraction(K)
    high = high_multiplicity_set(A, K)
    V = high.v_set
    chain = PowerChain(V)
    U = chain.get(2)
    size = len(A)
    v3 = chain.size(3)
    AV = len(product(A, V))

    bounds = {
        "|U| <= 4K^5|A|": (len(U), 4 * K**5 * size),
        "|V^3| <= 16K^8|V|": (v3, 16 * K**8 * len(V)),
        "|AV| <= 4K^4|V|": (AV, 4 * K**4 * len(V)),
    }
    for name, (realized, bound) in bounds.items():
        _soundness(realized <= bound, f"{name} failed: {realized} > {format_rational(bound)}")

    cover = ruzsa_cover(A, V)
    _soundness(cover.tile == U, "Ruzsa tile V V^-1 differs from V^2")
    bounds["|X| <= 4K^4"] = (len(cover.centers), 4 * K**4)
    _soundness(len(cover.centers) <= 4 * K**4, f"|X| = {len(cover.centers)} exceeds 4K^4")

    approx = tripling_to_approx(V, chain)
    bounds["approx parameter <= 2^12 K^24"] = (approx.parameter, 2**12 * K**24)
    _soundness(approx.parameter <= 2**12 * K**24, "approximate-group parameter exceeds 2^12 K^24")
    _soundness(approx.base == U, "approximate group base differs from V^2")
    return DoublingCover(high=high, u=U, cover=cover, approx=approx, bounds=bounds, v_powers=chain)


# -- separating translates -------------------------------------------------


@dataclass(frozen=True)
class DisjointTranslatesCertificate:
    """``X' ⊆ X`` and ``m`` with ``x ∉ yU^4m`` for distinct ``x, y ∈ X'``
    and ``XU ⊆ X'U^m``."""

    original_centers: tuple
    refined_centers: tuple
    tile: ElementSet
    exponent: int

    @property
    def group(self) -> Group:
        return self.tile.group

    def to_dict(self) -> dict:
        render = self.group.render
        return {
            "kind": "disjoint-translates",
            "group": self.group.spec(),
            "original_centers": [render(x) for x in self.original_centers],
            "refined_centers": [render(x) for x in self.refined_centers],
            "tile_spec": set_to_spec(self.tile),
            "exponent": self.exponent,
            "exponent_bound": f"5^{max(len(self.original_centers) - 1, 0)}",
        }

    @classmethod
    def from_dict(cls, d: dict) -> DisjointTranslatesCertificate:
        group = parse_group(d["group"])
        return cls(
            original_centers=tuple(group.parse(t) for t in d["original_centers"]),
            refined_centers=tuple(group.parse(t) for t in d["refined_centers"]),
            tile=set_from_spec(group, d["tile_spec"]),
            exponent=int(d["exponent"]),
        )


def _first_violation(centers: list, powers, exponent: int):
    """First ordered pair ``(x, y)`` of distinct centers with ``x ∈ y W^exponent``."""
    g = powers.group
    inv, mul = g.inv, g.mul
    for x in centers:
        for y in centers:
            if x != y and in_power(powers, mul(inv(y), x), exponent):
                return x, y
    return None


def disjointify(X, U: ElementSet, *, powers=None) -> DisjointTranslatesCertificate:
    """Thin out ``X`` until its translates of ``U^m`` are well separated.

    While two distinct centers satisfy ``x ∈ yW⁴`` (``W`` starts as ``U``),
    drop the larger of the first such pair in canonical order and replace
    ``W`` by ``W⁵``.  The returned exponent is ``5^(number of removals)``.

    ``powers`` may supply a precomputed chain of powers of ``U``.
    """
    _require_symmetric_with_identity(U, "U")
    X = list(X)
    if len(set(X)) != len(X):
        raise PreconditionError("centers must be distinct")
    if not X:
        raise PreconditionError("X must be non-empty")
    powers = powers if powers is not None else PowerChain(U)
    current = sorted(X)
    m = 1
    depth = 0
    try:
        while len(current) > 1:
            pair = _first_violation(current, powers, 4 * m)
            if pair is None:
                break
            drop = max(pair)
            log.debug("disjointify depth %d: %s lies in the 4-fold neighbourhood of %s; dropping %s", depth, *pair, drop)
            current.remove(drop)
            m *= 5
            depth += 1
    except ResourceError as exc:
        raise ResourceError(
            f"disjointify reached depth {depth} (exponent {m}) before exhausting the budget: {exc}",
            exc.budget,
            exc.projected,
        ) from exc
    cert = DisjointTranslatesCertificate(
        original_centers=tuple(sorted(X)),
        refined_centers=tuple(current),
        tile=U,
        exponent=m,
    )
    _soundness(verify_disjoint_translates(cert, powers=powers), "disjointify certificate failed re-verification")
    return cert


def verify_disjoint_translates(cert: DisjointTranslatesCertificate, *, powers=None) -> bool:
    U = cert.tile
    if not (U.has_identity() and U.is_symmetric()):
        return False
    X, Xp, m = cert.original_centers, cert.refined_centers, cert.exponent
    if not Xp or not set(Xp) <= set(X):
        return False
    if m < 1 or m > 5 ** (len(X) - 1):
        return False
    powers = powers if powers is not None else PowerChain(U)
    if _first_violation(list(Xp), powers, 4 * m) is not None:
        return False
    g = U.group
    mul, inv = g.mul, g.inv
    inverses = [inv(x) for x in Xp]
    for x in X:
        for u in U.raw:
            y = mul(x, u)
            if not any(in_power(powers, mul(xi, y), m) for xi in inverses):
                return False
    return True


def local_coset_check(X, U: ElementSet, m: int, *, powers=None) -> bool:
    """Translates ``xU^m`` behave like cosets near ``X``.

    True iff for every ``x ∈ X`` and ``y ∈ XU^m``:
    ``y ∈ xU^m``  ⟺  ``yU^m ⊆ xU^2m`` and ``xU^m ⊆ yU^2m``.
    """
    _require_symmetric_with_identity(U, "U")
    powers = powers if powers is not None else PowerChain(U)
    W = powers.get(m).raw
    W2 = powers.get(2 * m).raw
    g = U.group
    mul, inv = g.mul, g.inv
    Y = {mul(x, w) for x in X for w in W}
    for x in X:
        xi = inv(x)
        for y in Y:
            h = mul(xi, y)
            hi = inv(h)
            lhs = h in W
            rhs = all(mul(h, w) in W2 for w in W) and all(mul(hi, w) in W2 for w in W)
            if lhs != rhs:
                return False
    return True


# -- bounded representatives -------------------------------------------------


def _covers(target: frozenset, centers, tile: frozenset, group: Group) -> bool:
    mul, inv = group.mul, group.inv
    inverses = [inv(x) for x in centers]
    return all(any(mul(xi, s) in tile for xi in inverses) for s in target)


def coverage_layers(S: ElementSet, n: int, X, U: ElementSet) -> list[tuple]:
    """Diagnostic trace: ``X_r = {x ∈ X : xU ∩ S^r ≠ ∅}`` for ``r = 0..n``."""
    g = S.group
    mul = g.mul
    chain = PowerChain(S)
    layers = []
    for r in range(n + 1):
        Sr = chain.get(r).raw
        layers.append(tuple(x for x in sorted(X) if any(mul(x, u) in Sr for u in U.raw)))
    return layers


def bounded_representatives(
    S: ElementSet,
    n: int,
    X,
    U: ElementSet,
    *,
    check_separation: bool = True,
    powers=None,
    s_powers: PowerChain | None = None,
) -> CoverCertificate:
    """Replace the centers of a cover ``S^n ⊆ XU`` by centers in ``S^(k-1)``.

    ``X`` is first pruned, in canonical order, to an inclusion-minimal cover;
    ``k`` is the pruned size.  Each surviving ``x`` is replaced by the
    canonically smallest element of ``xU ∩ S^(k-1)``.  The result certifies
    ``S^n ⊆ X''U²`` with ``|X''| <= |X|``.

    The separation hypothesis ``x ∉ yU⁴`` is checked unless
    ``check_separation`` is false (for callers holding a certificate of it).
    ``powers`` may supply a chain of powers of ``U``; ``s_powers`` one of ``S``.
    """
    _require_symmetric_with_identity(S, "S")
    _require_symmetric_with_identity(U, "U")
    if n < 0:
        raise PreconditionError(f"n must be non-negative, got {n}")
    X = sorted(set(X))
    if not X:
        raise PreconditionError("X must be non-empty")
    g = S.group
    mul = g.mul
    s_powers = s_powers if s_powers is not None else PowerChain(S)
    Sn = s_powers.get(n)
    tile = U.raw
    if not _covers(Sn.raw, X, tile, g):
        raise PreconditionError("S^n is not contained in XU")
    if check_separation:
        powers = powers if powers is not None else PowerChain(U)
        bad = _first_violation(X, powers, 4)
        if bad is not None:
            raise PreconditionError(f"centers {g.render(bad[0])} and {g.render(bad[1])} are not separated by U^4")

    pruned = list(X)
    for x in X:
        trial = [y for y in pruned if y != x]
        if trial and _covers(Sn.raw, trial, tile, g):
            pruned = trial
    k = len(pruned)
    if log.isEnabledFor(logging.DEBUG):
        layers = coverage_layers(S, n, pruned, U)
        log.debug("coverage layers X_r: %s", [len(layer) for layer in layers])

    ball = s_powers.get(k - 1).raw
    reps = []
    for x in pruned:
        candidates = [y for y in (mul(x, u) for u in tile) if y in ball]
        if not candidates:
            raise SoundnessError(f"no representative of {g.render(x)}U inside S^{k - 1}")
        reps.append(min(candidates))
    _soundness(len(set(reps)) == len(reps), "two centers share a representative")

    square = powers.get(2) if powers is not None else product(U, U)
    cert = CoverCertificate(target=Sn, tile=square, centers=tuple(reps), parameter=Fraction(len(X)))
    _soundness(verify_cover(cert), "S^n is not covered by the representatives")
    return cert


# -- propagation -------------------------------------------------------------------


def _check_propagation_hypotheses(s_powers, k, r, X, U, group):
    Sk = s_powers.get(k).raw
    if not all(x in Sk for x in X):
        raise PreconditionError(f"X is not contained in S^{k}")
    if not _covers(s_powers.get(r + k).raw, X, U.raw, group):
        raise PreconditionError(f"S^{r + k} is not contained in XU")


def inclusion_witnesses(S: ElementSet, k: int, r: int, X, U: ElementSet, m: int) -> dict:
    """Factorisations ``s = x u_1 ... u_m`` for every ``s ∈ S^(mr+k)``.

    Follows the induction: split ``s = s_1 s'`` with ``s_1 ∈ S^r`` along a
    geodesic, factor ``s'`` one level down, then re-cover ``s_1 x ∈ S^(r+k)``
    by ``XU``.  Only membership in ``U`` is ever needed, never ``U^m``.
    Returns ``{s: (x, (u_1, ..., u_m))}``.
    """
    g = S.group
    mul, inv = g.mul, g.inv
    X = sorted(set(X))
    inverses = [(x, inv(x)) for x in X]
    tile = U.raw
    parent, depth = bfs_tree(S, m * r + k)

    base: dict = {}

    def cover_one(s):
        hit = base.get(s)
        if hit is None:
            for x, xi in inverses:
                u = mul(xi, s)
                if u in tile:
                    hit = (x, (u,))
                    break
            else:
                raise PreconditionError(f"{g.render(s)} is not covered by XU")
            base[s] = hit
        return hit

    def ancestor(s, d):
        while depth[s] > d:
            s = parent[s]
        return s

    level = {s: cover_one(s) for s, d in depth.items() if d <= r + k}
    for j in range(2, m + 1):
        radius = j * r + k
        below = (j - 1) * r + k
        nxt = {}
        for s, d in depth.items():
            if d > radius:
                continue
            s1 = ancestor(s, max(0, d - below))
            rest = mul(inv(s1), s)
            x, ws = level[rest]
            x2, (w0,) = cover_one(mul(s1, x))
            nxt[s] = (x2, (w0,) + ws)
        level = nxt
    return level


def propagate_inclusion(
    S: ElementSet,
    k: int,
    r: int,
    X,
    U: ElementSet,
    m: int,
    *,
    method: str = "direct",
    powers=None,
    s_powers: PowerChain | None = None,
) -> bool:
    """Verify ``S^(mr+k) ⊆ XU^m`` given ``X ⊆ S^k`` and ``S^(r+k) ⊆ XU``.

    ``method="direct"`` materialises ``U^m`` and tests membership;
    ``method="witness"`` multiplies out explicit factorisations
    ``s = x u_1 ... u_m`` and needs only ``U``; ``method="auto"`` tries
    direct and falls back to witnesses when the budget is exceeded.
    """
    _require_symmetric_with_identity(S, "S")
    if min(k, r) < 0 or m < 1:
        raise PreconditionError("need k, r >= 0 and m >= 1")
    if method not in ("direct", "witness", "auto"):
        raise ValueError(f"unknown method {method!r}")
    g = S.group
    X = sorted(set(X))
    s_powers = s_powers if s_powers is not None else PowerChain(S)
    _check_propagation_hypotheses(s_powers, k, r, X, U, g)

    if method in ("direct", "auto"):
        try:
            powers = powers if powers is not None else PowerChain(U)
            Um = powers.get(m).raw
            target = s_powers.get(m * r + k).raw
        except ResourceError:
            if method == "direct":
                raise
        else:
            return _covers(target, X, Um, g)

    mul = g.mul
    tile = U.raw
    witnesses = inclusion_witnesses(S, k, r, X, U, m)
    for s, (x, ws) in witnesses.items():
        acc = x
        for w in ws:
            if w not in tile:
                return False
            acc = mul(acc, w)
        if acc != s or len(ws) != m:
            return False
    return True
