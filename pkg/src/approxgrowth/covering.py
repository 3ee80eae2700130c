"""Covering by left translates, and approximate-group certificates.

Covers are built by scanning candidates in canonical order and keeping
each one whose translate misses every translate kept so far.  Maximality of
the kept family is what yields the inclusion, so no set-cover optimisation
is attempted.  Certificates carry explicit element lists and are checked by
:func:`verify_cover` using nothing but the group law and membership.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .errors import PreconditionError, SoundnessError
from .groups import Group, parse_group
from .sets import ElementSet, PowerChain, product

__all__ = [
    "CoverCertificate",
    "ApproxGroupCertificate",
    "ruzsa_cover",
    "verify_cover",
    "verify_approx_group",
    "tripling_to_approx",
    "approx_power_growth_check",
    "disjoint_translate_scan",
    "format_rational",
    "parse_rational",
    "set_to_spec",
    "set_from_spec",
]


def format_rational(q) -> str | None:
    if q is None:
        return None
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_rational(text) -> Fraction | None:
    if text is None:
        return None
    if isinstance(text, float):
        raise TypeError("floats are not accepted as exact parameters")
    return Fraction(text)


def set_to_spec(E: ElementSet) -> dict:
    return {"size": len(E), "elements": E.literals()}


def set_from_spec(group: Group, spec: dict) -> ElementSet:
    E = ElementSet.from_literals(group, spec["elements"])
    if "size" in spec and spec["size"] != len(E):
        raise ValueError(f"set spec declares size {spec['size']} but lists {len(E)} distinct elements")
    return E


@dataclass(frozen=True)
class CoverCertificate:
    """Witness that ``target ⊆ centers · tile``.

    ``parameter``, when present, is an upper bound on the number of centers
    that the producer proved; the verifier re-checks it.
    """

    target: ElementSet
    tile: ElementSet
    centers: tuple
    parameter: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(sorted(set(self.centers))))

    @property
    def group(self) -> Group:
        return self.target.group

    def center_literals(self) -> list[str]:
        return [self.group.render(x) for x in self.centers]

    def to_dict(self) -> dict:
        return {
            "kind": "cover",
            "group": self.group.spec(),
            "target_spec": set_to_spec(self.target),
            "tile_spec": set_to_spec(self.tile),
            "centers": self.center_literals(),
            "parameter": format_rational(self.parameter),
        }

    @classmethod
    def from_dict(cls, d: dict) -> CoverCertificate:
        group = parse_group(d["group"])
        return cls(
            target=set_from_spec(group, d["target_spec"]),
            tile=set_from_spec(group, d["tile_spec"]),
            centers=tuple(group.parse(t) for t in d["centers"]),
            parameter=parse_rational(d.get("parameter")),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


def verify_cover(cert: CoverCertificate) -> bool:
    """Brute-force check of ``target ⊆ centers · tile`` (and the size bound)."""
    g = cert.group
    if cert.tile.group != g:
        return False
    if cert.parameter is not None and len(cert.centers) > cert.parameter:
        return False
    inv, mul = g.inv, g.mul
    tile = cert.tile.raw
    target = cert.target.raw
    if len(tile) <= len(target):
        # enumerate the translates: |X||U| products instead of up to |A||X|
        union = {mul(x, u) for x in cert.centers for u in tile}
        return target <= union
    inverses = [inv(x) for x in cert.centers]
    for a in target:
        if not any(mul(xi, a) in tile for xi in inverses):
            return False
    return True


@dataclass(frozen=True)
class ApproxGroupCertificate:
    """Witness that ``base`` is a ``parameter``-approximate group.

    ``cover`` must have target ``base²`` and tile ``base``.
    """

    base: ElementSet
    parameter: Fraction
    cover: CoverCertificate

    def to_dict(self) -> dict:
        return {
            "kind": "approximate-group",
            "group": self.base.group.spec(),
            "base_spec": set_to_spec(self.base),
            "parameter": format_rational(self.parameter),
            "cover": self.cover.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> ApproxGroupCertificate:
        group = parse_group(d["group"])
        return cls(
            base=set_from_spec(group, d["base_spec"]),
            parameter=parse_rational(d["parameter"]),
            cover=CoverCertificate.from_dict(d["cover"]),
        )


def verify_approx_group(cert: ApproxGroupCertificate) -> bool:
    A = cert.base
    if not (A.has_identity() and A.is_symmetric()):
        return False
    if len(cert.cover.centers) > cert.parameter:
        return False
    if cert.cover.tile != A:
        return False
    # the square is recomputed rather than trusted from the certificate
    if not product(A, A).issubset(cert.cover.target):
        return False
    return verify_cover(cert.cover)


def disjoint_translate_scan(candidates: ElementSet, B: ElementSet) -> list:
    """Greedy maximal family of pairwise disjoint translates ``xB``.

    Scans ``candidates`` in canonical order; returns the kept centers.
    """
    mul = candidates.group.mul
    Braw = B.raw
    covered: set = set()
    kept = []
    for x in candidates.sorted():
        xB = [mul(x, b) for b in Braw]
        if covered.isdisjoint(xB):
            kept.append(x)
            covered.update(xB)
    return kept


def ruzsa_cover(A: ElementSet, B: ElementSet) -> CoverCertificate:
    """Ruzsa covering: ``X ⊆ A`` with ``A ⊆ X·BB⁻¹`` and ``|X| <= |AB|/|B|``."""
    A._same(B)
    if not B.raw:
        raise PreconditionError("B must be non-empty")
    X = disjoint_translate_scan(A, B)
    AB = product(A, B)
    if len(X) * len(B) > len(AB):
        raise SoundnessError(f"{len(X)} disjoint translates of a {len(B)}-set do not fit in |AB|={len(AB)}")
    cert = CoverCertificate(
        target=A,
        tile=product(B, B.inverse()),
        centers=tuple(X),
        parameter=Fraction(len(AB), len(B)),
    )
    if not verify_cover(cert):
        raise SoundnessError("maximal disjoint translates failed to cover A")
    return cert


def _require_symmetric_with_identity(A: ElementSet, name: str = "A") -> None:
    if not A.raw:
        raise PreconditionError(f"{name} must be non-empty")
    if not A.has_identity():
        raise PreconditionError(f"{name} must contain the identity")
    if not A.is_symmetric():
        raise PreconditionError(f"{name} must be symmetric")


def tripling_to_approx(A: ElementSet, chain=None) -> ApproxGroupCertificate:
    """Certify ``A²`` as a ``K³``-approximate group, ``K = |A³|/|A|``.

    Takes a maximal family of disjoint translates ``xA`` with ``x ∈ A⁴``;
    maximality gives ``A⁴ ⊆ X·A²`` and disjointness inside ``A⁵`` gives
    ``|X| <= |A⁵|/|A|``, which the Ruzsa triangle inequality bounds by ``K³``.
    Both inequalities are checked, not assumed.  ``chain`` may supply the
    powers of ``A`` (a :class:`PowerChain` or a scaled view of one).
    """
    _require_symmetric_with_identity(A)
    chain = chain if chain is not None else PowerChain(A)
    size = len(A)
    K = Fraction(chain.size(3), size)
    A2 = chain.get(2)
    A4 = chain.get(4)
    X = disjoint_translate_scan(A4, A)
    a5 = chain.size(5)
    if len(X) * size > a5:
        raise SoundnessError(f"{len(X)} disjoint translates of A do not fit in |A^5|={a5}")
    if a5 > K**3 * size:
        raise SoundnessError(f"|A^5|={a5} exceeds K^3|A| with K={format_rational(K)}")
    cover = CoverCertificate(target=A4, tile=A2, centers=tuple(X), parameter=K**3)
    if not verify_cover(cover):
        raise SoundnessError("maximal disjoint translates failed to cover A^4")
    return ApproxGroupCertificate(base=A2, parameter=K**3, cover=cover)


def approx_power_growth_check(cert: ApproxGroupCertificate, m: int) -> bool:
    """``|base^m| <= K^(m-1) |base|``."""
    if m < 1:
        raise PreconditionError(f"m must be at least 1, got {m}")
    base = cert.base
    return PowerChain(base).size(m) <= cert.parameter ** (m - 1) * len(base)
