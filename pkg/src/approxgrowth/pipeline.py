"""End-to-end doubling-to-tripling verification, instance corpora and fuzzing.

:func:`verify_theorem` takes a ball ``S^n`` with doubling ``K = |S^2n|/|S^n|``
and chains the structural steps:

1. cover ``S^n ⊆ XU`` by an approximate group ``U = V²``;
2. separate the translates, ``S^n ⊆ X'U^m0``;
3. move the centers into a small ball, ``S^n ⊆ X''U^(2 m0)``;
4. propagate with ``k = floor(n/2)``, ``r = ceil(n/2)`` and five steps to
   ``S^3n ⊆ X''U^(10 m0)``;
5. certify ``S^2n`` as an approximate group from the tripling of ``S^n``.

Realized constants are carried through; the worst-case constants of the
general theorem are recorded symbolically next to them.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import os
import random
import re
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .covering import (
    ApproxGroupCertificate,
    CoverCertificate,
    format_rational,
    tripling_to_approx,
    verify_approx_group,
    verify_cover,
)
from .errors import ConfigError, DomainError, ElementParseError, ResourceError, SoundnessError
from .groups import Group, parse_group
from .sets import (
    DEFAULT_BUDGET,
    ElementSet,
    FuzzReport,
    PowerChain,
    ScaledPowers,
    ball,
    convolution,
    convolution_value,
    energy,
    limits,
    pluennecke_fuzz,
    product,
    product_chain_check,
    random_symmetric_subset,
    standard_generating_set,
)
from .structure import (
    DisjointTranslatesCertificate,
    bounded_representatives,
    disjointify,
    doubling_to_approx,
    propagate_inclusion,
    verify_disjoint_translates,
)

log = logging.getLogger(__name__)

__all__ = [
    "Instance",
    "PipelineReport",
    "parse_instance",
    "verify_theorem",
    "verify_report",
    "load_corpus",
    "run_corpus",
    "default_corpus_path",
    "fuzz",
]

UNVERIFIED_AT_SCALE = "inclusion unverified at scale"


@dataclass(frozen=True)
class Instance:
    """A generating set (closed under inverses, with identity) and a radius."""

    name: str
    group: Group
    generators: ElementSet
    n: int = 1
    budget: int = DEFAULT_BUDGET

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "group": self.group.spec(),
            "generators": self.generators.literals(),
            "n": self.n,
            "budget": self.budget,
        }


def _split_generators(text: str) -> list[str]:
    return [t.strip() for t in re.split(r"[|\n]", text) if t.strip()]


def make_instance(name, group: Group, literals=None, n: int = 1, budget: int = DEFAULT_BUDGET) -> Instance:
    if literals:
        S = ElementSet.from_literals(group, literals).symmetrized()
    else:
        S = standard_generating_set(group)
    if n < 1:
        raise DomainError(f"radius must be at least 1, got {n}")
    return Instance(name=name, group=group, generators=S, n=n, budget=budget)


def parse_instance(text: str, n: int = 1, budget: int = DEFAULT_BUDGET, name: str | None = None) -> Instance:
    """Parse ``FAMILY[:GEN|GEN|...]``, e.g. ``heisenberg`` or ``cyclic(30):1``.

    Without generators the family's standard set is used.  Given generators
    are closed under inverses and the identity is added.
    """
    spec, _, gens = text.partition(":")
    group = parse_group(spec)
    return make_instance(name or text, group, _split_generators(gens), n, budget)


# -- report ------------------------------------------------------------------------


def _bool_map(K: Fraction, n: int) -> dict:
    return {
        "discrete: n >= 2K^2": n >= 2 * K**2,
        "lc: n >= 8K^4": n >= 8 * K**4,
    }


def worst_case_bounds(K: Fraction) -> dict:
    """Worst-case constants of the general theorem, as (base, exponent) data."""
    K2 = format_rational(K**2)
    K4 = format_rational(4 * K**4)
    return {
        "tripling": {
            "form": "K^3 * base^exponent",
            "prefactor": format_rational(K**3),
            "base": format_rational(3**9 * K**18),
            "exponent": f"10*5^({K2})",
        },
        "approximate_group": {
            "form": "K^9 * base^exponent",
            "prefactor": format_rational(K**9),
            "base": format_rational(3**9 * K**18),
            "exponent": f"30*5^({K2})",
        },
        "tripling_lc": {
            "form": "base^exponent",
            "base": format_rational(2**12 * K**24),
            "exponent": f"10*5^({K4})",
        },
    }


def _worst_case_floor(K: Fraction) -> Fraction:
    # the exponent 10*5^(K^2) is at least 10 and the base at least 1
    return K**3 * (3**9 * K**18) ** 10


@dataclass
class PipelineReport:
    instance: Instance
    n: int
    K: Fraction | None = None
    hypothesis: dict = field(default_factory=dict)
    sizes: dict = field(default_factory=dict)
    realized: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    stages: dict = field(default_factory=dict)
    propagation: dict = field(default_factory=dict)
    realized_tripling: Fraction | None = None
    realized_bound: Fraction | None = None
    completed: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    inclusion_verified: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        stages = {name: cert.to_dict() for name, cert in self.stages.items()}
        worst = worst_case_bounds(self.K) if self.K is not None else None
        below = None
        if self.K is not None and self.realized_tripling is not None:
            below = self.realized_tripling <= _worst_case_floor(self.K)
        return {
            "instance": self.instance.to_dict(),
            "n": self.n,
            "K": format_rational(self.K),
            "hypothesis": self.hypothesis,
            "sizes": self.sizes,
            "realized": self.realized,
            "checked_bounds": {
                name: {"realized": format_rational(a), "bound": format_rational(b)} for name, (a, b) in self.bounds.items()
            },
            "propagation": self.propagation,
            "realized_tripling": format_rational(self.realized_tripling),
            "realized_bound": format_rational(self.realized_bound),
            "worst_case_bound": worst,
            "realized_tripling_below_worst_case": below,
            "inclusion_verified": self.inclusion_verified,
            "completed_stages": self.completed,
            "flags": self.flags,
            "error": self.error,
            "stages": stages,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"


def verify_theorem(instance: Instance, n: int | None = None) -> PipelineReport:
    """Run the full certificate chain on ``S^n``.

    Budget exhaustion yields a partial report flagged
    ``"inclusion unverified at scale"``; soundness failures propagate.
    """
    n = instance.n if n is None else n
    if n < 1:
        raise DomainError(f"radius must be at least 1, got {n}")
    S = instance.generators
    report = PipelineReport(instance=instance, n=n)
    with limits(instance.budget):
        try:
            _run_stages(S, n, report)
        except ResourceError as exc:
            log.info("%s: budget exhausted after %s", instance.name, report.completed)
            report.flags.append(UNVERIFIED_AT_SCALE)
            report.error = str(exc)
            report.inclusion_verified = False
    return report


def _run_stages(S: ElementSet, n: int, report: PipelineReport) -> None:
    s_powers = PowerChain(S)
    Sn = s_powers.get(n)
    s2n = s_powers.size(2 * n)
    K = Fraction(s2n, len(Sn))
    report.K = K
    report.sizes.update({"S^n": len(Sn), "S^2n": s2n})
    report.hypothesis = _bool_map(K, n)
    report.completed.append("doubling")

    dc = doubling_to_approx(Sn, K)
    v_powers = dc.v_powers
    u_powers = ScaledPowers(v_powers, 2)
    report.stages["cover"] = dc.cover
    report.stages["approximate_group_U"] = dc.approx
    report.bounds.update(dc.bounds)
    report.realized.update({"|V|": len(dc.v), "|U|": len(dc.u), "|X|": len(dc.cover.centers)})
    report.completed.append("approximate-group cover")

    dt = disjointify(dc.cover.centers, dc.u, powers=u_powers)
    m0 = dt.exponent
    report.stages["disjoint_translates"] = dt
    report.realized.update({"m0": m0, "|X'|": len(dt.refined_centers)})
    report.completed.append("disjointify")

    # S^n ⊆ X U ⊆ X' U^m0, and the translates of U^m0 are separated
    tile_powers = ScaledPowers(v_powers, 2 * m0)
    reps = bounded_representatives(
        S,
        n,
        dt.refined_centers,
        tile_powers.get(1),
        check_separation=False,
        powers=tile_powers,
        s_powers=s_powers,
    )
    report.stages["representatives"] = reps
    report.realized["|X''|"] = len(reps.centers)
    report.completed.append("bounded representatives")

    s3n = s_powers.size(3 * n)
    report.sizes["S^3n"] = s3n
    report.realized_tripling = Fraction(s3n, len(Sn))

    k, r = n // 2, n - n // 2
    W = reps.tile
    report.propagation = {"k": k, "r": r, "m": 5, "tile": f"U^{2 * m0}", "conclusion": f"S^{5 * r + k} ⊆ X''U^{10 * m0}"}
    Sk = s_powers.get(k).raw
    if not all(x in Sk for x in reps.centers):
        report.propagation["applicable"] = False
        report.flags.append(f"representatives not inside S^{k}")
    else:
        report.propagation["applicable"] = True
        method = "direct"
        try:
            ok = propagate_inclusion(S, k, r, reps.centers, W, 5, method="direct",
                                     powers=ScaledPowers(v_powers, 4 * m0), s_powers=s_powers)
        except ResourceError:
            method = "witness"
            ok = propagate_inclusion(S, k, r, reps.centers, W, 5, method="witness", s_powers=s_powers)
        if not ok:
            raise SoundnessError(f"S^{5 * r + k} is not contained in X''U^{10 * m0}")
        report.propagation["method"] = method
        report.propagation["verified"] = True
        report.inclusion_verified = True
    report.completed.append("propagation")

    report.stages["approximate_group_S2n"] = tripling_to_approx(Sn, ScaledPowers(s_powers, n))
    report.completed.append("tripling certificate")

    u_big = None
    if report.propagation.get("method") != "witness":
        try:
            u_big = v_powers.size(20 * m0)
        except ResourceError:
            pass
    if u_big is None:
        report.flags.append(f"|U^{10 * m0}| not computed within budget")
    else:
        report.sizes[f"U^{10 * m0}"] = u_big
        report.realized_bound = Fraction(len(reps.centers) * u_big, len(Sn))
        if report.inclusion_verified and s3n > len(reps.centers) * u_big:
            raise SoundnessError("|S^3n| exceeds |X''| |U^(10 m0)|")


_VERIFIERS = {
    "cover": (CoverCertificate, verify_cover),
    "approximate-group": (ApproxGroupCertificate, verify_approx_group),
    "disjoint-translates": (DisjointTranslatesCertificate, verify_disjoint_translates),
}


def verify_report(data: dict) -> dict:
    """Re-verify every stage certificate of a serialized report from scratch."""
    results = {}
    for name, cert in sorted(data.get("stages", {}).items()):
        cls, check = _VERIFIERS[cert["kind"]]
        results[name] = bool(check(cls.from_dict(cert)))
    return results


# -- corpus ----------------------------------------------------------------------------


def default_corpus_path() -> str:
    return str(resources.files("approxgrowth").joinpath("data/default_corpus.ini"))


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    lines = text.splitlines()
    in_section = False
    for i, line in enumerate(lines, 1):
        stripped = line.strip()
        if stripped.startswith("["):
            in_section = stripped == f"[{section}]"
            if in_section and key is None:
                return i
            continue
        if in_section and key is not None and re.match(rf"{re.escape(key)}\s*[=:]", stripped):
            return i
    return None


def load_corpus(path) -> list[Instance]:
    """Read instances from an INI-style file; one section per instance.

    Keys: ``family`` (group spec), ``generators`` (``|``- or line-separated
    literals, optional), ``n``, ``budget`` (optional).
    """
    with open(path) as fh:
        text = fh.read()
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], getattr(exc, "lineno", None)) from exc
    instances = []
    for name in parser.sections():
        sec = parser[name]
        unknown = set(sec) - {"family", "generators", "n", "budget"}
        if unknown:
            key = sorted(unknown)[0]
            raise ConfigError(f"[{name}]: unknown key {key!r}", _line_of(text, name, key))
        if "family" not in sec:
            raise ConfigError(f"[{name}]: missing 'family'", _line_of(text, name))
        try:
            group = parse_group(sec["family"])
        except DomainError as exc:
            raise ConfigError(f"[{name}]: {exc}", _line_of(text, name, "family")) from exc
        values = {}
        for key, default in (("n", None), ("budget", DEFAULT_BUDGET)):
            raw = sec.get(key)
            if raw is None:
                if default is None:
                    raise ConfigError(f"[{name}]: missing {key!r}", _line_of(text, name))
                values[key] = default
                continue
            try:
                values[key] = int(raw.replace("_", ""))
            except ValueError:
                raise ConfigError(f"[{name}]: {key} must be an integer, got {raw!r}", _line_of(text, name, key)) from None
        try:
            inst = make_instance(name, group, _split_generators(sec.get("generators", "")), values["n"], values["budget"])
        except (ElementParseError, DomainError) as exc:
            raise ConfigError(f"[{name}]: {exc}", _line_of(text, name, "generators")) from exc
        instances.append(inst)
    return instances


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


SUMMARY_HEADER = ["instance", "n", "K", "realized_tripling", "X2_size", "m0", "verified"]


def _corpus_row(inst: Instance, out_dir: str) -> tuple[bool, dict]:
    """Verify one instance, write its report, re-verify from disk."""
    row = {"instance": inst.name, "n": inst.n, "K": "", "realized_tripling": "", "X2_size": "", "m0": ""}
    try:
        report = verify_theorem(inst)
    except SoundnessError as exc:
        log.error("%s: %s", inst.name, exc)
        return False, {**row, "verified": "soundness failure"}
    path = os.path.join(out_dir, f"{inst.name}.json")
    _atomic_write(path, report.to_json())
    with open(path) as fh:
        certified = all(verify_report(json.load(fh)).values())
    if not certified:
        verdict = "certificate failure"
    elif report.inclusion_verified:
        verdict = "yes"
    elif UNVERIFIED_AT_SCALE in report.flags:
        verdict = UNVERIFIED_AT_SCALE
    else:
        verdict = "no"
    row.update(
        K=format_rational(report.K) or "",
        realized_tripling=format_rational(report.realized_tripling) or "",
        X2_size=report.realized.get("|X''|", ""),
        m0=report.realized.get("m0", ""),
        verified=verdict,
    )
    return certified, row


def run_corpus(config_path, out_dir, *, workers: int = 1) -> tuple[int, list[dict]]:
    """Verify every instance of a corpus file and write reports into ``out_dir``.

    Writes ``<name>.json`` per instance and ``summary.csv``.  Each report is
    re-read from disk and its certificates re-verified; the exit status is 1
    iff any of them fails (or a soundness check fired), else 0.  With
    ``workers > 1`` instances run in separate processes; output is
    identical either way.
    """
    instances = load_corpus(config_path)
    os.makedirs(out_dir, exist_ok=True)
    if workers > 1 and len(instances) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_corpus_row, instances, [out_dir] * len(instances)))
    else:
        results = [_corpus_row(inst, out_dir) for inst in instances]
    status = 0 if all(ok for ok, _ in results) else 1
    rows = [row for _, row in results]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SUMMARY_HEADER, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    _atomic_write(os.path.join(out_dir, "summary.csv"), buf.getvalue())
    return status, rows


# -- fuzzing ---------------------------------------------------------------------------------

ABELIAN_FAMILIES = (("cyclic(50)", 25), ("lattice(1)", 20), ("lattice(2)", 4))
FUZZ_FAMILIES = (
    ("cyclic(50)", 25),
    ("dihedral(16)", 8),
    ("lattice(1)", 20),
    ("heisenberg", 1),
    ("lamplighter", 2),
)


def fuzz(seed: int, trials: int, *, abelian=ABELIAN_FAMILIES, families=FUZZ_FAMILIES, max_size: int = 5) -> FuzzReport:
    """Randomised checks of the inequalities and identities of set arithmetic.

    For every abelian family: the Plünnecke-Ruzsa bound with ``m+n <= 4``.
    For every family, on random symmetric sets: the product-chain bound for
    a random sign pattern, ``sum_x |A ∩ xB| = |A||B|`` and
    ``E(A,B)|AB| >= |A|^2|B|^2``.  ``trials`` runs per family and check.
    """
    report = FuzzReport(seed=seed, trials=trials)
    if trials <= 0:
        return report
    for i, (spec, radius) in enumerate(abelian):
        report.merge(pluennecke_fuzz(parse_group(spec), trials, seed + i, cap=4, radius=radius, max_size=8))
    rng = random.Random(seed)
    for spec, radius in families:
        group = parse_group(spec)
        pool = ball(group, radius)
        for trial in range(trials):
            A = random_symmetric_subset(pool, rng.randint(1, max_size), rng)
            B = random_symmetric_subset(pool, rng.randint(1, max_size), rng)
            signs = [rng.choice((1, -1)) for _ in range(rng.randint(3, 4))]
            where = {"group": spec, "trial": trial, "A": A.literals(), "B": B.literals()}

            report.checks["product_chain"] += 1
            if not product_chain_check(A, signs):
                report.violations.append({"check": "product_chain", "signs": signs, **where})

            AB = product(A, B)
            total = sum(convolution_value(A, B, x) for x in AB.sorted())
            report.checks["convolution_mass"] += 1
            if total != len(A) * len(B):
                report.violations.append({"check": "convolution_mass", "total": total, **where})

            report.checks["energy_bound"] += 1
            if energy(A, B) * len(AB) < len(A) ** 2 * len(B) ** 2:
                report.violations.append({"check": "energy_bound", **where})

            report.checks["convolution_consistency"] += 1
            pairs = convolution(A, B)
            if any(pairs[x] != convolution_value(A, B, x) for x in AB.sorted()) or set(pairs) != AB.raw:
                report.violations.append({"check": "convolution_consistency", **where})
    return report
