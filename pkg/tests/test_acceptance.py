"""Acceptance criteria, one test per criterion, exact arithmetic throughout.

Each test records PASS/FAIL with its wall time; the summary lines are printed
at the end of the pytest run (see ``conftest.py``).  Criteria 5-10 build
their evidence as serialized text so that criterion 12 can compare reruns
byte for byte.
"""

import json
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from approxgrowth.covering import verify_approx_group, verify_cover
from approxgrowth.groups import Cyclic, Dihedral, IntegerLattice, parse_group
from approxgrowth.pipeline import default_corpus_path, pluennecke_fuzz, run_corpus, verify_report
from approxgrowth.sets import (
    ElementSet,
    ball,
    convolution,
    convolution_value,
    energy,
    growth_profile,
    product,
    random_subset,
    random_symmetric_subset,
    standard_generating_set,
)
from approxgrowth.structure import (
    bounded_representatives,
    disjointify,
    doubling_to_approx,
    high_multiplicity_set,
    propagate_inclusion,
)
from oracles import brute_product, heisenberg_matrix_ball, nested_power

RESULTS: dict = {}
ARTIFACTS: dict = {}


@contextmanager
def criterion(number: int, title: str, limit: float | None = None):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        if ok and limit is not None and elapsed >= limit:
            ok = False
            title += f" [over {limit:g} s limit]"
        RESULTS[number] = (ok, title, elapsed)
    assert ok, f"criterion {number} exceeded its {limit} s limit ({elapsed:.1f} s)"


def power_naive(mul, U, m, identity):
    if identity in U:
        return nested_power(mul, U, m, identity)
    out = {identity}
    for _ in range(m):
        out = brute_product(mul, out, U)
    return out


def covered(mul, inv, target, centers, tile):
    return all(any(mul(inv(x), s) in tile for x in centers) for s in target)


# -- 1, 2: growth ---------------------------------------------------------------------------------


def test_criterion_01_closed_form_growth():
    with criterion(1, "closed-form growth for Z, Z^2, free(2)", 5):
        z = growth_profile(standard_generating_set(IntegerLattice(1)), 50).values
        assert list(z) == [2 * n + 1 for n in range(51)]
        z2 = growth_profile(standard_generating_set(IntegerLattice(2)), 20).values
        assert list(z2) == [2 * n * n + 2 * n + 1 for n in range(21)]
        f2 = growth_profile(standard_generating_set(parse_group("free(2)")), 8).values
        assert list(f2) == [2 * 3**n - 1 for n in range(9)]


def test_criterion_02_heisenberg_oracle():
    with criterion(2, "Heisenberg growth matches the matrix-model BFS oracle", 30):
        ours = growth_profile(standard_generating_set(parse_group("heisenberg")), 10).values
        assert list(ours) == heisenberg_matrix_ball(10)


# -- 3, 4: convolution identities ------------------------------------------------------------------


def identity_pairs(seed=2024, count=500):
    families = [(Cyclic(50), 25), (Dihedral(16), 8), (IntegerLattice(1), 20)]
    pools = [(G, ball(G, r)) for G, r in families]
    rng = random.Random(seed)
    pairs = []
    for i in range(count):
        G, pool = pools[i % len(pools)]
        A = random_subset(pool, rng.randint(1, 10), rng)
        B = random_symmetric_subset(pool, rng.randint(1, 6), rng)
        pairs.append((A, B))
    return pairs


def test_criterion_03_convolution_mass():
    with criterion(3, "sum_x |A ∩ xB| = |A||B| on 500 seeded pairs", 30):
        for A, B in identity_pairs():
            AB = product(A, B)
            assert sum(convolution_value(A, B, x) for x in AB.raw) == len(A) * len(B)


def test_criterion_04_energy_bound():
    with criterion(4, "E(A,B)|AB| >= |A|^2|B|^2 on the same 500 pairs"):
        for A, B in identity_pairs():
            AB = product(A, B)
            E = energy(A, B)
            assert E == sum(convolution_value(A, B, x) ** 2 for x in AB.raw)
            assert E * len(AB) >= len(A) ** 2 * len(B) ** 2


# -- 5, 6: high-multiplicity set and approximate-group cover -------------------------------------------

CORPUS_FAMILIES = [
    ("lattice(1)", 12),
    ("lattice(2)", 3),
    ("heisenberg", 2),
    ("cyclic(60)", 30),
    ("dihedral(30)", 6),
    ("product(lattice(1),cyclic(5))", 4),
    ("lamplighter", 2),
]


def symmetric_instances(seed=5, count=100):
    rng = random.Random(seed)
    pools = [(parse_group(spec), ball(parse_group(spec), r)) for spec, r in CORPUS_FAMILIES]
    out = []
    for i in range(count):
        G, pool = pools[i % len(pools)]
        A = random_symmetric_subset(pool, rng.randint(1, 6), rng)
        out.append(A)
    return out


def artifact_05():
    rows = []
    for A in symmetric_instances():
        G = A.group
        A2 = product(A, A)
        K = Fraction(len(A2), len(A))
        V = high_multiplicity_set(A, K).v_set
        # threshold recomputed from scratch with pair counts
        counts = convolution(A, A)
        assert V.raw == {x for x, c in counts.items() if 2 * K * c > len(A)}
        assert V.is_symmetric() and G.identity in V.raw and V.raw <= A2.raw
        assert 2 * K * len(V) >= len(A)
        AVj = A.raw
        sizes = []
        for j in (1, 2, 3):
            AVj = brute_product(G.mul, AVj, V.raw)
            s = len(brute_product(G.mul, AVj, A.raw))
            assert s <= 2**j * K ** (2 * j + 1) * len(A)
            sizes.append(s)
        rows.append({"group": G.spec(), "A": A.literals(), "K": str(K), "V": V.literals(), "AVjA": sizes})
    return json.dumps(rows, sort_keys=True)


def artifact_06():
    rows = []
    for A in symmetric_instances():
        G = A.group
        K = Fraction(len(product(A, A)), len(A))
        dc = doubling_to_approx(A, K)
        A4 = ball_power(A, 4)
        assert dc.u.raw <= A4
        assert len(dc.u) <= 4 * K**5 * len(A)
        assert len(dc.centers) <= 4 * K**4
        assert covered(G.mul, G.inv, A.raw, dc.centers, dc.u.raw)
        assert verify_cover(dc.cover)
        assert dc.approx.parameter <= 2**12 * K**24
        assert verify_approx_group(dc.approx)
        rows.append(
            {
                "group": G.spec(),
                "A": A.literals(),
                "U": len(dc.u),
                "X": [G.render(x) for x in dc.centers],
                "cover": dc.cover.to_dict(),
                "approx_parameter": str(dc.approx.parameter),
            }
        )
    return json.dumps(rows, sort_keys=True)


def ball_power(A, m):
    return power_naive(A.group.mul, A.raw, m, A.group.identity)


def test_criterion_05_high_multiplicity():
    with criterion(5, "high-multiplicity set conclusions on 100 seeded sets", 120):
        ARTIFACTS.setdefault(5, artifact_05())


def test_criterion_06_doubling_cover():
    with criterion(6, "approximate-group cover conclusions on the same 100 sets"):
        ARTIFACTS.setdefault(6, artifact_06())


# -- 7: separated translates ---------------------------------------------------------------------------

SEPARATION_FAMILIES = [
    ("lattice(1)", 30, 3),
    ("cyclic(50)", 25, 3),
    ("cyclic(12)", 6, 1),
    ("dihedral(16)", 8, 2),
    ("product(lattice(1),cyclic(5))", 12, 2),
]


def artifact_07():
    rows = []
    Z = IntegerLattice(1)
    cert = disjointify([(0,), (1,), (10,)], ElementSet(Z, [(-1,), (0,), (1,)]))
    assert cert.exponent == 25 and cert.refined_centers == ((0,),)
    rows.append(cert.to_dict())
    rng = random.Random(7)
    for i in range(100):
        spec, radius, u_radius = SEPARATION_FAMILIES[i % len(SEPARATION_FAMILIES)]
        G = parse_group(spec)
        pool = ball(G, radius)
        U = random_symmetric_subset(ball(G, u_radius), rng.randint(1, 3), rng)
        X = rng.sample(pool.sorted(), rng.randint(1, 5))
        cert = disjointify(X, U)
        m = cert.exponent
        assert m <= 5 ** (len(X) - 1)
        U4m = power_naive(G.mul, U.raw, 4 * m, G.identity)
        Um = power_naive(G.mul, U.raw, m, G.identity)
        Xp = cert.refined_centers
        assert set(Xp) <= set(X)
        for x in Xp:
            for y in Xp:
                if x != y:
                    assert G.mul(G.inv(y), x) not in U4m
        XU = brute_product(G.mul, set(X), U.raw)
        assert covered(G.mul, G.inv, XU, Xp, Um)
        rows.append(cert.to_dict())
    return json.dumps(rows, sort_keys=True)


def test_criterion_07_disjointify():
    with criterion(7, "separated-translate certificates on 100 seeded instances"):
        ARTIFACTS.setdefault(7, artifact_07())


# -- 8: bounded representatives ----------------------------------------------------------------------------


def representative_instances():
    """(S, n, X, U) with S^n ⊆ XU and x ∉ yU^4 for distinct centers."""
    out = []
    C12 = Cyclic(12)
    out.append((ElementSet(C12, [0, 1, 11]), 5, [0, 1, 2, 3], ElementSet(C12, [0, 4, 8])))
    Z = IntegerLattice(1)
    out.append((ElementSet(Z, [(-1,), (0,), (1,)]), 8, [(0,)], ElementSet(Z, [(i,) for i in range(-24, 25)])))
    rng = random.Random(8)
    # cosets of a subgroup, each named by a random representative
    for q, d in [(12, 3), (20, 4), (30, 5), (18, 6), (24, 4), (60, 5), (42, 7)]:
        C = Cyclic(q)
        X = [(c + d * rng.randrange(q // d)) % q for c in range(d)]
        out.append((ElementSet(C, [0, 1, q - 1]), rng.randint(1, q), X, ElementSet(C, range(0, q, d))))
    # dihedral: rotations as tile, one center per coset
    for q in (6, 10, 16):
        D = Dihedral(q)
        U = ElementSet(D, [(k, 0) for k in range(q)])
        X = [(rng.randrange(q), 0), (rng.randrange(q), 1)]
        out.append((standard_generating_set(D), rng.randint(1, 4), X, U))
    # Z x C5: a wide interval in each row
    P = parse_group("product(lattice(1),cyclic(5))")
    for n in (2, 4, 6):
        U = ElementSet(P, [((i,), 0) for i in range(-3 * n, 3 * n + 1)])
        X = [((rng.randint(-n, n),), c) for c in range(5)]
        out.append((standard_generating_set(P), n, X, U))
    return out


def artifact_08():
    rows = []
    for S, n, X, U in representative_instances():
        G = S.group
        cert = bounded_representatives(S, n, X, U)
        Sn = power_naive(G.mul, S.raw, n, G.identity)
        k = len(set(X))  # every instance above is already inclusion-minimal
        Sk1 = power_naive(G.mul, S.raw, k - 1, G.identity)
        assert set(cert.centers) <= Sk1
        assert len(cert.centers) <= len(X)
        U2 = brute_product(G.mul, U.raw, U.raw)
        assert covered(G.mul, G.inv, Sn, cert.centers, U2)
        assert verify_cover(cert)
        rows.append({"group": G.spec(), "n": n, "X": [G.render(x) for x in X], "X2": [G.render(x) for x in cert.centers]})
    assert rows[0]["X2"] == ["0", "1", "2", "3"]
    return json.dumps(rows, sort_keys=True)


def test_criterion_08_bounded_representatives():
    with criterion(8, "bounded representatives, including the cyclic(12) cosets"):
        ARTIFACTS.setdefault(8, artifact_08())


# -- 9: propagation ---------------------------------------------------------------------------------------------

PROPAGATION_FAMILIES = ["lattice(1)", "lattice(2)", "cyclic(50)", "dihedral(16)", "product(lattice(1),cyclic(5))", "heisenberg"]


def artifact_09():
    rows = []
    rng = random.Random(9)
    for i in range(50):
        G = parse_group(PROPAGATION_FAMILIES[i % len(PROPAGATION_FAMILIES)])
        S = standard_generating_set(G)
        small = G.spec() == "heisenberg"
        k = rng.randint(0, 1 if small else 2)
        r = rng.randint(1, 1 if small else 2)
        Sk = sorted(power_naive(G.mul, S.raw, k, G.identity))
        X = rng.sample(Sk, rng.randint(1, min(3, len(Sk))))
        x0 = X[0]
        Srk = power_naive(G.mul, S.raw, r + k, G.identity)
        U = ElementSet(G, [G.mul(G.inv(x0), s) for s in Srk]).symmetrized()
        for m in range(1, 5):
            assert propagate_inclusion(S, k, r, X, U, m, method="direct")
            target = power_naive(G.mul, S.raw, m * r + k, G.identity)
            Um = power_naive(G.mul, U.raw, m, G.identity)
            assert covered(G.mul, G.inv, target, X, Um)
        rows.append({"group": G.spec(), "k": k, "r": r, "X": [G.render(x) for x in X], "U": len(U)})
    return json.dumps(rows, sort_keys=True)


def test_criterion_09_propagation():
    with criterion(9, "inclusion propagation for m <= 4 on 50 instances"):
        ARTIFACTS.setdefault(9, artifact_09())


# -- 10: end to end ---------------------------------------------------------------------------------------------


def artifact_10(out_dir):
    status, rows = run_corpus(default_corpus_path(), out_dir)
    assert status == 0
    assert all(row["verified"] == "yes" for row in rows), rows
    texts = {}
    for row in rows:
        path = out_dir / f"{row['instance']}.json"
        texts[path.name] = path.read_text()
        data = json.loads(texts[path.name])
        checks = verify_report(data)
        assert len(checks) == 5 and all(checks.values()), (row["instance"], checks)
        if data["realized_bound"] is not None:
            assert Fraction(data["realized_tripling"]) <= Fraction(data["realized_bound"])
    z = json.loads(texts["integers.json"])
    assert z["K"] == "33/17" and z["realized_tripling"] == "49/17"
    assert z["inclusion_verified"] is True and z["flags"] == []
    assert z["completed_stages"][-1] == "tripling certificate"
    texts["summary.csv"] = (out_dir / "summary.csv").read_text()
    return json.dumps(texts, sort_keys=True)


def test_criterion_10_default_corpus(tmp_path):
    with criterion(10, "default corpus end to end, certificates re-verified from JSON", 300):
        ARTIFACTS.setdefault(10, artifact_10(tmp_path))


# -- 11, 12 -----------------------------------------------------------------------------------------------------------


def test_criterion_11_pluennecke():
    with criterion(11, "Plünnecke-Ruzsa bound on 1000 seeded abelian sets", 60):
        plan = [(Cyclic(50), 400, 25), (IntegerLattice(1), 300, 20), (IntegerLattice(2), 300, 4)]
        violations = []
        total = 0
        for seed, (G, trials, radius) in enumerate(plan):
            rep = pluennecke_fuzz(G, trials, seed, cap=4, radius=radius)
            total += trials
            violations += rep.violations
        assert total == 1000
        assert violations == []


BUILDERS = {5: artifact_05, 6: artifact_06, 7: artifact_07, 8: artifact_08, 9: artifact_09}


def test_criterion_12_determinism(tmp_path):
    with criterion(12, "criteria 5-10 rerun byte-identically"):
        for number, build in BUILDERS.items():
            first = ARTIFACTS.get(number) or build()
            assert build() == first, f"criterion {number} output changed between runs"
        first = ARTIFACTS.get(10) or artifact_10(tmp_path / "a")
        assert artifact_10(tmp_path / "b") == first


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
