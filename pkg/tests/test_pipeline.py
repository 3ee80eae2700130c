import csv
import json
from fractions import Fraction

import pytest

from approxgrowth import pipeline
from approxgrowth.errors import ConfigError, DomainError
from approxgrowth.pipeline import (
    UNVERIFIED_AT_SCALE,
    fuzz,
    load_corpus,
    worst_case_bounds,
    parse_instance,
    run_corpus,
    verify_report,
    verify_theorem,
)


@pytest.fixture(scope="module")
def z8():
    return verify_theorem(parse_instance("lattice(1):1", n=8))


class TestVerifyTheorem:
    def test_integers(self, z8):
        d = json.loads(z8.to_json())
        assert d["K"] == "33/17"
        assert d["hypothesis"] == {"discrete: n >= 2K^2": True, "lc: n >= 8K^4": False}
        assert d["realized_tripling"] == "49/17"
        assert d["stages"]["representatives"]["centers"] == ["(0)"]
        assert z8.inclusion_verified and d["flags"] == []
        # |X''| |U^10m0| / |S^8| with U = [-24,24], m0 = 1
        assert d["realized"]["m0"] == 1
        assert z8.realized_bound == Fraction(1 * (2 * 240 + 1), 17)
        assert z8.realized_tripling <= z8.realized_bound
        assert d["realized_tripling_below_worst_case"] is True
        assert d["propagation"]["conclusion"] == "S^24 ⊆ X''U^10"

    def test_certificates_reverify(self, z8):
        checks = verify_report(json.loads(z8.to_json()))
        assert set(checks) == {"cover", "approximate_group_U", "disjoint_translates", "representatives", "approximate_group_S2n"}
        assert all(checks.values())

    def test_tampered_report_fails(self, z8):
        d = json.loads(z8.to_json())
        d["stages"]["cover"]["centers"] = ["(40)"]
        assert not verify_report(d)["cover"]

    def test_saturated_cyclic(self):
        rep = verify_theorem(parse_instance("cyclic(30):1", n=30))
        assert rep.K == 1 and rep.realized_tripling == 1
        assert rep.sizes["S^n"] == 30
        assert rep.inclusion_verified

    def test_plane(self):
        rep = verify_theorem(parse_instance("lattice(2)", n=12))
        beta = lambda n: 2 * n * n + 2 * n + 1  # noqa: E731
        assert rep.K == Fraction(beta(24), beta(12)) == Fraction(1201, 313)
        assert rep.realized_tripling == Fraction(beta(36), beta(12))
        assert all(verify_report(json.loads(rep.to_json())).values())
        assert rep.inclusion_verified

    def test_budget_gives_partial_report(self):
        rep = verify_theorem(parse_instance("free(2)", n=9, budget=100_000))
        assert UNVERIFIED_AT_SCALE in rep.flags
        assert not rep.inclusion_verified
        assert rep.error and "budget" in rep.error
        d = json.loads(rep.to_json())
        assert d["inclusion_verified"] is False
        assert verify_report(d) == {}

    def test_partial_after_some_stages(self):
        rep = verify_theorem(parse_instance("heisenberg", n=3, budget=300_000))
        assert UNVERIFIED_AT_SCALE in rep.flags
        assert rep.completed[0] == "doubling" and rep.K == Fraction(593, 53)
        assert all(verify_report(json.loads(rep.to_json())).values())

    def test_deterministic_json(self):
        a = verify_theorem(parse_instance("dihedral(30)", n=6)).to_json()
        b = verify_theorem(parse_instance("dihedral(30)", n=6)).to_json()
        assert a == b

    def test_inclusion_inequality_on_small_families(self):
        for spec, n in [("product(lattice(1),cyclic(5))", 4), ("dihedral(12)", 3), ("cyclic(60):1", 20)]:
            rep = verify_theorem(parse_instance(spec, n=n))
            assert rep.inclusion_verified
            if rep.realized_bound is not None:
                u_key = next(k for k in rep.sizes if k.startswith("U^"))
                assert rep.sizes["S^3n"] <= rep.realized["|X''|"] * rep.sizes[u_key]

    def test_bad_radius(self):
        with pytest.raises(DomainError):
            verify_theorem(parse_instance("lattice(1)"), 0)


def test_worst_case_bounds_symbolic():
    b = worst_case_bounds(Fraction(33, 17))
    assert b["tripling"]["exponent"] == "10*5^(1089/289)"
    assert b["tripling"]["prefactor"] == "35937/4913"
    assert b["tripling"]["base"] == str(Fraction(3**9) * Fraction(33, 17) ** 18).replace(" ", "")


class TestInstances:
    def test_generators_closed_under_inverses(self):
        inst = parse_instance("heisenberg:(1,0,0)|(0,1,0)")
        assert inst.generators.literals() == sorted(
            ["(0,0,0)", "(1,0,0)", "(-1,0,0)", "(0,1,0)", "(0,-1,0)"], key=lambda t: tuple(map(int, t[1:-1].split(",")))
        )

    def test_default_generators(self):
        # identity, cursor moves both ways, and the lamp toggle (its own inverse)
        assert len(parse_instance("lamplighter").generators) == 4

    def test_unknown_family(self):
        with pytest.raises(DomainError):
            parse_instance("klein")


class TestCorpus:
    def write(self, tmp_path, text):
        path = tmp_path / "c.ini"
        path.write_text(text)
        return path

    def test_run_and_summary(self, tmp_path):
        cfg = self.write(tmp_path, "[z]\nfamily = lattice(1)\ngenerators = 1\nn = 8\n\n[c]\nfamily = cyclic(30)\ngenerators = 1\nn = 30\n")
        status, rows = run_corpus(cfg, tmp_path / "out")
        assert status == 0
        with open(tmp_path / "out" / "summary.csv") as fh:
            table = list(csv.DictReader(fh))
        assert list(table[0]) == ["instance", "n", "K", "realized_tripling", "X2_size", "m0", "verified"]
        assert table[0] == {"instance": "z", "n": "8", "K": "33/17", "realized_tripling": "49/17", "X2_size": "1", "m0": "1", "verified": "yes"}
        assert table[1]["K"] == "1"
        with open(tmp_path / "out" / "z.json") as fh:
            assert all(verify_report(json.load(fh)).values())

    def test_empty_corpus(self, tmp_path):
        status, rows = run_corpus(self.write(tmp_path, "# nothing\n"), tmp_path / "out")
        assert status == 0 and rows == []
        assert (tmp_path / "out" / "summary.csv").read_text() == "instance,n,K,realized_tripling,X2_size,m0,verified\n"

    def test_free_group_flagged_not_failed(self, tmp_path):
        cfg = self.write(tmp_path, "[free]\nfamily = free(2)\nn = 9\nbudget = 100000\n")
        status, rows = run_corpus(cfg, tmp_path / "out")
        assert status == 0
        assert rows[0]["verified"] == UNVERIFIED_AT_SCALE

    def test_failed_reverification_sets_status(self, tmp_path, monkeypatch):
        cfg = self.write(tmp_path, "[z]\nfamily = lattice(1)\nn = 4\n")
        monkeypatch.setattr(pipeline, "verify_report", lambda d: {"cover": False})
        status, rows = run_corpus(cfg, tmp_path / "out")
        assert status == 1 and rows[0]["verified"] == "certificate failure"

    def test_parallel_matches_serial(self, tmp_path):
        text = "[a]\nfamily = dihedral(12)\nn = 3\n\n[b]\nfamily = lattice(2)\nn = 3\n\n[c]\nfamily = cyclic(20)\nn = 10\n"
        cfg = self.write(tmp_path, text)
        run_corpus(cfg, tmp_path / "serial")
        run_corpus(cfg, tmp_path / "parallel", workers=3)
        for name in ["a.json", "b.json", "c.json", "summary.csv"]:
            assert (tmp_path / "serial" / name).read_bytes() == (tmp_path / "parallel" / name).read_bytes()

    @pytest.mark.parametrize(
        "text, line",
        [
            ("[a]\nfamily = lattice(1)\nn = eight\n", 3),
            ("[a]\nfamily = lattice(1)\nn = 2\ncolour = red\n", 4),
            ("[a]\nn = 2\n", 1),
            ("[a]\nfamily = lattice(1)\nn = 2\n\n[b]\nfamily = kleinbottle\nn = 2\n", 6),
            ("[a]\nfamily = heisenberg\ngenerators = (1,0)\nn = 2\n", 3),
            ("family = lattice(1)\n", 1),
            ("[a]\nfamily = lattice(1)\n[a]\nn = 1\n", 3),
        ],
    )
    def test_config_errors_carry_lines(self, tmp_path, text, line):
        with pytest.raises(ConfigError) as err:
            load_corpus(self.write(tmp_path, text))
        assert err.value.line == line
        assert f"line {line}" in str(err.value)

    def test_default_corpus_loads(self):
        names = [inst.name for inst in load_corpus(pipeline.default_corpus_path())]
        assert names == ["integers", "plane", "heisenberg", "cyclic60", "dihedral30", "integers_x_cyclic5", "lamplighter"]


class TestFuzz:
    def test_zero_trials(self):
        rep = fuzz(1, 0)
        assert rep.to_dict()["checks"] == {} and rep.violations == []

    def test_no_violations_and_deterministic(self):
        a = fuzz(42, 40)
        assert a.violations == []
        assert a.checks["convolution_mass"] == 40 * len(pipeline.FUZZ_FAMILIES)
        assert a.to_json() == fuzz(42, 40).to_json()

    def test_dihedral_mass_identity(self):
        rep = fuzz(3, 500, abelian=(), families=(("dihedral(16)", 8),))
        assert rep.checks["convolution_mass"] == 500
        assert rep.violations == []
