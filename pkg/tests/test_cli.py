import json

import pytest

from dedekindsym.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


class TestSymbol:
    def test_length_one_rows(self, capsys):
        code, out = run(capsys, "symbol", "--forms", "A=E4", "--pq", "3,5", "--length", "1")
        assert code == 0
        doc = json.loads(out)
        assert [r["word"] for r in doc["rows"]] == ["A"]

    def test_two_letter_words(self, capsys):
        code, out = run(capsys, "symbol", "--forms", "A=E4,B=E6", "--pq", "3,5", "--length", "2")
        assert code == 0
        doc = json.loads(out)
        assert [r["word"] for r in doc["rows"]] == ["A", "B", "AA", "AB", "BA", "BB"]

    def test_malformed_pq(self, capsys):
        code, _ = run(capsys, "symbol", "--forms", "A=E4", "--pq", "3;5")
        assert code == 2

    def test_unknown_form(self, capsys):
        code, _ = run(capsys, "symbol", "--forms", "A=E5", "--pq", "3,5")
        assert code == 2

    def test_which_E(self, capsys):
        code, out = run(capsys, "symbol", "--forms", "A=E4", "--pq", "3,5", "--which", "E")
        assert code == 0
        doc = json.loads(out)
        row = [r for r in doc["rows"] if r["word"] == "A"][0]
        assert abs(row["re"] - (1 / 240) / 15) < 1e-15

    def test_csv_format(self, capsys):
        code, out = run(capsys, "symbol", "--forms", "A=E4", "--pq", "3,5",
                        "--length", "1", "--format", "csv")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "word,p,q,re,im"
        assert len(lines) == 2


class TestVerify:
    def test_bijection_passes(self, capsys):
        code, out = run(capsys, "verify", "--suite", "bijection", "--samples", "5", "--seed", "42")
        assert code == 0
        doc = json.loads(out)
        assert all(r["pass"] for r in doc["rows"])

    def test_determinism(self, capsys):
        _, out1 = run(capsys, "verify", "--suite", "axioms", "--samples", "8", "--seed", "7")
        _, out2 = run(capsys, "verify", "--suite", "axioms", "--samples", "8", "--seed", "7")
        assert out1 == out2

    def test_corrupted_fixture_fails(self, capsys):
        code, out = run(capsys, "verify", "--suite", "shuffle", "--samples", "3",
                        "--seed", "1", "--corrupt")
        assert code == 1
        doc = json.loads(out)
        assert not all(r["pass"] for r in doc["rows"])

    def test_reciprocity_small(self, capsys):
        code, out = run(capsys, "verify", "--suite", "reciprocity-law",
                        "--weights", "4", "--pmax", "5")
        assert code == 0


class TestDecompose:
    def test_reports_residual_and_factor_axioms(self, capsys):
        code, out = run(capsys, "decompose", "--forms", "A=E4,B=E6",
                        "--depth", "2", "--pq-samples", "3", "--seed", "5")
        assert code == 0
        doc = json.loads(out)
        checks = {r["check"] for r in doc["rows"]}
        assert "reconstruction-residual" in checks
        assert "factor-mds[AB]" in checks
        assert all(r["pass"] for r in doc["rows"])


class TestGamma02:
    def test_delta_value(self, capsys):
        from dedekindsym import modforms as mf

        code, out = run(capsys, "gamma02", "--weight", "4", "--pq", "2,1")
        assert code == 0
        doc = json.loads(out)
        delta_row = [r for r in doc["rows"] if r["name"] == "delta"][0]
        assert abs(delta_row["re"] - 2 * mf.zeta(3)) < 1e-10


class TestTable:
    def test_row_count_and_order(self, capsys):
        from math import gcd

        code, out = run(capsys, "table", "--forms", "A=E4", "--pmax", "6")
        assert code == 0
        doc = json.loads(out)
        want = [(p, q) for p in range(1, 7) for q in range(1, p + 1) if gcd(p, q) == 1]
        assert [(r["p"], r["q"]) for r in doc["rows"]] == want

    def test_deterministic_bytes(self, capsys):
        _, out1 = run(capsys, "table", "--forms", "A=E4", "--pmax", "5")
        _, out2 = run(capsys, "table", "--forms", "A=E4", "--pmax", "5")
        assert out1 == out2


class TestCfrac:
    def test_canonical_output(self, capsys):
        code, out = run(capsys, "cfrac", "--pq", "3,5")
        assert code == 0
        doc = json.loads(out)
        assert doc["rows"][0]["entries"] == [2, 3]
        assert doc["rows"][0]["tails"] == [[3, 5], [1, 3]]


class TestEichlerSuite:
    def test_passes(self, capsys):
        code, out = run(capsys, "verify", "--suite", "eichler")
        assert code == 0
        doc = json.loads(out)
        assert all(r["pass"] for r in doc["rows"])


class TestCacheDir:
    def test_env_var_round_trip(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("DEDEKINDSYM_CACHE_DIR", str(tmp_path))
        code, out1 = run(capsys, "symbol", "--forms", "A=Delta", "--pq", "2,3", "--length", "1")
        assert code == 0 and (tmp_path / "tau.json").exists()
        code, out2 = run(capsys, "symbol", "--forms", "A=Delta", "--pq", "2,3", "--length", "1")
        assert code == 0 and out1 == out2
