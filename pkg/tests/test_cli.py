"""Tests for the command-line entry point."""

import csv
from fractions import Fraction

import pytest

from ampleforge.__main__ import (
    EXIT_CONDITIONAL,
    EXIT_DATA,
    EXIT_DISPROVED,
    EXIT_INCONCLUSIVE,
    EXIT_INVALID,
    EXIT_OK,
    EXIT_USAGE,
    run,
)
from ampleforge.certificates import Valid, decode, encode, verify
from ampleforge.constructions import nagata_compose
from ampleforge.lattice import ClassVector, format_vector, homogeneous


def _lines(capsys):
    return capsys.readouterr().out.splitlines()


class TestProve:
    """Tests for the prove command."""

    def test_proved(self, capsys):
        """Verify a proved vector prints the claim and a verifiable certificate."""
        assert run(["prove", "--vector", "10;3^11"]) == EXIT_OK
        lines = _lines(capsys)
        assert lines[0] == "proved nef 10;3^11"
        verdict = verify(decode(lines[1]))
        assert isinstance(verdict, Valid)
        assert verdict.vector == homogeneous(10, 3, 11)

    def test_disproved(self, capsys):
        """Verify a negative-square class exits with the disproved code."""
        assert run(["prove", "--vector", "2;1^5"]) == EXIT_DISPROVED
        assert _lines(capsys)[0].startswith("disproved: ")

    def test_inconclusive(self, capsys):
        """Verify a small budget on (19; 6^10) is inconclusive."""
        code = run(["prove", "--vector", "19;6^10", "--depth", "4", "--budget", "5000"])
        assert code == EXIT_INCONCLUSIVE
        assert _lines(capsys)[0].startswith("inconclusive after ")

    def test_out_file(self, tmp_path, capsys):
        """Verify --out writes the certificate to a file."""
        out = tmp_path / "c.json"
        assert run(["prove", "--vector", "10;3^11", "--out", str(out)]) == EXIT_OK
        assert _lines(capsys)[1] == f"certificate written to {out}"
        assert decode(out.read_text()).claim.vector == homogeneous(10, 3, 11)


class TestVerify:
    """Tests for the verify command."""

    def test_valid(self, tmp_path, glue_certificate, capsys):
        """Verify a sound certificate prints valid and exits 0."""
        path = tmp_path / "glue.json"
        path.write_text(encode(glue_certificate))
        assert run(["verify", str(path)]) == EXIT_OK
        assert _lines(capsys) == ["valid nef 3;1^9"]

    def test_conditional(self, tmp_path, capsys):
        """Verify assumption leaves give exit 4, or 5 under --strict."""
        path = tmp_path / "nagata.json"
        path.write_text(encode(nagata_compose(9, 9, 10, 1, Fraction(31, 10))))
        assert run(["verify", str(path)]) == EXIT_CONDITIONAL
        lines = _lines(capsys)
        assert lines[0] == "conditionally valid nef 10;1^81"
        assert lines[1] == "assumptions: nagata(9)"
        assert run(["verify", str(path), "--strict"]) == EXIT_INVALID
        assert _lines(capsys)[0].startswith("invalid at ")

    def test_bad_json(self, tmp_path, capsys):
        """Verify unreadable certificate text is a data error."""
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert run(["verify", str(path)]) == EXIT_DATA
        assert "ampleforge: error: " in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        """Verify a missing file is a data error."""
        assert run(["verify", str(tmp_path / "absent.json")]) == EXIT_DATA

    def test_undecodable_file(self, tmp_path, capsys):
        """Verify a certificate file that is not UTF-8 is a data error."""
        path = tmp_path / "latin1.json"
        path.write_bytes(b'{"header": "\xff\xfe"}')
        assert run(["verify", str(path)]) == EXIT_DATA
        assert "ampleforge: error: " in capsys.readouterr().err


class TestSmallCommands:
    """Tests for reduce, cf, pell and conjecture."""

    def test_reduce(self, capsys):
        """Verify the trace starts with the input and ends on the pullback."""
        assert run(["reduce", "--vector", "10;3^7,6"]) == EXIT_OK
        lines = _lines(capsys)
        assert lines[0].startswith("start 10;")
        assert any(line.startswith("reflect ") for line in lines)
        assert lines[-1] == f"status ReducedNonNegative {format_vector(ClassVector(1, (0,) * 8))}"

    def test_cf(self, capsys):
        """Verify the expansion of sqrt(19)."""
        assert run(["cf", "19"]) == EXIT_OK
        assert _lines(capsys) == ["4; 2 1 3 1 2 8"]

    def test_cf_perfect_square(self, capsys):
        """Verify a perfect square is a data error."""
        assert run(["cf", "16"]) == EXIT_DATA
        assert "ampleforge: error:" in capsys.readouterr().err

    def test_pell(self, capsys):
        """Verify --count prints successive solutions."""
        assert run(["pell", "2", "--count", "2"]) == EXIT_OK
        assert _lines(capsys) == ["3 2", "17 12"]

    def test_pell_nineteen(self, capsys):
        """Verify the fundamental solution prints as d then m."""
        assert run(["pell", "19", "--count", "2"]) == EXIT_OK
        assert _lines(capsys) == ["170 39", "57799 13260"]

    def test_conjecture(self, capsys):
        """Verify the target and bound for N = 10."""
        assert run(["conjecture", "10"]) == EXIT_OK
        assert _lines(capsys) == ["target 19;6^10", "bound 1/361"]

    def test_conjecture_prove(self, capsys):
        """Verify --prove runs the prover on the target."""
        assert run(["conjecture", "11", "--prove"]) == EXIT_OK
        assert _lines(capsys)[2] == "proved nef 10;3^11"

    def test_conjecture_out_of_range(self):
        """Verify N <= 9 is refused as a data error."""
        assert run(["conjecture", "9"]) == EXIT_DATA


class TestFamilyProbeTable:
    """Tests for family, probe and table."""

    def test_family_out(self, tmp_path, capsys):
        """Verify a family certificate is written and verifies."""
        out = tmp_path / "p1.json"
        assert run(["family", "--part", "1", "--a", "3", "--l", "1", "--out", str(out)]) == EXIT_OK
        cert = decode(out.read_text())
        assert verify(cert) == Valid(homogeneous(10, 3, 11), cert.claim.kind)

    def test_family_precondition(self):
        """Verify violated family preconditions are data errors."""
        assert run(["family", "--part", "1", "--a", "1", "--l", "1"]) == EXIT_DATA

    def test_probe(self, capsys):
        """Verify the probe finds the witness for (10; 3^11)."""
        assert run(["probe", "--vector", "10;3^11"]) == EXIT_OK
        lines = _lines(capsys)
        assert lines[0] == "DecompositionFound after 1 orbit members"
        assert any(line.startswith("witness ") for line in lines)

    def test_table(self, tmp_path, capsys):
        """Verify the CSV has the header and one row per N."""
        out = tmp_path / "bounds.csv"
        args = ["table", "--max-n", "12", "--out", str(out), "--budget", "5000", "--depth", "4"]
        assert run(args) == EXIT_OK
        assert _lines(capsys) == [f"3 rows written to {out}"]
        with open(out, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["N", "xu", "family", "conjecture", "proved", "certified_file"]
        assert [row[0] for row in rows[1:]] == ["10", "11", "12"]
        assert rows[3][2] == "1/49"


class TestUsage:
    """Tests for usage errors."""

    @pytest.mark.parametrize("argv", [
        [],
        ["prove"],
        ["prove", "--vector", "10;3^"],
        ["family", "--part", "1", "--a", "2"],
        ["table", "--max-n", "5", "--out", "x.csv"],
        ["bogus"],
        ["cf", "-5"],
        ["pell", "-2"],
    ])
    def test_usage_errors(self, argv, capsys):
        """Verify malformed invocations exit 64 with a usage message."""
        assert run(argv) == EXIT_USAGE
        assert capsys.readouterr().err.startswith("ampleforge: usage: ")

    def test_config_file(self, sample_config_yaml, capsys):
        """Verify --config is read before the command runs."""
        assert run(["--config", sample_config_yaml, "cf", "22"]) == EXIT_OK
        assert _lines(capsys) == ["4; 1 2 4 2 1 8"]

    @pytest.mark.parametrize("body", ["search: [unclosed\n", "search:\n  max_inner_degree: abc\n"])
    def test_bad_config_file(self, tmp_path, body, capsys):
        """Verify malformed or mistyped YAML exits 64 with a usage message."""
        path = tmp_path / "bad.yaml"
        path.write_text(body)
        assert run(["--config", str(path), "cf", "19"]) == EXIT_USAGE
        assert capsys.readouterr().err.startswith("ampleforge: usage: ")
