import json

import pytest

from rotsynth import programs
from rotsynth.cli import main


@pytest.fixture
def ccz_program(tmp_path):
    path = tmp_path / "ccz.json"
    path.write_text(programs.program_text("ccz"))
    return path


def run(argv):
    return main([str(a) for a in argv])


class TestCompileCommand:
    def test_compile_writes_artifacts(self, tmp_path, ccz_program):
        out = tmp_path / "circuit.json"
        report = tmp_path / "report.json"
        diagram = tmp_path / "diagram.txt"
        code = run([
            "compile", "--in", ccz_program, "--out", out, "--report", report,
            "--diagram", diagram, "--budget", 1, "--seed", 1, "--measure-x", "3",
        ])
        assert code == 0
        payload = json.loads(report.read_text())
        assert payload["t_depth"] == 2
        assert payload["config"]["version"]
        circ = json.loads(out.read_text())
        assert circ["n"] == 4
        assert any(g["kind"] == "MeasX" for g in circ["gates"])
        assert "L0" in diagram.read_text()

    def test_missing_input(self, tmp_path):
        code = run(["compile", "--in", tmp_path / "nope.json", "--out", tmp_path / "o.json"])
        assert code == 1

    def test_partition_failure_exit_2(self, tmp_path):
        prog = tmp_path / "bad.json"
        prog.write_text(json.dumps({
            "n": 2,
            "rotations": [{"support": "11", "k": 1}] * 4,
        }))
        code = run(["compile", "--in", prog, "--out", tmp_path / "o.json", "--budget", 20])
        assert code == 2

    def test_objective_flag_preserves_t_count(self, tmp_path, ccz_program):
        outs = []
        for objective in ("cnot-depth", "cnot-count"):
            out = tmp_path / f"{objective}.json"
            assert run([
                "compile", "--in", ccz_program, "--out", out,
                "--objective", objective, "--budget", 40, "--seed", 0,
            ]) == 0
            payload = json.loads(out.read_text())
            outs.append(sum(1 for g in payload["gates"] if g["kind"] in ("T", "PrepT")))
        assert outs[0] == outs[1] == 8


class TestVerifyCommand:
    def test_compiled_vs_source_program(self, tmp_path, ccz_program):
        out = tmp_path / "circuit.json"
        run(["compile", "--in", ccz_program, "--out", out, "--budget", 1])
        assert run(["verify", "--a", out, "--b", ccz_program, "--oracle", "dense"]) == 0

    def test_circuit_vs_itself(self, tmp_path, ccz_program):
        out = tmp_path / "circuit.json"
        run(["compile", "--in", ccz_program, "--out", out, "--budget", 1])
        assert run(["verify", "--a", out, "--b", out, "--oracle", "dense"]) == 0

    def test_extra_z_not_equivalent(self, tmp_path, ccz_program):
        out = tmp_path / "circuit.json"
        run(["compile", "--in", ccz_program, "--out", out, "--budget", 1])
        payload = json.loads(out.read_text())
        payload["gates"].append({"kind": "Z", "qubits": [0]})
        tampered = tmp_path / "tampered.json"
        tampered.write_text(json.dumps(payload))
        assert run(["verify", "--a", out, "--b", tampered, "--oracle", "dense"]) == 3

    def test_poly_oracle_on_programs(self, tmp_path, ccz_program):
        assert run(["verify", "--a", ccz_program, "--b", ccz_program, "--oracle", "poly"]) == 0

    def test_poly_oracle_suggests_dense_for_preps(self, tmp_path, ccz_program, capsys):
        out = tmp_path / "circuit.json"
        run(["compile", "--in", ccz_program, "--out", out, "--budget", 1])
        code = run(["verify", "--a", out, "--b", ccz_program, "--oracle", "poly"])
        assert code == 1
        assert "dense" in capsys.readouterr().err


class TestFaultsCommand:
    def test_pair_report(self, tmp_path, ccz_program, capsys):
        out = tmp_path / "circuit.json"
        run(["compile", "--in", ccz_program, "--out", out, "--budget", 1, "--measure-x", "3"])
        report = tmp_path / "faults.json"
        code = run([
            "faults", "--circuit", out, "--outputs", "0,1,2",
            "--singles", "--pairs", "--out", report,
        ])
        assert code == 0
        assert "28 harmful of 28" in capsys.readouterr().out
        payload = json.loads(report.read_text())
        assert payload["pairs"]["harmful"] == 28
        assert payload["singles"]["detected"] == 8


class TestSweepCommand:
    def test_row_count(self, tmp_path, ccz_program):
        out = tmp_path / "circuit.json"
        run(["compile", "--in", ccz_program, "--out", out, "--budget", 1, "--measure-x", "3"])
        csv_path = tmp_path / "sweep.csv"
        code = run([
            "sweep", "--circuit", out, "--outputs", "0,1,2", "--pl", "1e-4",
            "--r", "1,3,10", "--shots", "1e3", "--seed", 2, "--gadgetize",
            "--out", csv_path,
        ])
        assert code == 0
        lines = csv_path.read_text().strip().splitlines()
        assert len(lines) == 4  # header + 3 rows


class TestCostCommand:
    def test_values(self, capsys):
        assert run(["cost", "--distance", "11"]) == 0
        assert "20328" in capsys.readouterr().out
