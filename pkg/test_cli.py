import pytest

from app.main import main
from conftest import DATA_DIR

ROUNDED_PROBLEM = DATA_DIR / "rounded_example.txt"


def write_problem(tmp_path, body: str):
    path = tmp_path / "problem.txt"
    path.write_text(body, encoding="utf-8")
    return str(path)


def test_trace_human(worked_problem_file, capsys):
    assert main(["trace", "--input", str(worked_problem_file)]) == 0
    out = capsys.readouterr().out
    assert "Ψ1 state preparation" in out
    assert "|1000> : 1.0" in out
    assert "-0.4330" in out
    assert "|1001> : 0.75" in out
    assert out.rstrip().endswith("success probability: 0.625000")


def test_trace_csv(worked_problem_file, capsys):
    assert main(["trace", "--input", str(worked_problem_file), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "stage,label,index,ket,re,im"
    # ten stages of sixteen amplitudes
    assert len(lines) == 1 + 10 * 16
    assert lines[9].startswith("0,Ψ0,8,|1000>,0,")


def test_empty_problem_file(tmp_path, capsys):
    assert main(["trace", "--input", write_problem(tmp_path, "")]) == 2
    assert "'nb'" in capsys.readouterr().err


def test_missing_input_file(tmp_path, capsys):
    assert main(["solve", "--input", str(tmp_path / "nope.txt")]) == 2
    assert "not a readable file" in capsys.readouterr().err


def test_missing_input_option():
    with pytest.raises(SystemExit) as info:
        main(["solve"])
    assert info.value.code == 2


def test_solve_human(worked_problem_file, capsys):
    assert main(["solve", "--input", str(worked_problem_file)]) == 0
    out = capsys.readouterr().out
    assert "success probability: 0.625000" in out
    assert "ratio: 1:9.000000" in out
    assert "classical solution: [0.3750, 1.1250]" in out
    assert "fidelity: 1.000000" in out
    assert "lambda~=[1, 2]" in out


def test_solve_csv(worked_problem_file, capsys):
    assert main(["solve", "--input", str(worked_problem_file), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "basis_state,ket,solution_re,solution_im,probability,ratio,classical_re,classical_im"
    assert len(lines) == 3
    assert lines[1].startswith("0,|0>,")
    classical = [float(value) for value in lines[2].split(",")[6:]]
    assert classical == pytest.approx([1.125, 0.0], abs=1e-12)


def test_solve_to_output_file(worked_problem_file, tmp_path, capsys):
    target = tmp_path / "result.txt"
    assert main(["solve", "--input", str(worked_problem_file), "--output", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert "ratio: 1:9.000000" in target.read_text(encoding="utf-8")


def test_unwritable_output(worked_problem_file, tmp_path, capsys):
    target = tmp_path / "missing" / "result.txt"
    assert main(["solve", "--input", str(worked_problem_file), "--output", str(target)]) == 3
    assert "cannot write" in capsys.readouterr().err


def test_rounded_problem(capsys):
    assert main(["solve", "--input", str(ROUNDED_PROBLEM)]) == 0
    assert "max relative encoding error" in capsys.readouterr().out


def test_infeasible_encoding_suggests_rounded_plan(capsys):
    assert main(["solve", "--input", str(ROUNDED_PROBLEM), "--encoding", "exact"]) == 4
    err = capsys.readouterr().err
    assert "best rounded plan" in err
    assert "--encoding rounded" in err


def test_identity_matrix_collision(tmp_path, capsys):
    path = write_problem(tmp_path, "nb: 1\nn: 2\nA: 1, 0; 0, 1\nb: 1, 0\n")
    assert main(["solve", "--input", path]) == 2
    assert "error:" in capsys.readouterr().err


def test_per_qubit_decomposition_failure_names_stage(tmp_path, capsys):
    path = write_problem(
        tmp_path, "nb: 2\nn: 3\nA: 1, 0, 0, 0; 0, 2, 0, 0; 0, 0, 3, 0; 0, 0, 0, 4\nb: 1, 1, 1, 1\n"
    )
    assert main(["solve", "--input", path, "--ancilla", "per-qubit"]) == 2
    assert "Ψ5 ancilla rotation" in capsys.readouterr().err


def test_sample_is_deterministic(worked_problem_file, capsys):
    args = ["sample", "--input", str(worked_problem_file), "--shots", "4000", "--seed", "11"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    assert first.startswith("generator: PCG64 seed=11 shots=4000")
    assert "conditional: P(b=0|a=1)=" in first


def test_sample_single_shot_csv(worked_problem_file, capsys):
    args = ["sample", "--input", str(worked_problem_file), "--shots", "1", "--format", "csv"]
    assert main(args) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "outcome,b_register,ancilla,count,frequency"
    assert len(lines) == 5
    assert sum(int(line.split(",")[3]) for line in lines[1:]) == 1


def test_sample_rejects_zero_shots(worked_problem_file):
    assert main(["sample", "--input", str(worked_problem_file), "--shots", "0"]) == 2


def test_emit_qasm_next_to_input(worked_problem_file, capsys):
    assert main(["emit-qasm", "--input", str(worked_problem_file)]) == 0
    assert "on 4 qubits" in capsys.readouterr().out
    text = worked_problem_file.with_suffix(".qasm").read_text(encoding="utf-8")
    assert "cry(pi) q[1],q[0];" in text
    assert "cry(pi/3) q[2],q[0];" in text


def test_emit_qasm_unwritable(worked_problem_file, tmp_path):
    target = tmp_path / "missing" / "circuit.qasm"
    assert main(["emit-qasm", "--input", str(worked_problem_file), "--output", str(target)]) == 3


def test_emit_qasm_multi_qubit_register(tmp_path, capsys):
    path = write_problem(
        tmp_path, "nb: 2\nn: 3\nA: 1, 0, 0, 0; 0, 2, 0, 0; 0, 0, 3, 0; 0, 0, 0, 4\nb: 1, 1, 1, 1\n"
    )
    assert main(["emit-qasm", "--input", path]) == 2
    assert "nb = 2" in capsys.readouterr().err


def test_trace_replays_emitted_circuit(worked_problem_file, tmp_path, capsys):
    circuit = tmp_path / "circuit.qasm"
    assert main(["emit-qasm", "--input", str(worked_problem_file), "--output", str(circuit)]) == 0
    capsys.readouterr()

    assert main(["trace", "--input", str(worked_problem_file), "--replay", str(circuit)]) == 0
    out = capsys.readouterr().out
    assert "replay of circuit.qasm" in out
    value = float(out.rsplit("fidelity vs Ψ9:", 1)[1].split()[0])
    assert value > 1 - 1e-10


def test_trace_replay_of_bad_circuit(worked_problem_file, tmp_path, capsys):
    circuit = tmp_path / "broken.qasm"
    circuit.write_text("qreg q[4];\nfoo q[0];\n", encoding="utf-8")
    assert main(["trace", "--input", str(worked_problem_file), "--replay", str(circuit)]) == 2
    assert "line 2" in capsys.readouterr().err


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
