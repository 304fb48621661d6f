import pytest
from numpy.testing import assert_allclose, assert_array_equal

from app.core.exceptions import HermitianValidationError, ProblemParseError
from app.services.problem_service import problem_service
from conftest import WORKED_PROBLEM

VALID = """
nb: 1
n: 3
A: 2, 1-1j; 1+1j, 3   # complex off-diagonal
b: 1/2, -0.5j
"""


def test_load_worked_problem():
    problem = problem_service.load_problem(WORKED_PROBLEM)
    assert problem.nb == 1
    assert problem.n == 2
    assert problem.C == 1.0
    assert problem.mode == "exact"
    assert_allclose(problem.system.A, [[1, -1 / 3], [-1 / 3, 1]])
    assert_array_equal(problem.system.b, [0, 1])


def test_parse_complex_and_rational_entries():
    problem = problem_service.parse_problem(VALID)
    assert problem.system.A[0, 1] == 1 - 1j
    assert problem.system.A[1, 0] == 1 + 1j
    assert_array_equal(problem.system.b, [0.5, -0.5j])
    assert problem.C is None
    assert problem.mode == "exact"


def test_parse_entry_forms():
    assert problem_service.parse_entry(" -1/3 ", "A") == pytest.approx(-1 / 3)
    assert problem_service.parse_entry("2.5e-1", "A") == 0.25
    assert problem_service.parse_entry("4j", "A") == 4j
    with pytest.raises(ProblemParseError):
        problem_service.parse_entry("1/0", "A")
    with pytest.raises(ProblemParseError):
        problem_service.parse_entry("one", "b")


@pytest.mark.parametrize(
    "text, missing",
    [
        ("", "nb"),
        ("nb: 1\n", "n"),
        ("nb: 1\nn: 2\nb: 0, 1\n", "A"),
        ("nb: 1\nn: 2\nA: 1, 0; 0, 2\n", "b"),
    ],
)
def test_missing_fields_reported_in_order(text, missing):
    with pytest.raises(ProblemParseError) as info:
        problem_service.parse_problem(text)
    assert info.value.field == missing


def test_unknown_and_duplicate_fields():
    with pytest.raises(ProblemParseError, match="unknown field"):
        problem_service.parse_problem(VALID + "shots: 10\n")
    with pytest.raises(ProblemParseError, match="duplicate field"):
        problem_service.parse_problem(VALID + "n: 4\n")
    with pytest.raises(ProblemParseError, match="expected 'key: value'"):
        problem_service.parse_problem(VALID + "mode exact\n")


def test_ragged_matrix():
    with pytest.raises(ProblemParseError, match="different lengths"):
        problem_service.parse_problem("nb: 1\nn: 2\nA: 1, 0; 0\nb: 1, 0\n")


def test_non_hermitian_matrix():
    with pytest.raises(HermitianValidationError):
        problem_service.parse_problem("nb: 1\nn: 2\nA: 1, 2; 0, 1\nb: 1, 0\n")


def test_register_size_mismatch():
    with pytest.raises(ProblemParseError, match="nb=2"):
        problem_service.parse_problem("nb: 2\nn: 2\nA: 1, 0; 0, 2\nb: 1, 0\n")


def test_invalid_mode_and_c():
    with pytest.raises(ProblemParseError):
        problem_service.parse_problem(VALID + "mode: fuzzy\n")
    with pytest.raises(ProblemParseError):
        problem_service.parse_problem(VALID + "C: 1j\n")
    with pytest.raises(ProblemParseError):
        problem_service.parse_problem(VALID + "C: -1\n")


def test_dump_round_trip_is_exact(rng):
    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    A = A + A.conj().T
    b = rng.normal(size=4) + 1j * rng.normal(size=4)

    def entries(values):
        return ", ".join(repr(complex(v)).strip("()") for v in values)

    matrix = "; ".join(entries(row) for row in A)
    text = f"nb: 2\nn: 4\nA: {matrix}\nb: {entries(b)}\nC: 0.5\n"
    problem = problem_service.parse_problem(text)

    again = problem_service.parse_problem(problem_service.dump_problem(problem))
    assert_array_equal(again.system.A, problem.system.A)
    assert_array_equal(again.system.b, problem.system.b)
    assert (again.nb, again.n, again.C, again.mode) == (problem.nb, problem.n, problem.C, problem.mode)


def test_dump_worked_problem():
    problem = problem_service.load_problem(WORKED_PROBLEM)
    text = problem_service.dump_problem(problem)
    assert text.splitlines()[0] == "nb: 1"
    assert "C: 1.0" in text
    assert text.endswith("mode: exact\n")
    assert_array_equal(problem_service.parse_problem(text).system.A, problem.system.A)


def test_unreadable_file(tmp_path):
    with pytest.raises(ProblemParseError, match="cannot read"):
        problem_service.load_problem(tmp_path / "missing.txt")
