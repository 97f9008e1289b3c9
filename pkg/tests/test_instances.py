"""Tests for instance models, bundle I/O, residuals and reductions."""
import io
import json

import numpy as np
import pytest

from avecert.core.errors import DimensionMismatch, MissingRightHandSide, ParseError
from avecert.models.instances import GaveInstance, GavmeInstance, NgavmeInstance, SylvesterAveInstance
from avecert.models.schemas import EquationClass
from avecert.services.instances import (
    column_count,
    gavme_columns,
    lift_gavme,
    parse_instance,
    parse_instance_data,
    reduce_ngavme,
    residual,
    scalar_sylvester_as_gave,
    unlift_solution,
    write_instance,
    write_matrix,
)
from avecert.services.matcore import vec
from avecert.services.reference_cases import GAVME_3X3, GAVME_3X3_SOLUTION, NGAVME_3X3, NGAVME_3X3_SOLUTION
from avecert.services.solve import gavme_solution_count, oracle_gave


def test_parse_bundle_case_insensitive_tag():
    inst = parse_instance_data({"type": "gave", "A": [[2.0]], "B": [[1.0]], "f": [3.0]})

    assert isinstance(inst, GaveInstance)
    assert inst.equation_class == EquationClass.GAVE
    assert inst.f.tolist() == [3.0]


def test_parse_bundle_class_override():
    inst = parse_instance_data({"A": [[2.0]], "B": [[1.0]], "F": [[3.0, 4.0]]}, EquationClass.GAVME)
    assert isinstance(inst, GavmeInstance)
    assert column_count(inst) == 2


def test_parse_bundle_missing_field():
    with pytest.raises(ParseError):
        parse_instance_data({"type": "GAVME", "A": [[1.0]]})


def test_parse_bundle_unknown_type():
    with pytest.raises(ParseError):
        parse_instance_data({"type": "LCP", "A": [[1.0]], "B": [[1.0]]})


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        GavmeInstance(A=np.eye(2), B=np.eye(2), F=np.ones((3, 2)))
    with pytest.raises(DimensionMismatch):
        NgavmeInstance(A=np.eye(2), B=np.eye(2), C=np.eye(3))
    with pytest.raises(DimensionMismatch):
        SylvesterAveInstance(A=np.eye(2), B=np.eye(2), K=np.eye(2), L=np.eye(2), F=np.ones((2, 3)))


def test_rectangular_f_allowed():
    inst = GavmeInstance(A=np.eye(2), B=np.zeros((2, 2)), F=np.ones((2, 5)))
    assert column_count(inst) == 5


def test_json_round_trip(tmp_path):
    path = tmp_path / "instance.json"
    write_instance(NGAVME_3X3, path, extra={"ground_truth": NGAVME_3X3_SOLUTION})

    bundle = json.loads(path.read_text())
    assert bundle["type"] == "NGAVME"
    assert bundle["ground_truth"][0] == [2.0, 5.0, -1.0]

    inst = parse_instance(path)
    assert isinstance(inst, NgavmeInstance)
    assert np.array_equal(inst.C, NGAVME_3X3.C)
    assert np.array_equal(inst.F, NGAVME_3X3.F)


def test_parse_from_stream():
    stream = io.StringIO(json.dumps({"type": "GAVE", "A": [[1.0]], "B": [[2.0]], "f": [1.0]}))
    assert isinstance(parse_instance(stream), GaveInstance)


def test_matrix_market_directory_infers_class(tmp_path):
    directory = tmp_path / "ngavme"
    write_instance(NGAVME_3X3, directory, format="mtx")

    inst = parse_instance(directory)
    assert isinstance(inst, NgavmeInstance)
    assert np.allclose(inst.A, NGAVME_3X3.A)


def test_matrix_market_gave_from_lowercase_f(tmp_path):
    directory = tmp_path / "gave"
    write_instance(GaveInstance(A=np.eye(2), B=0.5 * np.eye(2), f=[1.0, -1.0]), directory, format="mtx")

    inst = parse_instance(directory)
    assert isinstance(inst, GaveInstance)
    assert inst.f.tolist() == [1.0, -1.0]


def test_matrix_market_requires_a_and_b(tmp_path):
    directory = tmp_path / "partial"
    directory.mkdir()
    write_matrix(np.eye(2), directory / "A.mtx", "mtx")
    with pytest.raises(ParseError):
        parse_instance(directory)


def test_parse_missing_and_malformed(tmp_path):
    with pytest.raises(ParseError):
        parse_instance(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{ 1.2:3.4}")
    with pytest.raises(ParseError):
        parse_instance(broken)


def test_residual_of_printed_solutions():
    assert residual(GAVME_3X3, GAVME_3X3_SOLUTION) <= 1e-12
    assert residual(NGAVME_3X3, NGAVME_3X3_SOLUTION) <= 1e-12


def test_residual_needs_rhs():
    with pytest.raises(MissingRightHandSide):
        residual(GavmeInstance(A=np.eye(2), B=np.eye(2)), np.zeros((2, 1)))


def test_residual_shape_check():
    with pytest.raises(DimensionMismatch):
        residual(GAVME_3X3, np.zeros((3, 2)))


def test_reduce_ngavme_maps_solution():
    reduced, back_map = reduce_ngavme(NGAVME_3X3)
    Y = NGAVME_3X3.C @ NGAVME_3X3_SOLUTION

    assert residual(reduced, Y) <= 1e-12
    assert np.allclose(back_map(Y), NGAVME_3X3_SOLUTION)


def test_gavme_columns_split():
    columns = gavme_columns(GAVME_3X3)
    assert len(columns) == 3
    for j, gave in enumerate(columns):
        assert residual(gave, GAVME_3X3_SOLUTION[:, j]) <= 1e-12


def test_kronecker_lift():
    lifted = lift_gavme(GAVME_3X3)

    assert lifted.order == 9
    assert residual(lifted, vec(GAVME_3X3_SOLUTION)) <= 1e-12
    assert np.array_equal(unlift_solution(vec(GAVME_3X3_SOLUTION), GAVME_3X3), GAVME_3X3_SOLUTION)


def test_scalar_sylvester_reduction():
    inst = SylvesterAveInstance(A=[[2.0]], B=[[3.0]], K=[[0.5]], L=[[2.0]], F=[[1.0]])
    gave = scalar_sylvester_as_gave(inst)

    assert gave.A.item() == 1.0
    assert gave.B.item() == 6.0
    assert gave.f.tolist() == [1.0]

    with pytest.raises(DimensionMismatch):
        scalar_sylvester_as_gave(SylvesterAveInstance(A=np.eye(2), B=np.eye(2), K=np.eye(2), L=np.eye(2)))


@pytest.mark.parametrize("m", [1, 2])
def test_lift_and_column_split_agree_on_solutions(m):
    """Solutions of the lifted GAVE are exactly the column-wise combinations."""
    rng = np.random.default_rng(100 + m)
    for _ in range(50):
        inst = GavmeInstance(A=rng.standard_normal((2, 2)), B=rng.standard_normal((2, 2)),
                             F=rng.standard_normal((2, m)))
        per_column = [oracle_gave(gave.A, gave.B, gave.f) for gave in gavme_columns(inst)]
        lifted = lift_gavme(inst)
        lifted_report = oracle_gave(lifted.A, lifted.B, lifted.f)

        assert lifted_report.solution_count == gavme_solution_count(per_column)
        for x in lifted_report.solutions:
            X = unlift_solution(np.array(x), inst)
            for j, report in enumerate(per_column):
                assert any(np.allclose(X[:, j], s, atol=1e-8) for s in report.solutions)
