import numpy as np
import pytest

from src.core.exceptions import UnsupportedCombinationError
from src.domain import ModelKind
from src.models import ModelParams
from src.services.duality_check import balance_report, balance_table, check_params, rebalance
from src.services.regularizers import unweighted_dura

def one(value):
    return np.array([[float(value)]])

def scores(H, Rmat, T):
    return np.einsum("id,jd,kd->ijk", H, Rmat, T)

def test_balanced_single_cell():
    report = balance_report(one(1), one(1), one(1))
    assert report.dura_value == pytest.approx(4.0)
    assert report.bound_value == pytest.approx(4.0)
    assert report.max_residual() == 0.0

def test_unbalanced_single_cell():
    report = balance_report(one(2), one(2), one(1))
    assert report.dura_value == pytest.approx(25.0)
    assert report.bound_value == pytest.approx(16.0)

def test_zero_parameters():
    report = balance_report(np.zeros((3, 2)), np.zeros((2, 2)), np.zeros((3, 2)))
    assert report.dura_value == 0.0
    assert report.bound_value == 0.0
    assert report.max_residual() == 0.0

def test_rebalance_single_cell():
    H, Rmat, T = rebalance(one(2), one(2), one(1))
    assert (H[0, 0], Rmat[0, 0], T[0, 0]) == pytest.approx((2.0, 1.0, 2.0))
    assert balance_report(H, Rmat, T).max_residual() == pytest.approx(0.0, abs=1e-12)

def test_balanced_input_is_a_fixed_point():
    H, Rmat, T = rebalance(one(1), one(1), one(1))
    assert (H[0, 0], Rmat[0, 0], T[0, 0]) == (1.0, 1.0, 1.0)

def test_zero_columns_pass_through():
    H = np.array([[1.0, 0.0], [2.0, 0.0]])
    Rmat = np.array([[3.0, 1.0]])
    T = np.array([[1.0, 5.0], [1.0, 1.0]])
    H2, R2, T2 = rebalance(H, Rmat, T)
    assert np.array_equal(H2[:, 1], H[:, 1])
    assert np.array_equal(R2[:, 1], Rmat[:, 1])
    assert np.array_equal(T2[:, 1], T[:, 1])

def test_rebalance_on_random_instances():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n_entities, n_relations, dim = rng.integers(1, 9), rng.integers(1, 6), rng.integers(1, 7)
        H = rng.standard_normal((n_entities, dim))
        Rmat = rng.standard_normal((n_relations, dim))
        T = rng.standard_normal((n_entities, dim))
        H2, R2, T2 = rebalance(H, Rmat, T)

        np.testing.assert_allclose(scores(H2, R2, T2), scores(H, Rmat, T), rtol=1e-12, atol=1e-12)
        before, after = balance_report(H, Rmat, T), balance_report(H2, R2, T2)
        assert after.max_residual() < 1e-9
        assert after.dura_value == pytest.approx(after.bound_value, rel=1e-9)
        assert before.dura_value >= after.dura_value * (1 - 1e-12)
        assert before.dura_value >= before.bound_value * (1 - 1e-12)

        again = rebalance(H2, R2, T2)
        for first, second in zip((H2, R2, T2), again):
            np.testing.assert_allclose(second, first, rtol=1e-12, atol=1e-12)

def test_four_term_sum_matches_the_regularizer():
    rng = np.random.default_rng(3)
    tables = {
        "entity_head": rng.standard_normal((5, 4)),
        "entity_tail": rng.standard_normal((5, 4)),
        "relation": rng.standard_normal((3, 4)),
    }
    params = ModelParams(ModelKind.CP, 4, tables)
    report = balance_report(tables["entity_head"], tables["relation"], tables["entity_tail"])
    # unweighted_dura also sums over every tail and head: one factor |E|
    assert unweighted_dura(params) == pytest.approx(5 * report.dura_value, rel=1e-12)

def test_check_params_and_table(make_params):
    before, after = check_params(make_params(ModelKind.CP, 5, 3, 4, seed=9))
    assert after.dura_value <= before.dura_value
    assert balance_table(before, after).row_count == len(before.summary())

@pytest.mark.parametrize("kind", [ModelKind.COMPLEX, ModelKind.RESCAL])
def test_non_cp_models_are_unsupported(kind, make_params):
    with pytest.raises(UnsupportedCombinationError):
        check_params(make_params(kind, 3, 2, 4))

def test_matrix_relations_are_unsupported():
    with pytest.raises(UnsupportedCombinationError):
        balance_report(np.ones((2, 2)), np.ones((1, 2, 2)), np.ones((2, 2)))

def test_head_half_matches_its_definition():
    rng = np.random.default_rng(11)
    H, Rmat, T = rng.standard_normal((4, 3)), rng.standard_normal((2, 3)), rng.standard_normal((4, 3))
    report = balance_report(H, Rmat, T)
    head_half = sum(np.sum((H * r) ** 2) + np.sum(T ** 2) for r in Rmat)
    tail_half = sum(np.sum((T * r) ** 2) + np.sum(H ** 2) for r in Rmat)
    assert report.head_half_value == pytest.approx(head_half, rel=1e-12)
    assert report.tail_half_value == pytest.approx(tail_half, rel=1e-12)
    assert report.dura_value == pytest.approx(head_half + tail_half, rel=1e-12)

def test_half_bound_holds_on_random_instances():
    rng = np.random.default_rng(77)
    for _ in range(50):
        n_entities, n_relations, dim = rng.integers(1, 7), rng.integers(1, 5), rng.integers(1, 6)
        report = balance_report(rng.standard_normal((n_entities, dim)),
                                rng.standard_normal((n_relations, dim)),
                                rng.standard_normal((n_entities, dim)))
        assert report.head_half_value >= report.half_bound_value * (1 - 1e-12)
        assert report.tail_half_value >= report.half_bound_value * (1 - 1e-12)

def test_half_bound_is_tight_when_the_first_condition_holds():
    # h r = sqrt(|R|) t holds, t r = sqrt(|R|) h does not
    report = balance_report(one(1), one(2), one(2))
    assert report.condition1_residuals[0] == 0.0
    assert report.condition2_residuals[0] == pytest.approx(3.0)
    assert report.head_half_value == pytest.approx(report.half_bound_value)
    assert report.tail_half_value > report.half_bound_value

def test_half_bound_is_strict_when_the_first_condition_fails():
    report = balance_report(one(2), one(2), one(1))
    assert report.condition1_residuals[0] > 0.0
    assert report.head_half_value > report.half_bound_value

def test_record_carries_per_dimension_values():
    H = np.array([[3.0, 0.0], [4.0, 1.0]])
    Rmat = np.array([[1.0, 2.0]])
    T = np.array([[0.0, 1.0], [5.0, 0.0]])
    record = balance_report(H, Rmat, T).as_record()
    assert record["column_norms"] == [[5.0, 1.0, 5.0], [1.0, 2.0, 1.0]]
    assert record["condition1_residuals"] == [0.0, 1.0]
    assert record["condition2_residuals"] == [0.0, 1.0]
    assert record["max_condition1_residual"] == 1.0
