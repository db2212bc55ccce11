import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from weaksub.errors import DegenerateDataError, DomainError, ResourceError
from weaksub.greedy import greedy
from weaksub.ratios import make_certificate, subadditivity_ratio_set, submodularity_ratio_uk
from weaksub.regression import (R2Function, RegressionInstance, fit_coefficients, gamma_lower_bound_regression,
                                load_csv, normalize, nu_lower_bound_regression, omp_select, r2_reference,
                                r2_value, read_support, save_csv, sparse_eigenvalues, write_support)

from conftest import random_r2


def test_normalize_scales_columns():
    inst = normalize(RegressionInstance(np.array([[3.0, 1.0], [4.0, 0.0]]), np.array([0.0, 2.0])))
    assert np.allclose(inst.X[:, 0], [0.6, 0.8])
    assert inst.col_scale[0] == 5.0 and inst.y_scale == 2.0


def test_normalize_idempotent_bit_exact():
    once = random_r2(5, n=10, seed=1)
    twice = normalize(once)
    assert np.array_equal(once.X, twice.X) and np.array_equal(once.y, twice.y)
    assert np.array_equal(once.col_scale, twice.col_scale)


def test_normalize_unit_norms():
    gen = np.random.default_rng(4)
    inst = normalize(RegressionInstance(gen.standard_normal((10, 5)), gen.standard_normal(10)))
    assert np.all(np.abs(np.linalg.norm(inst.X, axis=0) - 1) <= 1e-12)
    assert abs(np.linalg.norm(inst.y) - 1) <= 1e-12


def test_normalize_degenerate():
    X = np.array([[1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(DegenerateDataError, match="column b"):
        normalize(RegressionInstance(X, [1.0, 1.0], names=["a", "b"]))
    with pytest.raises(DegenerateDataError, match="response"):
        normalize(RegressionInstance(np.eye(2), [0.0, 0.0]))


def test_r2_examples(orthonormal):
    assert r2_value(orthonormal, [0, 1]) == pytest.approx(1.0, abs=1e-12)
    assert r2_value(orthonormal, []) == 0.0
    s = 1 / math.sqrt(2)
    inst = normalize(RegressionInstance(np.array([[1.0, s], [0.0, s]]), np.array([1.0, 0.0])))
    assert r2_value(inst, [1]) == pytest.approx(0.5, abs=1e-12)


def test_r2_rank_deficient_column_adds_nothing():
    inst = random_r2(4, seed=3)
    X = np.column_stack([inst.X, inst.X[:, 1]])
    dup = RegressionInstance(X, inst.y)
    val, skipped = r2_value(dup, [1, 4, 2], return_skipped=True)
    assert skipped == [4]
    assert val == pytest.approx(r2_value(inst, [1, 2]), abs=1e-12)
    f = R2Function(dup)
    assert f.marginal_gain([1], 4) == 0.0
    t = greedy(f, None, 5)
    assert t.steps[-1].degenerate and t.value == pytest.approx(r2_reference(dup, range(5)), abs=1e-10)


@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 10), data=st.data())
def test_r2_matches_least_squares(seed, d, data):
    inst = random_r2(d, seed=seed, corr=data.draw(st.sampled_from([0.0, 2.0])))
    S = data.draw(st.lists(st.integers(0, d - 1), unique=True))
    assert r2_value(inst, S) == pytest.approx(r2_reference(inst, S), abs=1e-8)


def test_vectorized_gains_match_single():
    inst = random_r2(12, seed=6, corr=1.0)
    f = R2Function(inst)
    S = (2, 7, 9)
    cands = [j for j in range(12) if j not in S]
    batch = f.gains(S, cands)
    single = [r2_value(inst, S + (j,)) - r2_value(inst, S) for j in cands]
    assert np.allclose(batch, single, atol=1e-12)
    # a candidate's gain does not depend on the rest of the batch
    assert f.gains(S, cands[3:4])[0] == batch[3]


def test_sparse_eigen_examples():
    for k in range(1, 5):
        b = sparse_eigenvalues(np.eye(4), k)
        assert b.lam_min == pytest.approx(1.0) and b.lam_max == pytest.approx(1.0)
    rho = 0.3
    b = sparse_eigenvalues(np.array([[1, rho], [rho, 1]]), 2)
    assert b.lam_min == pytest.approx(1 - rho) and b.lam_max == pytest.approx(1 + rho)


def test_sparse_eigen_reverse_enumeration():
    C = random_r2(8, seed=12, corr=1.0).C
    b = sparse_eigenvalues(C, 3)
    ev = [np.linalg.eigvalsh(C[np.ix_(s, s)]) for s in reversed(list(combinations(range(8), 3)))]
    assert len(ev) == 56
    assert b.lam_min == pytest.approx(min(e[0] for e in ev), abs=1e-12)
    assert b.lam_max == pytest.approx(max(e[-1] for e in ev), abs=1e-12)
    assert np.linalg.eigvalsh(C[np.ix_(b.min_support, b.min_support)])[0] == pytest.approx(b.lam_min)


def test_sparse_eigen_budget():
    with pytest.raises(ResourceError, match="strong concavity"):
        sparse_eigenvalues(np.eye(40), 10)
    with pytest.raises(DomainError):
        sparse_eigenvalues(np.eye(3), 4)


def test_gamma_bound(orthonormal):
    g = gamma_lower_bound_regression(orthonormal, [0], 2)
    assert g == pytest.approx(1.0)
    assert make_certificate("greedy", g).factor == pytest.approx(1 - math.exp(-1))
    inst = random_r2(6, seed=17, corr=1.0)
    f = R2Function(inst)
    S = greedy(f, None, 2).selected
    assert gamma_lower_bound_regression(inst, S, 2) <= submodularity_ratio_uk(f, S, 2).value + 1e-8


def test_gamma_bound_duplicated_column():
    inst = random_r2(3, seed=2)
    dup = RegressionInstance(np.column_stack([inst.X, inst.X[:, 0]]), inst.y)
    g = gamma_lower_bound_regression(dup, [], 2)
    assert g == pytest.approx(0.0, abs=1e-12)
    assert make_certificate("greedy", max(g, 0.0)).factor == pytest.approx(0.0, abs=1e-12)


def test_nu_bound(orthonormal):
    assert nu_lower_bound_regression(orthonormal, [0, 1, 2]) == pytest.approx(1.0)
    X = np.array([[1.0, 0.5], [0.0, math.sqrt(0.75)]])
    assert nu_lower_bound_regression(RegressionInstance(X, [1.0, 0.0]), [0, 1]) == pytest.approx(1 / 3)
    inst = random_r2(6, seed=23, corr=1.0)
    S = [0, 1, 3, 4]
    assert nu_lower_bound_regression(inst, S) <= subadditivity_ratio_set(R2Function(inst), S).value + 1e-8
    with pytest.raises(DegenerateDataError):
        nu_lower_bound_regression(RegressionInstance(np.zeros((2, 2)), [1.0, 0.0]), [0, 1])


def test_omp(orthonormal):
    f = R2Function(orthonormal)
    assert omp_select(orthonormal, 2).selected == greedy(f, None, 2).selected
    inst = random_r2(9, seed=31, corr=1.0)
    assert omp_select(inst, 1).selected == [int(np.argmax(inst.b ** 2))]
    assert omp_select(inst, 1).selected == greedy(R2Function(inst), None, 1).selected


def test_omp_monotone_and_consistent():
    inst = random_r2(6, seed=37, corr=2.0)
    t = omp_select(inst, 6)
    vals = [s.value for s in t.steps]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    assert t.value == pytest.approx(r2_reference(inst, t.selected), abs=1e-10)
    assert sorted(t.selected) == list(range(6))


def test_fit_coefficients_and_raw_units():
    gen = np.random.default_rng(0)
    X = gen.standard_normal((30, 4)) * [1.0, 10.0, 0.1, 3.0]
    y = X @ [1.0, -2.0, 0.0, 0.5] + 0.01 * gen.standard_normal(30)
    inst = normalize(RegressionInstance(X, y))
    kept, beta = fit_coefficients(inst, [0, 1, 3])
    ref, *_ = np.linalg.lstsq(X[:, kept], y, rcond=None)
    assert np.allclose(inst.raw_coefficients(kept, beta)[kept], ref, atol=1e-10)


def test_csv_round_trip(tmp_path):
    gen = np.random.default_rng(1)
    X, y = gen.standard_normal((7, 3)), gen.standard_normal(7)
    save_csv(tmp_path / "d.csv", X, y, names=["a", "b", "c"])
    inst = load_csv(tmp_path / "d.csv")
    assert np.array_equal(inst.X, X) and np.array_equal(inst.y, y) and inst.names == ["a", "b", "c"]
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(DomainError):
        load_csv(tmp_path / "bad.csv")
    write_support(tmp_path / "s.txt", [4, 0, 2])
    assert read_support(tmp_path / "s.txt") == [4, 0, 2]
