import numpy as np
import pytest

from cubelearn.lp import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
    LinearProgram,
    solve,
)


def lp(objective, lhs, relations, rhs, bounds=None):
    return LinearProgram(np.asarray(objective, dtype=float), np.asarray(lhs, dtype=float),
                         list(relations), np.asarray(rhs, dtype=float), bounds=bounds)


class TestBasics:
    def test_single_upper_bound(self):
        s = solve(lp([1.0], [[1.0]], ["<="], [3.0]))
        assert s.status == STATUS_OPTIMAL
        assert s.values == pytest.approx([3.0])
        assert s.objective_value == pytest.approx(3.0)

    def test_simplex_face(self):
        s = solve(lp([1.0, 1.0], [[1.0, 1.0]], ["<="], [1.0], bounds=[(0, None)] * 2))
        assert s.status == STATUS_OPTIMAL
        assert s.objective_value == pytest.approx(1.0)

    def test_infeasible(self):
        s = solve(lp([1.0], [[1.0]], ["<="], [-1.0], bounds=[(0, None)]))
        assert s.status == STATUS_INFEASIBLE

    def test_unbounded(self):
        s = solve(lp([1.0], np.zeros((0, 1)), [], [], bounds=[(0, None)]))
        assert s.status == STATUS_UNBOUNDED

    def test_equality_and_free_variables(self):
        # min |2 - x| with x <= 1 -> residual 1
        s = solve(lp([0.0, -1.0, -1.0],
                     [[1.0, 1.0, -1.0], [1.0, 0.0, 0.0]],
                     ["=", "<="], [2.0, 1.0],
                     bounds=[(None, None), (0, None), (0, None)]))
        assert s.status == STATUS_OPTIMAL
        assert s.objective_value == pytest.approx(-1.0)

    def test_feasibility_of_reported_optimum(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            a = rng.normal(size=(6, 4))
            b = np.abs(rng.normal(size=6)) + 0.5
            program = lp(rng.normal(size=4), a, ["<="] * 6, b, bounds=[(0, None)] * 4)
            s = solve(program)
            if s.status == STATUS_OPTIMAL:
                assert s.max_violation <= 1e-7


class TestDeterminism:
    def test_repeat_solves_identical(self):
        rng = np.random.default_rng(9)
        program = lp(rng.normal(size=5), rng.normal(size=(8, 5)),
                     ["<="] * 8, np.abs(rng.normal(size=8)) + 1.0,
                     bounds=[(0.0, None)] * 5)
        first = solve(program)
        second = solve(program)
        assert first.status == second.status
        assert np.array_equal(first.values, second.values)
        assert first.objective_value == second.objective_value

    def test_objective_scaling_keeps_vertex(self):
        rng = np.random.default_rng(10)
        lhs = rng.normal(size=(8, 4))
        rhs = np.abs(rng.normal(size=8)) + 1.0
        obj = rng.normal(size=4)
        base = solve(lp(obj, lhs, ["<="] * 8, rhs, bounds=[(0.0, None)] * 4))
        scaled = solve(lp(7.5 * obj, lhs, ["<="] * 8, rhs, bounds=[(0.0, None)] * 4))
        assert base.status == scaled.status == STATUS_OPTIMAL
        assert np.allclose(base.values, scaled.values, atol=1e-12)


class TestWeakDuality:
    def test_hand_built_dual_bounds(self):
        # A in [0.5, 1.5], c in [0, 1]: y = 2*ones is dual feasible since every
        # column sums to at least m/2 >= 1 >= c_j after scaling by 2.
        rng = np.random.default_rng(4)
        for _ in range(20):
            m, n = 5, 4
            a = rng.uniform(0.5, 1.5, size=(m, n))
            b = rng.uniform(1.0, 3.0, size=m)
            c = rng.uniform(0.0, 1.0, size=n)
            s = solve(lp(c, a, ["<="] * m, b, bounds=[(0.0, None)] * n))
            assert s.status == STATUS_OPTIMAL
            dual_bound = float(2.0 * b.sum())
            assert s.objective_value <= dual_bound + 1e-7


class TestDegenerate:
    def test_zero_rhs_rows(self):
        # x <= y <= 2 via rows with zero right-hand sides
        s = solve(lp([1.0, 0.0],
                     [[1.0, -1.0], [-1.0, -1.0], [0.0, 1.0]],
                     ["<=", "<=", "<="], [0.0, 0.0, 2.0]))
        assert s.status == STATUS_OPTIMAL
        assert s.objective_value == pytest.approx(2.0)

    def test_redundant_equalities(self):
        # duplicated equality row exercises the redundant-row drop after phase 1
        s = solve(lp([1.0, 1.0],
                     [[1.0, 1.0], [1.0, 1.0], [1.0, -1.0]],
                     ["=", "=", "<="], [2.0, 2.0, 0.0],
                     bounds=[(0, None), (0, None)]))
        assert s.status == STATUS_OPTIMAL
        assert s.objective_value == pytest.approx(2.0)

    def test_multiple_optima_deterministic(self):
        program = lp([1.0, 1.0], [[1.0, 1.0]], ["<="], [1.0], bounds=[(0, None)] * 2)
        a, b = solve(program), solve(program)
        assert np.array_equal(a.values, b.values)


class TestScipyAgreement:
    def test_random_corpus(self):
        pytest.importorskip("scipy")
        rng = np.random.default_rng(77)
        for _ in range(60):
            n = int(rng.integers(1, 6))
            m = int(rng.integers(1, 8))
            lhs = np.round(rng.normal(size=(m, n)) * 2, 1)
            rhs = np.round(rng.normal(size=m) * 2, 1)
            rels = [str(rng.choice(["<=", "=", ">="])) for _ in range(m)]
            obj = np.round(rng.normal(size=n) * 2, 1)
            bounds = []
            for kind in rng.integers(0, 4, size=n):
                bounds.append([(None, None), (0.0, None), (None, 1.5), (-1.0, 2.0)][kind])
            program = lp(obj, lhs, rels, rhs, bounds=bounds)
            mine = solve(program, backend="simplex")
            ref = solve(program, backend="scipy")
            assert mine.status == ref.status, f"{mine.status} vs {ref.status}"
            if mine.status == STATUS_OPTIMAL:
                assert mine.objective_value == pytest.approx(ref.objective_value, abs=1e-6, rel=1e-6)


def test_lp_format_dump():
    program = lp([1.0, -2.0], [[1.0, 1.0], [1.0, -1.0]], ["<=", ">="], [1.0, -1.0],
                 bounds=[(0.0, None), (None, None)])
    text = program.to_lp_format("demo")
    assert "Maximize" in text and "Subject To" in text and "Bounds" in text
    assert "c0:" in text and "End" in text


def test_ill_formed_programs_rejected():
    with pytest.raises(ValueError):
        lp([1.0, 2.0], [[1.0]], ["<="], [1.0])
    with pytest.raises(ValueError):
        lp([1.0], [[1.0]], ["<>"], [1.0])
    with pytest.raises(ValueError):
        lp([np.inf], [[1.0]], ["<="], [1.0])
