"""Reduced-problem solvers: stop rule, implicit-error contract, backends."""

import numpy as np
import pytest

import helpers
from sieveopt import (
    Backend,
    IndexSet,
    InnerConfig,
    Lasso,
    LossKind,
    ProblemData,
    objective,
    restrict_regularizer,
    solve_reduced,
)


def _true_lipschitz(problem, I):
    B = problem.A[:, I.indices]
    lam = float(np.linalg.eigvalsh(B.T @ B)[-1])
    return lam * (0.25 if problem.loss is LossKind.LOGISTIC else 1.0)


class TestStopRule:
    def test_zero_start_already_optimal(self):
        rng = np.random.default_rng(1)
        p = helpers.random_problem(rng, 8, 5)
        lam = float(np.max(np.abs(p.A.T @ p.b))) * 1.1
        res = solve_reduced(p, Lasso(lam=lam, n=5), IndexSet.full(5), np.zeros(5))
        assert res.iterations == 0
        assert res.converged
        assert res.delta_norm == 0.0
        assert np.array_equal(res.x_support, np.zeros(5))

    def test_warm_start_at_optimum_stops_immediately(self):
        rng = np.random.default_rng(2)
        p = helpers.random_problem(rng, 10, 4)
        spec = Lasso(lam=0.5, n=4)
        x_star = helpers.reference_proxgrad(p, spec, tol=1e-13)
        res = solve_reduced(p, spec, IndexSet.full(4), x_star)
        assert res.iterations == 0
        assert res.converged

    def test_one_dimensional_closed_form(self):
        # min (z-3)^2/2 + |z| has solution z = 2; delta <= eps and strong
        # convexity modulus 1 give |x - 2| <= eps
        p = ProblemData(A=np.array([[1.0]]), b=np.array([3.0]))
        res = solve_reduced(p, Lasso(lam=1.0, n=1), IndexSet.full(1), np.zeros(1))
        assert res.converged
        assert abs(res.x_support[0] - 2.0) <= 2e-6


class TestInexactnessContract:
    @pytest.mark.parametrize("kind", helpers.REG_KINDS)
    @pytest.mark.parametrize("loss", [LossKind.LEAST_SQUARES, LossKind.LOGISTIC])
    def test_delta_within_certified_budget(self, kind, loss):
        rng = np.random.default_rng((hash(kind) + hash(loss.value)) % 2**32)
        for _ in range(5):
            m, n = int(rng.integers(6, 16)), int(rng.integers(3, 10))
            p = helpers.random_problem(rng, m, n, loss)
            spec = helpers.random_spec(rng, kind, n)
            I = IndexSet.full(n)
            res = solve_reduced(p, spec, I, np.zeros(n))
            L_true = _true_lipschitz(p, I)
            assert res.delta_norm <= (1.0 + L_true) * res.z_gap + 1e-12
            if res.converged:
                assert res.delta_norm <= 1e-6

    def test_objective_matches_reference(self):
        rng = np.random.default_rng(41)
        for kind in helpers.REG_KINDS:
            p = helpers.random_problem(rng, 12, 6)
            spec = helpers.random_spec(rng, kind, 6)
            res = solve_reduced(p, spec, IndexSet.full(6), np.zeros(6))
            assert res.converged
            x_ref = helpers.reference_proxgrad(p, spec, tol=1e-12)
            f_hat = objective(p, spec, res.x_support)
            f_ref = objective(p, spec, x_ref)
            assert f_hat <= f_ref + 1e-6

    def test_reduced_index_set(self):
        rng = np.random.default_rng(42)
        p = helpers.random_problem(rng, 10, 8)
        I = IndexSet(np.array([1, 3, 6]))
        spec = restrict_regularizer(Lasso(lam=0.4, n=8), I)
        res = solve_reduced(p, spec, I, np.zeros(3))
        assert res.converged
        assert res.x_support.shape == (3,)
        # the reduced solve is a 3-column problem; check against a reference
        p_red = ProblemData(A=p.A[:, I.indices], b=p.b)
        x_ref = helpers.reference_proxgrad(p_red, Lasso(lam=0.4, n=3), tol=1e-12)
        assert objective(p_red, Lasso(lam=0.4, n=3), res.x_support) <= (
            objective(p_red, Lasso(lam=0.4, n=3), x_ref) + 1e-6
        )


class TestBackends:
    def _instance(self):
        rng = np.random.default_rng(51)
        p = helpers.random_problem(rng, 15, 8)
        spec = helpers.random_spec(rng, "sgl", 8)
        return p, spec

    def test_backends_agree(self):
        p, spec = self._instance()
        I = IndexSet.full(8)
        results = {
            backend: solve_reduced(p, spec, I, np.zeros(8), InnerConfig(backend=backend))
            for backend in (Backend.APG, Backend.PROXGRAD, Backend.BB)
        }
        values = {}
        for backend, res in results.items():
            assert res.converged, backend
            values[backend] = objective(p, spec, res.x_support)
        fa = values[Backend.APG]
        assert values[Backend.PROXGRAD] == pytest.approx(fa, rel=1e-6, abs=1e-9)
        assert values[Backend.BB] == pytest.approx(fa, rel=1e-6, abs=1e-9)

    def test_backtracking_variants(self):
        p, spec = self._instance()
        I = IndexSet.full(8)
        for backend in (Backend.APG, Backend.PROXGRAD, Backend.BB):
            res = solve_reduced(
                p, spec, I, np.zeros(8),
                InnerConfig(backend=backend, use_lipschitz=False),
            )
            assert res.converged
            assert res.delta_norm <= 1e-6

    def test_bb_certificate_bound_all_regularizers(self):
        rng = np.random.default_rng(55)
        cfg = InnerConfig(backend=Backend.BB)
        for kind in helpers.REG_KINDS:
            p = helpers.random_problem(rng, 14, 7)
            spec = helpers.random_spec(rng, kind, 7)
            I = IndexSet.full(7)
            res = solve_reduced(p, spec, I, np.zeros(7), cfg)
            L_true = _true_lipschitz(p, I)
            assert res.delta_norm <= (1.0 + L_true) * res.z_gap + 1e-12
            assert res.converged
            x_ref = helpers.reference_proxgrad(p, spec, tol=1e-12)
            assert objective(p, spec, res.x_support) <= objective(p, spec, x_ref) + 1e-6

    def test_bb_handles_ill_conditioned_quickly(self):
        rng = np.random.default_rng(56)
        A = rng.standard_normal((40, 12)) * np.logspace(0, -2, 12)
        p = ProblemData(A=A, b=rng.standard_normal(40))
        spec = Lasso(lam=0.01, n=12)
        I = IndexSet.full(12)
        res_b = solve_reduced(p, spec, I, np.zeros(12), InnerConfig(backend=Backend.BB))
        res_p = solve_reduced(p, spec, I, np.zeros(12), InnerConfig(backend=Backend.PROXGRAD))
        assert res_b.converged
        assert res_b.iterations < res_p.iterations

    def test_bb_logistic(self):
        rng = np.random.default_rng(57)
        p = helpers.random_problem(rng, 30, 5, LossKind.LOGISTIC)
        spec = Lasso(lam=0.2, n=5)
        res = solve_reduced(
            p, spec, IndexSet.full(5), np.zeros(5), InnerConfig(backend=Backend.BB)
        )
        assert res.converged
        x_ref = helpers.reference_proxgrad(p, spec, tol=1e-12)
        assert objective(p, spec, res.x_support) <= objective(p, spec, x_ref) + 1e-6

    def test_apg_faster_than_proxgrad_on_ill_conditioned(self):
        # columns on very different scales force a small step; momentum
        # should need materially fewer iterations
        rng = np.random.default_rng(52)
        A = rng.standard_normal((40, 12)) * np.logspace(0, -2, 12)
        p = ProblemData(A=A, b=rng.standard_normal(40))
        spec = Lasso(lam=0.01, n=12)
        I = IndexSet.full(12)
        res_a = solve_reduced(p, spec, I, np.zeros(12), InnerConfig(backend=Backend.APG))
        res_p = solve_reduced(p, spec, I, np.zeros(12), InnerConfig(backend=Backend.PROXGRAD))
        assert res_a.converged
        assert res_a.iterations < res_p.iterations

    def test_logistic_solve(self):
        rng = np.random.default_rng(53)
        p = helpers.random_problem(rng, 30, 5, LossKind.LOGISTIC)
        spec = Lasso(lam=0.2, n=5)
        res = solve_reduced(p, spec, IndexSet.full(5), np.zeros(5))
        assert res.converged
        x_ref = helpers.reference_proxgrad(p, spec, tol=1e-12)
        assert objective(p, spec, res.x_support) <= objective(p, spec, x_ref) + 1e-6


class TestNonConvergence:
    def test_cap_reported_honestly(self):
        rng = np.random.default_rng(61)
        A = rng.standard_normal((30, 10)) * np.logspace(0, -3, 10)
        p = ProblemData(A=A, b=rng.standard_normal(30) * 10)
        spec = Lasso(lam=1e-4, n=10)
        res = solve_reduced(
            p, spec, IndexSet.full(10), np.zeros(10), InnerConfig(max_iters=3)
        )
        assert not res.converged
        assert res.iterations <= 3
        assert np.all(np.isfinite(res.x_support))
        assert res.delta_norm >= 0.0 and res.z_gap >= 0.0


class TestValidation:
    def test_bad_inputs(self):
        p = ProblemData(A=np.eye(3), b=np.zeros(3))
        spec = Lasso(lam=1.0, n=3)
        with pytest.raises(ValueError):
            solve_reduced(p, spec, IndexSet(np.array([], dtype=int)), np.zeros(0))
        with pytest.raises(ValueError):
            solve_reduced(p, spec, IndexSet.full(3), np.zeros(2))
        with pytest.raises(ValueError):
            solve_reduced(p, Lasso(lam=1.0, n=2), IndexSet.full(3), np.zeros(3))
        with pytest.raises(ValueError):
            solve_reduced(p, spec, IndexSet.full(3), np.array([np.nan, 0.0, 0.0]))

    def test_bad_config(self):
        with pytest.raises(ValueError):
            InnerConfig(max_iters=0)
        with pytest.raises(ValueError):
            InnerConfig(epsilon_outer=0.0)
