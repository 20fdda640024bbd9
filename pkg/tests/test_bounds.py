"""Training-ratio bounds: eigenvalue lower bound, closed-form upper, Jacobi solver."""

import warnings

import numpy as np
import pytest

from np_universal import (
    Distribution,
    DomainError,
    alpha_bounds,
    alpha_lower,
    alpha_lower_simplified,
    alpha_upper,
    kl_divergence,
    optimal_tradeoff,
    solve_tilt_hyperplane,
    solve_tilt_radius,
)
from np_universal.bounds import (
    SymmetricMatrix,
    hessian_matrix,
    jacobi_eigenvalues,
    min_eigen_symmetric,
)
from conftest import random_distribution

P0 = Distribution([0.3, 0.7])
P1 = Distribution([0.4, 0.6])
E0 = 0.005


def six_letter_pair(rng):
    p0 = random_distribution(rng, 6)
    p1 = random_distribution(rng, 6)
    return p0, p1, 0.25 * kl_divergence(p1, p0)


class TestAlphaLower:
    def test_binary_reference_values(self):
        # frozen references for the binary pair at two mixing weights
        assert alpha_lower(P0, P1, E0, 1.0) == pytest.approx(0.0204973634566779, abs=1e-4)
        assert alpha_lower(P0, P1, E0, 0.5) == pytest.approx(0.0117358893746988, abs=1e-4)

    def test_small_beta_vanishes(self):
        assert 0.0 <= alpha_lower(P0, P1, E0, 1e-6) <= 1e-5

    def test_monotone_in_beta(self):
        betas = np.linspace(0.01, 1.0, 20)
        vals = [alpha_lower(P0, P1, E0, float(b)) for b in betas]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("beta", [0.0, -0.2, 1.5])
    def test_beta_outside_unit_interval_rejected(self, beta):
        with pytest.raises(DomainError, match="beta must lie"):
            alpha_lower(P0, P1, E0, beta)

    def test_degenerate_pair_rejected(self):
        near = Distribution([0.5000001, 0.4999999])
        with pytest.raises(DomainError, match="degenerate pair"):
            alpha_lower(Distribution([0.5, 0.5]), near, 1e-15, 1.0)


class TestAlphaLowerSimplified:
    def test_small_alphabet_rejected(self):
        t0 = Distribution([0.2, 0.3, 0.5])
        t1 = Distribution([0.3, 0.3, 0.4])
        with pytest.raises(DomainError, match="simplified bound requires"):
            alpha_lower_simplified(t0, t1, 0.001, 1.0)

    def test_dominated_by_eigenvalue_bound(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            p0, p1, e0 = six_letter_pair(rng)
            beta = float(rng.uniform(0.05, 1.0))
            simple = alpha_lower_simplified(p0, p1, e0, beta)
            assert simple <= alpha_lower(p0, p1, e0, beta) + 1e-9

    def test_ratio_degenerates_at_ball_edge(self):
        # radius almost touching P1: projection ~ P1, ratio vector ~ all-ones
        p0 = Distribution([0.10, 0.12, 0.18, 0.20, 0.22, 0.18])
        p1 = Distribution([0.16, 0.14, 0.15, 0.19, 0.17, 0.19])
        e0 = (1.0 - 1e-6) * kl_divergence(p1, p0)
        sol = solve_tilt_radius(p0, p1, e0)
        assert np.abs(sol.distribution.probs / p1.probs - 1.0).max() <= 1e-3
        beta = 0.7
        s = sol.multiplier
        eta_beta = s / (1.0 - s * (1.0 - beta))
        simple = alpha_lower_simplified(p0, p1, e0, beta)
        assert simple == pytest.approx(beta * eta_beta, rel=1e-3)


class TestAlphaUpper:
    def test_binary_reference_value(self):
        assert alpha_upper(P0, P1, E0) == pytest.approx(14.19, abs=0.01)

    def test_closed_form_reconstruction(self):
        # multiplier recovered through the hyperplane solver instead of the
        # internal dual maximization; golden-section placement noise at the
        # flat maximum limits agreement to ~1e-5 here
        point = optimal_tradeoff(P0, P1, E0)
        lam = 1.0 - solve_tilt_hyperplane(P0, P1, point.gamma).multiplier
        kappa = np.sqrt(point.E1 / (lam * (4.0 + lam)))
        pmin = float(P1.probs.min())
        expected = lam * (4.0 + lam) * (1.0 + kappa) / pmin**2
        assert alpha_upper(P0, P1, E0) == pytest.approx(expected, abs=1e-4)

    def test_min_mass_factor_isolation(self):
        # halving the smallest P1 mass with lam and kappa held fixed must
        # quadruple the bound; only the (min mass)^-2 factor moves
        point = optimal_tradeoff(P0, P1, E0)
        lam = 1.0 - solve_tilt_hyperplane(P0, P1, point.gamma).multiplier
        kappa = np.sqrt(point.E1 / (lam * (4.0 + lam)))
        predicted = lam * (4.0 + lam) * (1.0 + kappa) / 0.2**2
        assert predicted >= 4.0 * alpha_upper(P0, P1, E0) - 1e-4
        assert predicted == pytest.approx(4.0 * alpha_upper(P0, P1, E0), rel=1e-4)

    def test_tiny_radius_stays_finite(self):
        value = alpha_upper(P0, P1, 1e-9)
        assert np.isfinite(value) and value > 0.0

    def test_radius_beyond_alternative_rejected(self):
        with pytest.raises(DomainError, match="strictly below"):
            alpha_upper(P0, P1, 2.0 * kl_divergence(P1, P0))


class TestHessianMatrix:
    def test_centered_annihilates_null_direction(self):
        rng = np.random.default_rng(11)
        checked = 0
        while checked < 12:
            dim = int(rng.integers(3, 7))
            p0 = random_distribution(rng, dim)
            p1 = random_distribution(rng, dim)
            gap = kl_divergence(p1, p0)
            if gap < 1e-3:
                continue
            H = hessian_matrix(p0, p1, 0.3 * gap, 0.7, centered=True)
            null = np.sqrt(p1.probs)
            assert np.abs(H.entries @ null).max() <= 1e-9
            checked += 1

    def test_centered_vanishes_on_binary(self):
        H = hessian_matrix(P0, P1, E0, 1.0, centered=True)
        assert np.abs(H.entries).max() <= 1e-12


class TestJacobiEigenvalues:
    def test_identity_and_diagonal(self):
        assert min_eigen_symmetric(np.eye(3)) == pytest.approx(1.0, abs=1e-12)
        assert min_eigen_symmetric(np.diag([-2.0, 5.0])) == pytest.approx(-2.0, abs=1e-12)
        assert jacobi_eigenvalues(np.array([[3.5]]))[0] == pytest.approx(3.5, abs=0.0)

    def test_min_eigen_matches_det_bisection(self):
        rng = np.random.default_rng(77)
        for _ in range(10):
            g = rng.normal(size=(5, 5))
            m = 0.5 * (g + g.T)
            assert min_eigen_symmetric(m) == pytest.approx(
                self._det_bisection_min_eig(m), abs=1e-9)

    @staticmethod
    def _det_bisection_min_eig(m):
        # scan up from a Gershgorin lower bound for the first sign change of
        # det(m - tI), then bisect; eigenvalues of a Gaussian draw are simple
        dim = m.shape[0]
        radii = np.abs(m).sum(axis=1) - np.abs(np.diag(m))
        lo = float((np.diag(m) - radii).min()) - 1.0
        hi = float((np.diag(m) + radii).max()) + 1.0
        grid = np.linspace(lo, hi, 4001)
        dets = [float(np.linalg.det(m - t * np.eye(dim))) for t in grid]
        k = next(i for i in range(1, len(dets)) if np.sign(dets[i]) != np.sign(dets[0]))
        a, b = grid[k - 1], grid[k]
        fa = dets[k - 1]
        for _ in range(200):
            mid = 0.5 * (a + b)
            fm = float(np.linalg.det(m - mid * np.eye(dim)))
            if np.sign(fm) == np.sign(fa):
                a, fa = mid, fm
            else:
                b = mid
        return 0.5 * (a + b)

    def test_trace_and_frobenius_reconstruction(self):
        rng = np.random.default_rng(13)
        for dim in range(2, 7):
            g = rng.normal(size=(dim, dim))
            m = 0.5 * (g + g.T)
            eigs = jacobi_eigenvalues(m)
            scale = max(1.0, float(np.abs(m).max()))
            assert abs(eigs.sum() - np.trace(m)) <= 1e-9 * scale
            assert abs((eigs**2).sum() - (m**2).sum()) <= 1e-9 * scale**2

    def test_tiny_offdiagonal_no_overflow(self):
        m = np.diag([0.0, 1.0, 2.0])
        m[0, 1] = m[1, 0] = 1e-300
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            eigs = jacobi_eigenvalues(m)
        assert np.allclose(eigs, [0.0, 1.0, 2.0], atol=1e-12)

    def test_asymmetric_rejected(self):
        with pytest.raises(DomainError, match="not symmetric"):
            min_eigen_symmetric(np.array([[1.0, 2.0], [0.5, 1.0]]))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DomainError, match="shape does not match"):
            SymmetricMatrix(2, np.eye(3))


class TestAlphaBounds:
    def test_binary_pair_consistent(self):
        ab = alpha_bounds(P0, P1, E0)
        assert ab.lower <= ab.upper + 1e-9
        assert ab.lower_simplified is None

    def test_six_letter_reports_simplified(self):
        rng = np.random.default_rng(5)
        p0, p1, e0 = six_letter_pair(rng)
        ab = alpha_bounds(p0, p1, e0, beta=0.8)
        assert ab.lower_simplified is not None
        assert ab.lower_simplified == alpha_lower_simplified(p0, p1, e0, 0.8)
        assert ab.lower_simplified <= ab.lower + 1e-9
        assert ab.lower <= ab.upper + 1e-9
