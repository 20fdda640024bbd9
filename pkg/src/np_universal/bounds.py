"""Two-sided bounds on the critical training-to-test ratio.

The lower bound is the negated smallest eigenvalue of a curvature matrix
assembled at the KL-ball projection point; the upper bound is a closed form
in the optimal-tradeoff multiplier. A small cyclic-Jacobi eigensolver keeps
the module self-contained.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .distributions import Distribution
from .errors import DomainError
from .exponents import optimal_tradeoff, solve_tilt_radius

__all__ = [
    "SymmetricMatrix",
    "AlphaBounds",
    "hessian_matrix",
    "alpha_lower",
    "alpha_lower_simplified",
    "alpha_upper",
    "alpha_bounds",
    "min_eigen_symmetric",
    "jacobi_eigenvalues",
]

_SYMMETRY_TOL = 1e-12
_OFFDIAG_TARGET = 1e-13
_DEGENERATE_VAR = 1e-14


@dataclass(frozen=True)
class SymmetricMatrix:
    dim: int
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.float64)
        if m.shape != (self.dim, self.dim):
            raise DomainError("entries shape does not match dim")
        scale = max(1.0, float(np.abs(m).max()))
        if float(np.abs(m - m.T).max()) > _SYMMETRY_TOL * scale:
            raise DomainError("matrix is not symmetric within tolerance")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)


@dataclass(frozen=True)
class AlphaBounds:
    lower: float
    upper: float
    lower_simplified: Optional[float] = None


def _as_symmetric(M: Union[SymmetricMatrix, np.ndarray]) -> np.ndarray:
    if isinstance(M, SymmetricMatrix):
        return M.entries
    return SymmetricMatrix(int(np.asarray(M).shape[0]), np.asarray(M, dtype=np.float64)).entries


def jacobi_eigenvalues(M: Union[SymmetricMatrix, np.ndarray]) -> np.ndarray:
    """All eigenvalues by cyclic Jacobi rotations, ascending.

    Sweeps continue until the off-diagonal Frobenius mass drops below 1e-13
    (relative to the matrix scale), which a symmetric matrix always reaches.
    """
    a = _as_symmetric(M).copy()
    d = a.shape[0]
    if d == 1:
        return a[0, :1].copy()
    if d == 2:
        tr = a[0, 0] + a[1, 1]
        disc = np.sqrt(max((a[0, 0] - a[1, 1]) ** 2 / 4.0 + a[0, 1] ** 2, 0.0))
        return np.array([tr / 2.0 - disc, tr / 2.0 + disc])

    scale = max(1.0, float(np.abs(a).max()))
    for _ in range(100):  # sweeps; quadratic convergence ends this early
        off = np.sqrt(max(float((a**2).sum() - (np.diag(a) ** 2).sum()), 0.0))
        if off <= _OFFDIAG_TARGET * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(diff) > 1e150 * abs(2.0 * apq):
                    t = apq / diff  # tan ~ 1/(2 theta); forming theta would overflow
                else:
                    theta = diff / (2.0 * apq)
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta == 0.0:
                        t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(d)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a = 0.5 * (a + a.T)
    return np.sort(np.diag(a))


def min_eigen_symmetric(M: Union[SymmetricMatrix, np.ndarray]) -> float:
    """Smallest eigenvalue; closed form for dims 1-2, cyclic Jacobi above."""
    return float(jacobi_eigenvalues(M)[0])


def _tilt_quantities(P0: Distribution, P1: Distribution, E0: float, beta: float):
    if not 0.0 < beta <= 1.0:
        raise DomainError("beta must lie in (0,1]")
    sol = solve_tilt_radius(P0, P1, E0)
    s = sol.multiplier
    q = sol.distribution.probs
    eta1 = s
    eta_beta = s / (1.0 - s * (1.0 - beta))
    omega = beta * np.log(P1.probs / P0.probs) + (1.0 - beta) * np.log(q / P0.probs)
    lw = np.log(q / P0.probs)
    return q, eta1, eta_beta, omega, lw


def hessian_matrix(P0: Distribution, P1: Distribution, E0: float, beta: float,
                   centered: bool = False) -> SymmetricMatrix:
    """Curvature matrix whose negated smallest eigenvalue lower-bounds alpha*.

    Two assemblies are exposed. centered=True builds the structural form
    (v, w orthogonal to the all-ones direction after the sqrt-J conjugation;
    it annihilates sqrtJ^-1 * 1 and vanishes identically on binary
    alphabets). centered=False, the default used by alpha_lower, keeps the
    raw weighted vectors with second-moment normalization; this is the
    variant calibrated against the published curve for the binary example.
    """
    q, eta1, eta_beta, omega, lw = _tilt_quantities(P0, P1, E0, beta)

    var_omega = float(np.sum(q * omega**2) - np.sum(q * omega) ** 2)
    var_lw = float(np.sum(q * lw**2) - np.sum(q * lw) ** 2)
    if var_omega < _DEGENERATE_VAR or var_lw < _DEGENERATE_VAR:
        raise DomainError("degenerate pair")

    if centered:
        v = (q * omega - np.sum(q * omega) * q) / np.sqrt(var_omega)
        w = (q * lw - E0 * q) / np.sqrt(var_lw)
    else:
        v = q * omega / np.sqrt(float(np.sum(q * omega**2)))
        w = (q * lw - E0) / np.sqrt(float(np.sum(q * lw**2)))

    core = np.outer(q, q) + eta1 * np.outer(v, v) + (1.0 - eta1) * np.outer(w, w) - np.diag(q)
    sqrt_j = 1.0 / np.sqrt(P1.probs)
    h = beta * eta_beta * (sqrt_j[:, None] * core * sqrt_j[None, :])
    h = 0.5 * (h + h.T)
    return SymmetricMatrix(P1.alphabet_size, h)


def alpha_lower(P0: Distribution, P1: Distribution, E0: float, beta: float) -> float:
    """Eigenvalue lower bound on the critical training ratio."""
    H = hessian_matrix(P0, P1, E0, beta, centered=False)
    return max(-min_eigen_symmetric(H), 0.0)


def alpha_lower_simplified(P0: Distribution, P1: Distribution, E0: float, beta: float) -> float:
    """Third-largest-ratio relaxation of the eigenvalue bound; needs |X| >= 6."""
    if P1.alphabet_size < 6:
        raise DomainError("simplified bound requires |X| >= 6")
    q, _eta1, eta_beta, _omega, _lw = _tilt_quantities(P0, P1, E0, beta)
    ratio = np.sort(q / P1.probs)[::-1]
    return beta * eta_beta * float(ratio[2])


def alpha_upper(P0: Distribution, P1: Distribution, E0: float) -> float:
    """Closed-form upper bound on the critical training ratio at beta = 1."""
    point = optimal_tradeoff(P0, P1, E0)
    if point.E1 <= 0.0:
        raise DomainError("E0 must lie strictly below D(P1||P0)")

    lp0 = np.log(P0.probs)
    lp1 = np.log(P1.probs)
    gamma = point.gamma

    def dual(nu: float) -> float:
        z = np.exp(nu * lp0 + (1.0 - nu) * lp1)
        return -nu * gamma - float(np.log(z.sum()))

    # Golden-section maximization of the concave dual over [0,1].
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    lo, hi = 0.0, 1.0
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = dual(c), dual(d)
    for _ in range(200):
        if hi - lo <= 1e-13:
            break
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = dual(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = dual(d)
    nu_star = 0.5 * (lo + hi)

    # The dual optimum re-derives the tradeoff exponent; disagreement means
    # the multiplier recovery went wrong, so fail loudly.
    if abs(dual(nu_star) - point.E1) > max(1e-9, 1e-6 * point.E1):
        raise DomainError("dual value does not match the tradeoff exponent")

    lam = 1.0 - nu_star
    kappa = np.sqrt(point.E1 / (lam * (4.0 + lam)))
    pmin = float(P1.probs.min())
    return float(lam * (4.0 + lam) * (1.0 + kappa) / pmin**2)


def alpha_bounds(P0: Distribution, P1: Distribution, E0: float, beta: float = 1.0) -> AlphaBounds:
    lower = alpha_lower(P0, P1, E0, beta)
    upper = alpha_upper(P0, P1, E0)
    simplified = None
    if P1.alphabet_size >= 6:
        simplified = alpha_lower_simplified(P0, P1, E0, beta)
    return AlphaBounds(lower, upper, simplified)
