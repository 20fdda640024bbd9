"""Tilted-family solvers, classifier thresholds, and error-exponent calculators.

All multiplier solves are reparameterized to s in [0,1] via s = mu/(1+mu),
which keeps the bracket finite as the ball radius shrinks. Bisection runs
with a 200-iteration cap and 1e-12 interval tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import Distribution, kl_divergence, renyi_divergence, tilted_geometric
from .errors import DomainError

__all__ = [
    "TiltSolution",
    "TradeoffPoint",
    "solve_tilt_radius",
    "solve_tilt_hyperplane",
    "threshold_gamma",
    "optimal_tradeoff",
    "mismatched_exponent",
    "worst_case_exponent",
    "alpha_star_numeric",
    "stein_exponents",
    "r_critical",
]

_BISECT_ITERS = 200
_BISECT_TOL = 1e-12


@dataclass(frozen=True)
class TiltSolution:
    """Solved projection onto a KL ball or hyperplane.

    multiplier is the s = mu/(1+mu) reparameterization of the Lagrange
    multiplier, distribution the projection point, value the achieved
    divergence (which one depends on the solve; see each solver).
    """

    multiplier: float
    distribution: Distribution
    value: float


@dataclass(frozen=True)
class TradeoffPoint:
    E0: float
    E1: float
    gamma: float

    def __post_init__(self):
        if self.E0 < 0 or self.E1 < 0:
            raise DomainError("exponents must be non-negative")


def _bisect(f, lo: float, hi: float) -> float:
    """Root of a monotone bracketed function; assumes sign(f(lo)) != sign(f(hi))."""
    flo = f(lo)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if f(mid) * flo > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _BISECT_TOL:
            break
    return 0.5 * (lo + hi)


def solve_tilt_radius(P0: Distribution, Q1: Distribution, E0: float) -> TiltSolution:
    """Project the KL ball {D(Q||P0) <= E0} toward Q1 along the geometric path.

    Returns the path point with D(Q||P0) = E0; value is D(Q||Q1), the
    minimum of D(.||Q1) over the ball.
    """
    if E0 <= 0.0:
        raise DomainError("ball radius must be positive")
    d10 = kl_divergence(Q1, P0)
    if E0 >= d10:
        raise DomainError("ball contains alternative")

    def residual(s: float) -> float:
        return kl_divergence(tilted_geometric(P0, Q1, s), P0) - E0

    # residual(0) = D(Q1||P0) - E0 > 0, residual(1) = -E0 < 0, monotone down.
    s_star = _bisect(residual, 0.0, 1.0)
    Q = tilted_geometric(P0, Q1, s_star)
    return TiltSolution(s_star, Q, kl_divergence(Q, Q1))


def solve_tilt_hyperplane(P0: Distribution, P1: Distribution, gamma: float) -> TiltSolution:
    """Path point where D(Q||P0) - D(Q||P1) = gamma; value is D(Q||P0)."""
    lo_g = -kl_divergence(P0, P1)
    hi_g = kl_divergence(P1, P0)
    if not lo_g <= gamma <= hi_g:
        raise DomainError("threshold outside achievable band")

    def residual(s: float) -> float:
        Q = tilted_geometric(P0, P1, s)
        return kl_divergence(Q, P0) - kl_divergence(Q, P1) - gamma

    # residual decreases from hi_g - gamma >= 0 at s=0 to lo_g - gamma <= 0 at s=1.
    s_star = _bisect(residual, 0.0, 1.0)
    Q = tilted_geometric(P0, P1, s_star)
    return TiltSolution(s_star, Q, kl_divergence(Q, P0))


def threshold_gamma(P0: Distribution, Q1: Distribution, E0: float, beta: float) -> float:
    """Classifier threshold beta * min_{D(Q||P0)<=E0} D(Q||Q1) - E0."""
    if not 0.0 < beta <= 1.0:
        raise DomainError("beta must lie in (0,1]")
    sol = solve_tilt_radius(P0, Q1, E0)
    return beta * sol.value - E0


def optimal_tradeoff(P0: Distribution, P1: Distribution, E0: float) -> TradeoffPoint:
    """Best type-II exponent at type-I exponent E0, with the matching LRT threshold."""
    if E0 < 0.0:
        raise DomainError("E0 must be non-negative")
    d10 = kl_divergence(P1, P0)
    if E0 >= d10:
        return TradeoffPoint(E0, 0.0, E0)
    if E0 == 0.0:
        e1 = kl_divergence(P0, P1)
        return TradeoffPoint(0.0, e1, -e1)
    sol = solve_tilt_radius(P0, P1, E0)
    e1 = kl_divergence(sol.distribution, P1)
    return TradeoffPoint(E0, e1, E0 - e1)


def _kkt_family_log(P0: Distribution, P1: Distribution, Q1: Distribution,
                    beta: float, etas: np.ndarray) -> np.ndarray:
    """Log-densities of the constrained-minimization family, one row per eta.

    hat-Q_eta is proportional to (P1 * P0^eta * Q1^(-eta*beta))^(1/(1+eta-eta*beta));
    for beta <= 1 and eta >= 0 the outer exponent stays positive.
    """
    lp0 = np.log(P0.probs)
    lp1 = np.log(P1.probs)
    lq1 = np.log(Q1.probs)
    e = etas[:, None]
    raw = (lp1 + e * lp0 - e * beta * lq1) / (1.0 + e - e * beta)
    m = raw.max(axis=1, keepdims=True)
    lse = m + np.log(np.exp(raw - m).sum(axis=1, keepdims=True))
    return raw - lse


def _constraint_and_objective(P0, P1, Q1, beta, gamma, etas):
    """For each eta: (beta*D(Q||Q1) - D(Q||P0) - gamma, D(Q||P1))."""
    logq = _kkt_family_log(P0, P1, Q1, beta, np.asarray(etas, dtype=np.float64))
    with np.errstate(invalid="ignore"):
        q = np.exp(logq)
        # q -> 0 entries contribute 0 in the q*log(q/..) limit
        d_p0 = np.sum(np.where(q > 0, q * (logq - np.log(P0.probs)), 0.0), axis=1)
        d_q1 = np.sum(np.where(q > 0, q * (logq - np.log(Q1.probs)), 0.0), axis=1)
        d_p1 = np.sum(np.where(q > 0, q * (logq - np.log(P1.probs)), 0.0), axis=1)
    return beta * d_q1 - d_p0 - gamma, d_p1


def mismatched_exponent(P0: Distribution, P1: Distribution, Q1: Distribution,
                        E0: float, beta: float) -> float:
    """Type-II exponent of the training-based classifier when the training type is Q1.

    Minimizes D(Q||P1) subject to beta*D(Q||Q1) - D(Q||P0) >= gamma(E0,Q1),
    solved on the one-multiplier KKT family with a sweep plus local bisection.
    """
    gamma = threshold_gamma(P0, Q1, E0, beta)
    fallback = kl_divergence(solve_tilt_radius(P0, Q1, E0).distribution, P1)
    return _mismatched_at_gamma(P0, P1, Q1, beta, gamma, fallback)


def _mismatched_extended(P0: Distribution, P1: Distribution, Q1: Distribution,
                         E0: float, beta: float) -> float:
    """mismatched_exponent extended to training types inside the E0 ball.

    The ball minimum of D(.||Q1) is 0 when Q1 sits inside, so the threshold
    degenerates to -E0 and the exponent stays well defined. The worst-case
    and critical-ratio scans need this extension; the public operation keeps
    its documented precondition instead.
    """
    if kl_divergence(Q1, P0) > E0:
        return mismatched_exponent(P0, P1, Q1, E0, beta)
    return _mismatched_at_gamma(P0, P1, Q1, beta, -E0, kl_divergence(Q1, P1))


def _mismatched_at_gamma(P0: Distribution, P1: Distribution, Q1: Distribution,
                         beta: float, gamma: float, fallback: float) -> float:
    slack_p1 = beta * kl_divergence(P1, Q1) - kl_divergence(P1, P0) - gamma
    if slack_p1 >= 0.0:
        return 0.0

    # Multiplier sweep: the constraint residual starts negative at eta=0
    # (P1 infeasible, just checked) and crosses zero along the family.
    etas = np.concatenate([[0.0], np.logspace(-6.0, 6.0, 1000)])
    resid, d_p1 = _constraint_and_objective(P0, P1, Q1, beta, gamma, etas)

    feasible = resid >= 0.0
    best = np.inf
    if np.any(feasible):
        best = float(d_p1[feasible].min())

    crossings = np.nonzero(np.diff(np.signbit(resid)))[0]
    for idx in crossings[:4]:
        lo, hi = float(etas[idx]), float(etas[idx + 1])
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            r_mid, _ = _constraint_and_objective(P0, P1, Q1, beta, gamma, [mid])
            if np.signbit(r_mid[0]) == np.signbit(resid[idx]):
                lo = mid
            else:
                hi = mid
            if hi - lo <= _BISECT_TOL * max(1.0, hi):
                break
        r_fin, d_fin = _constraint_and_objective(P0, P1, Q1, beta, gamma, [hi])
        if r_fin[0] >= -1e-11:
            best = min(best, float(d_fin[0]))

    if not np.isfinite(best):
        # The ball projection point always satisfies the constraint with
        # equality, so fall back to it rather than failing.
        best = fallback
    return max(best, 0.0)


def r_critical(P1: Distribution) -> float:
    """KL distance from P1 to the nearest zero-coordinate face of the simplex."""
    return float(-np.log1p(-float(P1.probs.min())))


def _ball_interval_binary(P1: Distribution, r: float) -> tuple:
    """Endpoints (on the first coordinate) of {q : D(q||P1) <= r} for |X|=2."""
    p = float(P1.probs[0])

    def d(q):
        return kl_divergence(np.array([q, 1.0 - q]), P1)

    lo = _bisect(lambda q: d(q) - r, 1e-15, p) if d(1e-15) > r else 1e-15
    hi = _bisect(lambda q: d(q) - r, p, 1.0 - 1e-15) if d(1.0 - 1e-15) > r else 1.0 - 1e-15
    return lo, hi


def _simplex_grid(dim: int, resolution: int) -> np.ndarray:
    """Strictly positive compositions k/resolution with k_i >= 1, colex order."""
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            if remaining >= 1:
                out.append(prefix + [remaining])
            return
        for k in range(1, remaining - (slots - 1) + 1):
            rec(prefix + [k], remaining - k, slots - 1)

    rec([], resolution, dim)
    return np.array(out, dtype=np.float64) / resolution


def worst_case_exponent(P0: Distribution, P1: Distribution, E0: float, beta: float,
                        r: float, grid_resolution: int = 200) -> float:
    """Worst type-II exponent over training types within KL radius r of P1."""
    if r < 0.0:
        raise DomainError("radius must be non-negative")
    rc = r_critical(P1)
    if r >= rc:
        raise DomainError("radius reaches simplex boundary")
    if r == 0.0:
        return optimal_tradeoff(P0, P1, E0).E1

    dim = P1.alphabet_size
    if dim == 2:
        lo, hi = _ball_interval_binary(P1, r)
        qs = np.linspace(lo, hi, max(grid_resolution, 3))
        vals = [_mismatched_extended(P0, P1, Distribution([q, 1 - q]), E0, beta) for q in qs]
        i = int(np.argmin(vals))
        a = qs[max(i - 1, 0)]
        b = qs[min(i + 1, len(qs) - 1)]
        refined = np.linspace(a, b, max(grid_resolution // 4, 5))
        vals += [_mismatched_extended(P0, P1, Distribution([q, 1 - q]), E0, beta) for q in refined]
        return float(min(vals))

    pts = _simplex_grid(dim, grid_resolution)
    dists = np.array([kl_divergence(pt, P1) for pt in pts])
    inside = pts[dists <= r]
    best = optimal_tradeoff(P0, P1, E0).E1  # Q1 = P1 is always inside
    best_pt = P1.probs
    for pt in inside:
        val = _mismatched_extended(P0, P1, Distribution(pt), E0, beta)
        if val < best:
            best, best_pt = val, pt
    # Local refinement: walk from the best grid point toward its box corners.
    for _ in range(2):
        step = 1.0 / grid_resolution
        for direction in np.vstack([np.eye(dim), -np.eye(dim)]):
            cand = best_pt + step * (direction - direction.mean())
            if np.any(cand <= 0.0):
                continue
            cand = cand / cand.sum()
            if kl_divergence(cand, P1) > r:
                continue
            val = _mismatched_extended(P0, P1, Distribution(cand), E0, beta)
            if val < best:
                best, best_pt = val, cand
        grid_resolution *= 2
    return float(best)


def alpha_star_numeric(P0: Distribution, P1: Distribution, E0: float, beta: float,
                       grid_resolution: int = 200) -> float:
    """Numeric critical training ratio via the worst-case-exponent difference quotient.

    Scans a geometric r-grid (r_c*1e-6 .. r_c*(1-1e-3), 400 points); the
    per-radius ball minimization reuses one global evaluation grid since the
    balls are nested.
    """
    if P1.alphabet_size > 4:
        raise DomainError("infeasible alphabet size for the numeric grid (|X| <= 4)")
    d10 = kl_divergence(P1, P0)
    if not 0.0 < E0 < d10:
        raise DomainError("E0 must lie in (0, D(P1||P0))")

    e1_star = optimal_tradeoff(P0, P1, E0).E1
    rc = r_critical(P1)
    r_grid = rc * np.geomspace(1e-6, 1.0 - 1e-3, 400)

    dim = P1.alphabet_size
    if dim == 2:
        lo, hi = _ball_interval_binary(P1, float(r_grid[-1]))
        qs = np.unique(np.concatenate([
            np.linspace(lo, hi, max(grid_resolution, 64)),
            # extra resolution near P1 where small-r balls live
            float(P1.probs[0]) + (hi - float(P1.probs[0])) * np.geomspace(1e-7, 1, 64),
            float(P1.probs[0]) + (lo - float(P1.probs[0])) * np.geomspace(1e-7, 1, 64),
        ]))
        pts = np.stack([qs, 1.0 - qs], axis=1)
    else:
        pts = _simplex_grid(dim, min(grid_resolution, 40))

    dists = np.array([kl_divergence(pt, P1) for pt in pts])
    keep = dists <= float(r_grid[-1])
    pts, dists = pts[keep], dists[keep]
    vals = np.array([_mismatched_extended(P0, P1, Distribution(pt), E0, beta) for pt in pts])

    sup_term = 0.0
    for r in r_grid:
        inside = dists <= r
        if not np.any(inside):
            continue
        e1_r = min(e1_star, float(vals[inside].min()))
        sup_term = max(sup_term, (e1_star - e1_r) / float(r))
    return max(sup_term, e1_star / rc)


def stein_exponents(P0: Distribution, P1: Distribution, alpha: float) -> tuple:
    """(type-II, type-I) Stein-regime exponents of the training-based test."""
    if alpha <= 0.0:
        raise DomainError("training ratio must be positive")
    e1 = kl_divergence(P0, P1)
    e0 = renyi_divergence(alpha / (1.0 + alpha), P1, P0)
    return e1, e0
