"""Small numeric helpers shared by the decision rules and the harness."""

from __future__ import annotations

import math

from scipy.special import betaincinv, gammaincc

from .errors import DomainError

_BISECT_ITERS = 200
_REL_TOL = 1e-12


def chi2_quantile(df: int, epsilon: float) -> float:
    """Inverse complementary CDF of the chi-squared law: x with P(X > x) = epsilon.

    Bisection on the regularized upper incomplete gamma, which is monotone
    decreasing in x.
    """
    if df < 1:
        raise DomainError("degrees of freedom must be positive")
    if not 0.0 < epsilon < 1.0:
        raise DomainError("tail probability must lie in (0, 1)")

    def tail(x: float) -> float:
        return float(gammaincc(0.5 * df, 0.5 * x))

    hi = 1.0
    while tail(hi) > epsilon:
        hi *= 2.0
        if hi > 1e300:
            raise DomainError("quantile bracket overflow")
    lo = 0.0
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if tail(mid) > epsilon:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _REL_TOL * max(hi, 1.0):
            break
    return 0.5 * (lo + hi)


def clopper_pearson_upper(errors: int, trials: int, confidence: float = 0.95) -> float:
    """One-sided upper confidence limit for a binomial proportion."""
    if trials < 1:
        raise DomainError("trials must be positive")
    if not 0 <= errors <= trials:
        raise DomainError("error count outside [0, trials]")
    if not 0.0 < confidence < 1.0:
        raise DomainError("confidence must lie in (0, 1)")
    if errors == trials:
        return 1.0
    if errors == 0:
        # closed form: solves (1 - p)^trials = 1 - confidence
        return 1.0 - (1.0 - confidence) ** (1.0 / trials)
    return float(betaincinv(errors + 1, trials - errors, confidence))


def log_multinomial(counts) -> float:
    """log of the multinomial coefficient n! / prod(counts!)."""
    n = int(sum(counts))
    out = math.lgamma(n + 1)
    for c in counts:
        out -= math.lgamma(int(c) + 1)
    return out
