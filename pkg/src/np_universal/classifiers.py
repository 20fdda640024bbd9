"""Fixed-sample decision rules on types and an exact error-probability oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln

from . import _backend
from .distributions import Distribution, EmpiricalType, kl_divergence, perturb_type
from .errors import BudgetError, ConfigError, DomainError
from .exponents import optimal_tradeoff, threshold_gamma
from .special import chi2_quantile

_ENUM_BUDGET = 10_000_000
_SOLVE_ITERS = 200


def _default_delta(n: int) -> float:
    return float(n) ** -2


@dataclass(frozen=True)
class FixedClassifierConfig:
    """Parameters of the training-interpolated rule: weight beta, level E0, perturbation."""
    beta: float
    E0: float
    delta_rule: Callable[[int], float] = _default_delta

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise ConfigError("beta must lie in (0, 1]")
        if self.E0 <= 0.0:
            raise ConfigError("E0 must be positive")
        probe = self.delta_rule(1000)
        if not 0.0 < probe <= 1e-4:
            raise ConfigError("delta rule must satisfy delta in (0,1) with n*delta -> 0")


@dataclass(frozen=True)
class Decision:
    hypothesis: int
    statistic: float
    threshold: float

    def __post_init__(self):
        if self.hypothesis not in (0, 1):
            raise ConfigError("hypothesis must be 0 or 1")


@dataclass(frozen=True)
class ErrorPair:
    eps0: float
    eps1: float

    def __post_init__(self):
        if not (0.0 <= self.eps0 <= 1.0 and 0.0 <= self.eps1 <= 1.0):
            raise DomainError("error probabilities must lie in [0, 1]")


def lrt_decide(Tx: EmpiricalType, P0: Distribution, P1: Distribution,
               gamma: float) -> Decision:
    """Likelihood-ratio rule on the test type: decide 1 iff D(f||P0) - D(f||P1) >= gamma."""
    llr = np.log(P1.probs) - np.log(P0.probs)
    stat = float(_backend.lrt_statistics(Tx.frequencies()[None, :], llr)[0])
    return Decision(1 if stat >= gamma else 0, stat, gamma)


def glrt_decide(Tx: EmpiricalType, P0: Distribution, E0: float) -> Decision:
    """Null-only rule: decide 1 iff D(f||P0) > E0 (boundary counts as 0)."""
    stat = float(_backend.glrt_statistics(Tx.frequencies()[None, :],
                                          np.log(P0.probs))[0])
    return Decision(1 if stat > E0 else 0, stat, E0)


def interp_decide(Tx: EmpiricalType, TX: EmpiricalType, P0: Distribution,
                  cfg: FixedClassifierConfig) -> Decision:
    """Training-interpolated rule: decide 1 iff beta*D(f||T') - D(f||P0) <= gamma(E0, T').

    When the perturbed training type falls inside the E0 ball the threshold is
    undefined and the rule falls back to deciding 0.
    """
    tprime = perturb_type(TX, cfg.delta_rule(Tx.n))
    stat = float(_backend.interp_statistics(
        Tx.frequencies()[None, :], np.log(P0.probs), np.log(tprime.probs),
        cfg.beta)[0])
    if kl_divergence(tprime, P0) <= cfg.E0:
        return Decision(0, stat, float("-inf"))
    gamma = threshold_gamma(P0, tprime, cfg.E0, cfg.beta)
    return Decision(1 if stat <= gamma else 0, stat, gamma)


def gutman_decide(Tx: EmpiricalType, TX: EmpiricalType, alpha: float,
                  epsilon: float) -> Decision:
    """Gutman's rule: decide 1 iff GJS_alpha(fx, fX) <= chi2 quantile / (2n)."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError("epsilon must lie in (0, 1)")
    if Tx.alphabet_size != TX.alphabet_size:
        raise ConfigError("type alphabets differ")
    if int(round(alpha * Tx.n)) != TX.n:
        raise ConfigError("training length does not match alpha within rounding")
    stat = float(_backend.gjs_statistics(Tx.frequencies()[None, :],
                                         TX.frequencies(), alpha)[0])
    threshold = chi2_quantile(Tx.alphabet_size - 1, epsilon) / (2.0 * Tx.n)
    return Decision(1 if stat <= threshold else 0, stat, threshold)


def _interp_thresholds(P0: Distribution, tprime: np.ndarray, E0: float,
                       beta: float) -> tuple:
    """Vectorized threshold solve for per-row perturbed training types.

    Returns (gamma, valid) where invalid rows are those whose training type
    sits inside the E0 ball (fallback rows). Row-independent bisection, so the
    result does not depend on how rows are batched.
    """
    logp0 = np.log(P0.probs)
    logt = np.log(tprime)
    d_t_p0 = (tprime * (logt - logp0)).sum(axis=1)
    valid = d_t_p0 > E0

    lo = np.zeros(tprime.shape[0])
    hi = np.ones(tprime.shape[0])
    for _ in range(_SOLVE_ITERS):
        s = 0.5 * (lo + hi)
        raw = s[:, None] * logp0 + (1.0 - s[:, None]) * logt
        raw -= raw.max(axis=1, keepdims=True)
        dens = np.exp(raw)
        dens /= dens.sum(axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            ldens = np.log(dens)
            d_g_p0 = np.where(dens > 0, dens * (ldens - logp0), 0.0).sum(axis=1)
        # D(g(s)||P0) decreases in s; shrink toward the E0 level set
        too_far = d_g_p0 > E0
        lo = np.where(too_far, s, lo)
        hi = np.where(too_far, hi, s)
    s = 0.5 * (lo + hi)
    raw = s[:, None] * logp0 + (1.0 - s[:, None]) * logt
    raw -= raw.max(axis=1, keepdims=True)
    dens = np.exp(raw)
    dens /= dens.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        ldens = np.log(dens)
        d_g_t = np.where(dens > 0, dens * (ldens - logt), 0.0).sum(axis=1)
    gamma = beta * d_g_t - E0
    return gamma, valid


@dataclass(frozen=True)
class Rule:
    """A named decision rule bound to its parameters and reference distributions."""
    name: str
    uses_training: bool
    params: dict = field(repr=False)
    _scalar: Callable = field(repr=False)
    _batch: Callable = field(repr=False)

    def decide(self, Tx: EmpiricalType, TX: Optional[EmpiricalType] = None) -> Decision:
        if self.uses_training and TX is None:
            raise ConfigError(f"rule {self.name} needs a training type")
        return self._scalar(Tx, TX)

    def decide_batch(self, Tx_counts: np.ndarray,
                     TX_counts: Optional[np.ndarray] = None) -> np.ndarray:
        """Vector of decide-1 flags; Tx_counts is (m, A), TX_counts (A,) or (m, A)."""
        if self.uses_training and TX_counts is None:
            raise ConfigError(f"rule {self.name} needs training counts")
        return self._batch(np.asarray(Tx_counts, dtype=np.int64),
                           None if TX_counts is None
                           else np.asarray(TX_counts, dtype=np.int64))


_RULE_PARAM_KEYS = {
    "lrt": {"gamma", "e0"},
    "glrt": {"e0"},
    "interp": {"beta", "e0", "delta_rule"},
    "gutman": {"alpha", "epsilon"},
}


def make_rule(name: str, params: dict, P0: Distribution,
              P1: Optional[Distribution] = None) -> Rule:
    """Builds a Rule from its CLI name and parameter map."""
    if name not in _RULE_PARAM_KEYS:
        raise ConfigError(f"unknown rule name: {name}")
    unknown = set(params) - _RULE_PARAM_KEYS[name]
    if unknown:
        raise ConfigError(f"unknown parameters for rule {name}: {sorted(unknown)}")
    logp0 = np.log(P0.probs)

    if name == "lrt":
        if "gamma" in params:
            gamma = float(params["gamma"])
        elif "e0" in params:
            if P1 is None:
                raise ConfigError("lrt with e0 needs the alternative distribution")
            gamma = optimal_tradeoff(P0, P1, float(params["e0"])).gamma
        else:
            raise ConfigError("lrt needs gamma or e0")
        if P1 is None:
            raise ConfigError("lrt needs the alternative distribution")
        llr = np.log(P1.probs) - logp0

        def scalar(Tx, TX):
            return lrt_decide(Tx, P0, P1, gamma)

        def batch(Tx_counts, TX_counts):
            n = int(Tx_counts[0].sum())
            stats = _backend.lrt_statistics(Tx_counts / n, llr)
            return stats >= gamma

        return Rule(name, False, dict(params), scalar, batch)

    if name == "glrt":
        if "e0" not in params:
            raise ConfigError("glrt needs e0")
        e0 = float(params["e0"])

        def scalar(Tx, TX):
            return glrt_decide(Tx, P0, e0)

        def batch(Tx_counts, TX_counts):
            n = int(Tx_counts[0].sum())
            stats = _backend.glrt_statistics(Tx_counts / n, logp0)
            return stats > e0

        return Rule(name, False, dict(params), scalar, batch)

    if name == "interp":
        if "e0" not in params:
            raise ConfigError("interp needs e0")
        cfg = FixedClassifierConfig(
            beta=float(params.get("beta", 1.0)), E0=float(params["e0"]),
            delta_rule=params.get("delta_rule", _default_delta))

        def scalar(Tx, TX):
            return interp_decide(Tx, TX, P0, cfg)

        def batch(Tx_counts, TX_counts):
            n = int(Tx_counts[0].sum())
            delta = cfg.delta_rule(n)
            TX2 = np.atleast_2d(TX_counts)
            k = TX2.sum(axis=1, keepdims=True).astype(np.float64)
            tprime = (1.0 - delta) * (TX2 / k) + delta / TX2.shape[1]
            gamma, valid = _interp_thresholds(P0, tprime, cfg.E0, cfg.beta)
            stats = _backend.interp_statistics(Tx_counts / n, logp0,
                                               np.log(tprime), cfg.beta)
            return (stats <= gamma) & valid

        return Rule(name, True, dict(params), scalar, batch)

    # gutman
    if "alpha" not in params or "epsilon" not in params:
        raise ConfigError("gutman needs alpha and epsilon")
    g_alpha = float(params["alpha"])
    g_eps = float(params["epsilon"])
    if not 0.0 < g_eps < 1.0:
        raise DomainError("epsilon must lie in (0, 1)")

    def scalar(Tx, TX):
        return gutman_decide(Tx, TX, g_alpha, g_eps)

    def batch(Tx_counts, TX_counts):
        n = int(Tx_counts[0].sum())
        TX2 = np.atleast_2d(TX_counts)
        if int(round(g_alpha * n)) != int(TX2[0].sum()):
            raise ConfigError("training length does not match alpha within rounding")
        fX = TX2 / TX2.sum(axis=1, keepdims=True)
        stats = _backend.gjs_statistics(Tx_counts / n, fX, g_alpha)
        threshold = chi2_quantile(Tx_counts.shape[1] - 1, g_eps) / (2.0 * n)
        return stats <= threshold

    return Rule(name, True, dict(params), scalar, batch)


def compositions(total: int, parts: int) -> np.ndarray:
    """All length-`parts` nonnegative integer vectors summing to `total`.

    Colexicographic order: the last coordinate varies slowest, the first
    fastest; fixtures depend on this ordering.
    """
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    rows = []
    for last in range(total + 1):
        head = compositions(total - last, parts - 1)
        rows.append(np.hstack([head, np.full((head.shape[0], 1), last,
                                             dtype=np.int64)]))
    return np.vstack(rows)


def _log_type_masses(comps: np.ndarray, logp: np.ndarray) -> np.ndarray:
    n = int(comps[0].sum())
    return (gammaln(n + 1) - gammaln(comps + 1).sum(axis=1)
            + (comps * logp).sum(axis=1))


def _sorted_sum(values: np.ndarray) -> float:
    # descending-magnitude ordering, then exact (compensated) accumulation
    return math.fsum(np.sort(values)[::-1])


def exact_error_probs(rule: Rule, P0: Distribution, P1: Distribution,
                      n: int, k: int) -> ErrorPair:
    """Exact (eps0, eps1) of a type-based rule by enumerating type classes.

    eps0 sums P0-mass of decide-1 test types weighted by the P1-mass of each
    training type; eps1 mirrors it with decide-0 and P1 test mass. Rules that
    ignore training skip the outer enumeration entirely.
    """
    if P0.alphabet_size != P1.alphabet_size:
        raise DomainError("dimension mismatch")
    if n < 1:
        raise ConfigError("test length must be positive")
    dim = P0.alphabet_size
    count = math.comb(n + dim - 1, dim - 1) * math.comb(k + dim - 1, dim - 1)
    if count > _ENUM_BUDGET:
        raise BudgetError(f"composition budget exceeded: {count} type pairs")

    tx = compositions(n, dim)
    lm0 = _log_type_masses(tx, np.log(P0.probs))
    lm1 = _log_type_masses(tx, np.log(P1.probs))
    m0 = np.exp(lm0)
    m1 = np.exp(lm1)

    if not rule.uses_training:
        dec = rule.decide_batch(tx, None)
        return ErrorPair(min(1.0, _sorted_sum(m0[dec])),
                         min(1.0, _sorted_sum(m1[~dec])))

    if k < 1:
        raise ConfigError("training length must be positive for training-based rules")
    txx = compositions(k, dim)
    w = np.exp(_log_type_masses(txx, np.log(P1.probs)))
    terms0 = np.empty(txx.shape[0])
    terms1 = np.empty(txx.shape[0])
    for j in range(txx.shape[0]):
        dec = rule.decide_batch(tx, txx[j])
        terms0[j] = w[j] * _sorted_sum(m0[dec])
        terms1[j] = w[j] * _sorted_sum(m1[~dec])
    return ErrorPair(min(1.0, _sorted_sum(terms0)), min(1.0, _sorted_sum(terms1)))
