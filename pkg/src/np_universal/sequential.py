"""Wald SPRT and the sequential plug-in classifier with growing thresholds."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from . import _backend
from .distributions import Distribution, RandomStream, sample_iid
from .errors import ConfigError, DomainError
from .special import clopper_pearson_upper

_SPRT_CHUNK = 4096
_DEFAULT_BUDGET_MULTIPLE = 50


def _default_delta(n: int) -> float:
    return float(n) ** -2


@dataclass(frozen=True)
class SequentialConfig:
    """Design block length n, training ratio alpha, and threshold penalty."""
    n: int
    alpha: Union[Fraction, int, str]
    penalty_coefficient: Optional[float] = None  # None -> 4|X| + 4 at run time
    penalty_enabled: bool = True
    delta_rule: Callable[[int], float] = _default_delta

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("design block length must be positive")
        frac = Fraction(self.alpha)
        if frac <= 0:
            raise ConfigError("training ratio must be positive")
        object.__setattr__(self, "alpha", frac)
        if int(frac * self.n) < 1:
            raise ConfigError("alpha*n must reach at least one training sample")
        if self.penalty_coefficient is not None and self.penalty_coefficient < 0:
            raise ConfigError("penalty coefficient must be non-negative")

    def train_count(self, t: int) -> int:
        """Cumulative training symbols consumed by step t (floor schedule)."""
        return int(self.alpha * t)

    def penalty(self, alphabet_size: int) -> float:
        if not self.penalty_enabled:
            return 0.0
        if self.penalty_coefficient is None:
            return 4.0 * alphabet_size + 4.0
        return float(self.penalty_coefficient)


@dataclass(frozen=True)
class SequentialOutcome:
    decision: Optional[int]  # None when the budget ran out
    tau: int
    final_statistic: float
    exhausted: bool = False

    def __post_init__(self):
        if self.decision not in (0, 1, None):
            raise ConfigError("decision must be 0, 1 or None")
        if self.exhausted and self.decision is not None:
            raise ConfigError("an exhausted run carries no decision")


class IIDStream:
    """Pull-based i.i.d. symbol source backed by a seeded stream."""

    def __init__(self, dist: Distribution, stream: RandomStream):
        self._dist = dist
        self._stream = stream

    def next_symbols(self, count: int) -> np.ndarray:
        if count == 0:
            return np.empty(0, dtype=np.int64)
        return sample_iid(self._dist, count, self._stream).symbols


class ArraySource:
    """Replays a fixed symbol array; raises once the array is exhausted."""

    def __init__(self, symbols):
        self._symbols = np.asarray(symbols, dtype=np.int64)
        self._pos = 0

    def next_symbols(self, count: int) -> np.ndarray:
        if self._pos + count > self._symbols.shape[0]:
            raise DomainError("stream exhausted before the budget")
        out = self._symbols[self._pos:self._pos + count]
        self._pos += count
        return out


def sprt_run(stream0, P0: Distribution, P1: Distribution, gamma0: float,
             gamma1: float, budget: int = 1_000_000) -> SequentialOutcome:
    """Wald test: stop when the accumulated LLR leaves (-gamma1, gamma0).

    The gamma0 check applies first when both thresholds are crossed at once.
    """
    if gamma0 <= 0.0 or gamma1 <= 0.0:
        raise DomainError("thresholds must be positive")
    llr = np.log(P0.probs) - np.log(P1.probs)
    dim = P0.alphabet_size
    s = 0.0
    consumed = 0
    while consumed < budget:
        chunk = min(_SPRT_CHUNK, budget - consumed)
        syms = np.asarray(stream0.next_symbols(chunk), dtype=np.int64)
        if syms.size and (syms.min() < 0 or syms.max() >= dim):
            raise DomainError("symbol outside support")
        path = s + np.cumsum(llr[syms])
        hit0 = path >= gamma0
        hit1 = path <= -gamma1
        hit = hit0 | hit1
        if hit.any():
            i = int(np.argmax(hit))
            decision = 0 if hit0[i] else 1
            return SequentialOutcome(decision, consumed + i + 1, float(path[i]))
        s = float(path[-1])
        consumed += chunk
    return SequentialOutcome(None, budget, s, exhausted=True)


def seq_classifier_run(test_stream, train_stream, P0: Distribution,
                       cfg: SequentialConfig,
                       budget: Optional[int] = None) -> SequentialOutcome:
    """Scalar reference run of the sequential plug-in classifier.

    From t = n on, each step ingests one test symbol and the floor-schedule
    increment of training symbols, recomputes the perturbed training type, and
    compares the type-based statistic against both growing thresholds.
    """
    dim = P0.alphabet_size
    if budget is None:
        budget = _DEFAULT_BUDGET_MULTIPLE * cfg.n
    logp0 = np.log(P0.probs)
    c_pen = cfg.penalty(dim)
    delta = cfg.delta_rule(cfg.n)

    counts_x = np.zeros(dim, dtype=np.int64)
    counts_X = np.zeros(dim, dtype=np.int64)
    k_prev = 0
    stat = 0.0
    for t in range(1, budget + 1):
        sym = int(test_stream.next_symbols(1)[0])
        if not 0 <= sym < dim:
            raise DomainError("symbol outside support")
        counts_x[sym] += 1
        k_t = cfg.train_count(t)
        if k_t > k_prev:
            batch = np.asarray(train_stream.next_symbols(k_t - k_prev),
                               dtype=np.int64)
            if batch.min() < 0 or batch.max() >= dim:
                raise DomainError("symbol outside support")
            counts_X += np.bincount(batch, minlength=dim)
            k_prev = k_t
        if t < cfg.n:
            continue
        fX = counts_X / k_t
        tprime = (1.0 - delta) * fX + delta / dim
        logt = np.log(tprime)
        stat = float((counts_x * (logp0 - logt)).sum())
        pen = c_pen * np.log(t + 1.0)
        gamma0 = cfg.n * float((P0.probs * (logp0 - logt)).sum()) + pen
        with np.errstate(divide="ignore", invalid="ignore"):
            d_train = float(np.where(fX > 0, fX * (np.log(fX) - logp0), 0.0).sum())
        gamma1 = cfg.n * d_train + pen
        if stat >= gamma0:
            return SequentialOutcome(0, t, stat)
        if stat <= -gamma1:
            return SequentialOutcome(1, t, stat)
    return SequentialOutcome(None, budget, stat, exhausted=True)


def _run_trial_batch(p_truth, p0, p1_train, cfg: SequentialConfig, seed: int,
                     start: int, stop: int, budget: int):
    """Runs trials [start, stop) through the segment kernel; returns outcomes."""
    truth = Distribution(p_truth)
    null = Distribution(p0)
    train_dist = Distribution(p1_train)
    dim = null.alphabet_size
    logp0 = np.log(null.probs)
    c_pen = cfg.penalty(dim)
    delta = cfg.delta_rule(cfg.n)
    n = cfg.n

    # Segment layout is shared by every trial: lengths double from 2n.
    segments = []
    t0 = 0
    length = 2 * n
    while t0 < budget:
        length = min(length, budget - t0)
        t_grid = np.arange(t0 + 1, t0 + length + 1)
        k_vals = np.array([cfg.train_count(int(t)) for t in t_grid], dtype=np.int64)
        k_before = cfg.train_count(t0)
        take = np.diff(np.concatenate([[k_before], k_vals]))
        segments.append((t0, length, int(k_vals[-1] - k_before), take))
        t0 += length
        length *= 2

    decisions = np.full(stop - start, -1, dtype=np.int64)
    taus = np.zeros(stop - start, dtype=np.int64)
    stats = np.zeros(stop - start, dtype=np.float64)
    for row, trial in enumerate(range(start, stop)):
        test_stream = IIDStream(truth, RandomStream(seed, index=trial, role=0))
        train_stream = IIDStream(train_dist, RandomStream(seed, index=trial, role=1))
        counts_x = np.zeros(dim, dtype=np.int64)
        counts_X = np.zeros(dim, dtype=np.int64)
        for (t_start, length, k_need, take) in segments:
            test_syms = test_stream.next_symbols(length)
            train_syms = train_stream.next_symbols(k_need)
            stopped, decision, tau, stat = _backend.seq_segment(
                counts_x, counts_X, test_syms, train_syms, take,
                null.probs, logp0, n, delta, c_pen, t_start)
            if stopped:
                decisions[row] = decision
                taus[row] = tau
                stats[row] = stat
                break
        else:
            taus[row] = budget
            stats[row] = stat
    return decisions, taus, stats


@dataclass(frozen=True)
class SequentialResult:
    """Aggregate of seq_simulate: error rate, stopping-time stats, exponent."""
    hypothesis_label: int
    trials: int
    errors: int
    exhausted: int
    error_rate: float
    std_err: float
    censored: bool
    exponent: Optional[float]
    exponent_std_err: Optional[float]
    exponent_lower_bound: Optional[float]
    mean_tau: float
    mean_tau_over_n: float
    tau_quantiles: dict


def seq_simulate(P_truth: Distribution, hypothesis_label: int, P0: Distribution,
                 P1_for_training: Distribution, cfg: SequentialConfig,
                 trials: int, seed: int, budget: Optional[int] = None,
                 workers: int = 1) -> SequentialResult:
    """Monte Carlo over independent trials of the sequential classifier.

    The test stream draws from P_truth; training always draws from
    P1_for_training. Errors are decisions differing from hypothesis_label;
    exhausted trials are tallied separately and never coerced to a decision.
    """
    if trials < 1:
        raise ConfigError("trials must be positive")
    if hypothesis_label not in (0, 1):
        raise ConfigError("hypothesis label must be 0 or 1")
    if budget is None:
        budget = _DEFAULT_BUDGET_MULTIPLE * cfg.n

    spans = _split_range(trials, workers)
    args = [(tuple(P_truth.probs), tuple(P0.probs), tuple(P1_for_training.probs),
             cfg, seed, a, b, budget) for a, b in spans]
    if workers <= 1:
        parts = [_run_trial_batch(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_star_trial_batch, args))

    decisions = np.concatenate([p[0] for p in parts])
    taus = np.concatenate([p[1] for p in parts])

    exhausted = int((decisions == -1).sum())
    errors = int(((decisions != -1) & (decisions != hypothesis_label)).sum())
    rate = errors / trials
    se = float(np.sqrt(rate * (1.0 - rate) / trials))
    n = cfg.n
    if errors > 0:
        exponent = -np.log(rate) / n
        exponent_se = se / (rate * n)
        bound = None
        censored = False
    else:
        exponent = None
        exponent_se = None
        bound = -np.log(clopper_pearson_upper(0, trials)) / n
        censored = True
    qs = {f"q{int(100 * q)}": float(np.quantile(taus, q)) for q in (0.5, 0.9, 0.99)}
    return SequentialResult(
        hypothesis_label=hypothesis_label, trials=trials, errors=errors,
        exhausted=exhausted, error_rate=rate, std_err=se, censored=censored,
        exponent=None if exponent is None else float(exponent),
        exponent_std_err=None if exponent_se is None else float(exponent_se),
        exponent_lower_bound=None if bound is None else float(bound),
        mean_tau=float(taus.mean()), mean_tau_over_n=float(taus.mean() / n),
        tau_quantiles=qs)


def _star_trial_batch(args):
    return _run_trial_batch(*args)


def _split_range(total: int, parts: int):
    parts = max(1, min(parts, total))
    step = (total + parts - 1) // parts
    return [(i, min(i + step, total)) for i in range(0, total, step)]
