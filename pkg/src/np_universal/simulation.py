"""Fixed-sample Monte Carlo harness with CSV reporting and censoring."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .classifiers import Rule, make_rule
from .distributions import Distribution, RandomStream, kl_divergence
from .errors import ConfigError, DomainError
from .exponents import optimal_tradeoff, solve_tilt_hyperplane
from .bounds import alpha_lower
from .special import clopper_pearson_upper

_TRIAL_CHUNK = 16384

CSV_HEADER = ("rule,n,k,trials,eps0,eps1,se0,se1,exp0,exp1,"
              "prefac0,prefac1,censored0,censored1")


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid of block lengths with a trial budget and a list of named rules."""
    P0: Distribution
    P1: Distribution
    n_grid: Tuple[int, ...]
    alpha: Union[Fraction, int, str]
    trials: int
    rules: Tuple[Tuple[str, dict], ...]
    master_seed: int

    def __post_init__(self):
        grid = tuple(int(v) for v in self.n_grid)
        if len(grid) == 0 or any(v < 1 for v in grid):
            raise ConfigError("n grid must hold positive lengths")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("grid must be increasing")
        object.__setattr__(self, "n_grid", grid)
        frac = Fraction(self.alpha)
        if frac <= 0:
            raise ConfigError("training ratio must be positive")
        object.__setattr__(self, "alpha", frac)
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ConfigError("master seed must fit in 64 bits")
        rules = tuple((str(name), dict(params)) for name, params in self.rules)
        if len(rules) == 0:
            raise ConfigError("at least one rule is required")
        object.__setattr__(self, "rules", rules)


@dataclass(frozen=True)
class RuleSeriesPoint:
    """One (rule, n) row of an experiment."""
    rule: str
    n: int
    k: int
    trials: int
    eps0: float
    eps1: float
    se0: float
    se1: float
    exp0: float
    exp1: float
    prefac0: float
    prefac1: float
    censored0: int
    censored1: int


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    points: Tuple[RuleSeriesPoint, ...]

    def rows_for(self, rule: str) -> List[RuleSeriesPoint]:
        return [p for p in self.points if p.rule == rule]


def prefactor_diagnostic(eps: float, n: int, E: float) -> float:
    """ln(eps) + n*E + 0.5*ln(n): zero when eps = n^(-1/2) e^(-nE)."""
    if eps <= 0.0:
        raise DomainError("prefactor diagnostic needs a positive error estimate")
    return math.log(eps) + n * E + 0.5 * math.log(n)


def _design_exponents(name: str, params: dict, P0: Distribution,
                      P1: Distribution) -> Optional[Tuple[float, float]]:
    """Design (E0, E1) pair used by the prefactor columns, if the rule has one."""
    if name in ("glrt", "interp") or (name == "lrt" and "e0" in params):
        e0 = float(params["e0"])
        return e0, optimal_tradeoff(P0, P1, e0).E1
    if name == "lrt" and "gamma" in params:
        sol = solve_tilt_hyperplane(P0, P1, float(params["gamma"]))
        q = sol.distribution
        return kl_divergence(q, P0), kl_divergence(q, P1)
    return None


def _tally_chunk(p0, p1, rule_specs, n, k, seed, n_index, start, stop):
    """Tallies decide-1/decide-0 errors for trials [start, stop)."""
    P0 = Distribution(p0)
    P1 = Distribution(p1)
    rules = [make_rule(name, params, P0, P1) for name, params in rule_specs]
    m = stop - start
    train = np.empty((m, P0.alphabet_size), dtype=np.int64)
    test0 = np.empty((m, P0.alphabet_size), dtype=np.int64)
    test1 = np.empty((m, P0.alphabet_size), dtype=np.int64)
    for row, trial in enumerate(range(start, stop)):
        g = RandomStream(seed, index=(n_index << 40) | trial, role=0).generator
        train[row] = g.multinomial(k, P1.probs)
        test0[row] = g.multinomial(n, P0.probs)
        test1[row] = g.multinomial(n, P1.probs)
    out = []
    for rule in rules:
        tx_arg = train if rule.uses_training else None
        err0 = int(rule.decide_batch(test0, tx_arg).sum())
        err1 = int((~rule.decide_batch(test1, tx_arg)).sum())
        out.append((err0, err1))
    return out


def _star_tally(args):
    return _tally_chunk(*args)


def run_fixed_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Common-random-number Monte Carlo over the (rule, n) grid.

    Each trial owns one derived stream and draws, in order, the training
    counts (P1), the null test counts (P0) and the alternative test counts
    (P1); every rule sees the same draws. The training length is k =
    round(alpha*n) (banker's rounding on exact halves). Work is split over
    fixed-size trial chunks, so tallies do not depend on the worker count.
    """
    # validate rule specs before any sampling
    for name, params in cfg.rules:
        make_rule(name, params, cfg.P0, cfg.P1)

    points = []
    for n_index, n in enumerate(cfg.n_grid):
        k = int(round(Fraction(cfg.alpha) * n))
        spans = [(s, min(s + _TRIAL_CHUNK, cfg.trials))
                 for s in range(0, cfg.trials, _TRIAL_CHUNK)]
        args = [(tuple(cfg.P0.probs), tuple(cfg.P1.probs), cfg.rules, n, k,
                 cfg.master_seed, n_index, a, b) for a, b in spans]
        if workers <= 1:
            parts = [_tally_chunk(*a) for a in args]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(_star_tally, args))
        for r_index, (name, params) in enumerate(cfg.rules):
            err0 = sum(p[r_index][0] for p in parts)
            err1 = sum(p[r_index][1] for p in parts)
            points.append(_make_point(name, params, cfg, n, k, err0, err1))
    return ExperimentResult(cfg, tuple(points))


def _make_point(name: str, params: dict, cfg: ExperimentConfig, n: int, k: int,
                err0: int, err1: int) -> RuleSeriesPoint:
    trials = cfg.trials
    design = _design_exponents(name, params, cfg.P0, cfg.P1)

    def side(err_count: int):
        rate = err_count / trials
        if err_count > 0:
            return rate, math.sqrt(rate * (1.0 - rate) / trials), -math.log(rate) / n, 0
        bound = clopper_pearson_upper(0, trials)
        return bound, 0.0, -math.log(bound) / n, 1

    eps0, se0, exp0, cens0 = side(err0)
    eps1, se1, exp1, cens1 = side(err1)
    if design is None:
        prefac0 = prefac1 = float("nan")
    else:
        prefac0 = prefactor_diagnostic(eps0, n, design[0])
        prefac1 = prefactor_diagnostic(eps1, n, design[1])
    return RuleSeriesPoint(rule=name, n=n, k=k, trials=trials, eps0=eps0,
                           eps1=eps1, se0=se0, se1=se1, exp0=exp0, exp1=exp1,
                           prefac0=prefac0, prefac1=prefac1, censored0=cens0,
                           censored1=cens1)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def result_to_csv(result: ExperimentResult) -> str:
    lines = [CSV_HEADER]
    for p in result.points:
        lines.append(",".join(_fmt(v) for v in (
            p.rule, p.n, p.k, p.trials, p.eps0, p.eps1, p.se0, p.se1,
            p.exp0, p.exp1, p.prefac0, p.prefac1, p.censored0, p.censored1)))
    return "\n".join(lines) + "\n"


def run_alpha_sweep(P0: Distribution, P1: Distribution, E0: float,
                    beta_grid: Sequence[float]) -> List[Tuple[float, float]]:
    """Tabulates the spectral lower bound on the critical training ratio."""
    grid = [float(b) for b in beta_grid]
    if len(grid) == 0:
        raise ConfigError("beta grid is empty")
    if any(b2 <= b1 for b1, b2 in zip(grid, grid[1:])):
        raise ConfigError("grid must be increasing")
    return [(b, alpha_lower(P0, P1, E0, b)) for b in grid]


def sweep_to_csv(rows: List[Tuple[float, float]]) -> str:
    lines = ["beta,alpha_lower"]
    for beta, val in rows:
        lines.append(f"{beta:.12g},{val:.12g}")
    return "\n".join(lines) + "\n"
