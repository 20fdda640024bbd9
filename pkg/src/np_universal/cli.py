"""Command-line front-end: solvers, bounds, oracles and the experiment harness."""

from __future__ import annotations

import dataclasses
import json
import math
import os
import sys
from fractions import Fraction

import click

from .bounds import alpha_lower, alpha_lower_simplified, alpha_upper
from .classifiers import exact_error_probs, make_rule
from .distributions import Distribution
from .errors import ConfigError, DomainError
from .exponents import (alpha_star_numeric, mismatched_exponent,
                        optimal_tradeoff, stein_exponents, threshold_gamma)
from .sequential import SequentialConfig, seq_simulate
from .simulation import (CSV_HEADER, ExperimentConfig, RuleSeriesPoint, _fmt,
                         prefactor_diagnostic, result_to_csv,
                         run_alpha_sweep, run_fixed_experiment, sweep_to_csv)
from .special import clopper_pearson_upper

_EXAMPLE1 = {
    "p0": [0.3, 0.3, 0.4], "p1": [0.35, 0.35, 0.3], "alpha": "2",
    "e0": 0.005, "n_grid": [200, 400, 600, 800, 1000, 1200, 1500],
}
_EXAMPLE2 = {"p0": [0.3, 0.7], "p1": [0.4, 0.6], "e0": 0.005}
_EXAMPLE3 = {"p0": [0.45, 0.55], "p1": [0.55, 0.45], "alpha": "10",
             "n_grid": [100, 200, 300, 400, 500]}

_CONFIG_KEYS = {"p0", "p1", "alpha", "n_grid", "trials", "seed", "rules"}
_RULE_KEYS = {"name", "gamma", "e0", "beta", "alpha", "epsilon"}


def _parse_dist(text: str) -> Distribution:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad distribution literal: {text!r}") from exc
    return Distribution(values)


def _parse_fraction(text: str) -> Fraction:
    try:
        frac = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad ratio literal: {text!r}") from exc
    if frac <= 0:
        raise ConfigError("training ratio must be positive")
    return frac


def _resolve_seed(seed) -> int:
    if seed is not None:
        return int(seed)
    env = os.environ.get("NP_UNIVERSAL_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError("NP_UNIVERSAL_SEED must be an integer") from exc
    return 0


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _emit_json(obj, out) -> None:
    _emit(json.dumps(obj, sort_keys=True, indent=2) + "\n", out)


@click.group()
def cli():
    """Discrete-alphabet hypothesis-testing toolkit."""


@cli.command("exponents")
@click.option("--p0", required=True, help="null distribution, comma decimals")
@click.option("--p1", required=True, help="alternative distribution")
@click.option("--e0", type=float, default=None, help="type-I exponent target")
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--stein", is_flag=True, help="report Stein-regime exponents")
@click.option("--alpha", default=None, help="training ratio for --stein")
@click.option("--q1", default=None, help="training type for the mismatched exponent")
@click.option("--out", default=None, help="write JSON here instead of stdout")
def cmd_exponents(p0, p1, e0, beta, stein, alpha, q1, out):
    """Optimal tradeoff, Stein exponents and the mismatched-training exponent."""
    P0 = _parse_dist(p0)
    P1 = _parse_dist(p1)
    payload = {}
    if e0 is not None:
        point = optimal_tradeoff(P0, P1, e0)
        payload["tradeoff"] = {"E0": point.E0, "E1": point.E1,
                               "gamma": point.gamma}
    if stein:
        if alpha is None:
            raise ConfigError("--stein needs --alpha")
        e1_stein, e0_stein = stein_exponents(P0, P1, float(_parse_fraction(alpha)))
        payload["stein"] = {"type2": e1_stein, "type1": e0_stein}
    if q1 is not None:
        if e0 is None:
            raise ConfigError("--q1 needs --e0")
        payload["mismatched"] = mismatched_exponent(P0, P1, _parse_dist(q1),
                                                    e0, beta)
    if not payload:
        raise ConfigError("nothing to compute: pass --e0, --stein or --q1")
    _emit_json(payload, out)


@cli.command("threshold")
@click.option("--p0", required=True)
@click.option("--q1", required=True, help="training type")
@click.option("--e0", type=float, required=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--out", default=None)
def cmd_threshold(p0, q1, e0, beta, out):
    """Decision threshold gamma(E0, Q1) of the interpolated rule."""
    value = threshold_gamma(_parse_dist(p0), _parse_dist(q1), e0, beta)
    _emit_json({"gamma": value}, out)


@cli.command("bounds")
@click.option("--p0", required=True)
@click.option("--p1", required=True)
@click.option("--e0", type=float, required=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--numeric", is_flag=True,
              help="also run the numeric critical-ratio scan (|X| <= 4)")
@click.option("--out", default=None)
def cmd_bounds(p0, p1, e0, beta, numeric, out):
    """Lower/upper bounds on the critical training ratio."""
    P0 = _parse_dist(p0)
    P1 = _parse_dist(p1)
    payload = {"beta": beta, "lower": alpha_lower(P0, P1, e0, beta),
               "upper": alpha_upper(P0, P1, e0)}
    if P0.alphabet_size >= 6:
        payload["lower_simplified"] = alpha_lower_simplified(P0, P1, e0, beta)
    if numeric:
        payload["alpha_star_numeric"] = alpha_star_numeric(P0, P1, e0, beta)
    _emit_json(payload, out)


@cli.command("oracle")
@click.option("--rule", "rule_name", required=True,
              type=click.Choice(["lrt", "glrt", "interp", "gutman"]))
@click.option("--p0", required=True)
@click.option("--p1", required=True)
@click.option("--n", type=int, required=True)
@click.option("--k", type=int, default=0, show_default=True)
@click.option("--gamma", type=float, default=None)
@click.option("--e0", type=float, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--alpha", default=None)
@click.option("--epsilon", type=float, default=None)
@click.option("--out", default=None)
def cmd_oracle(rule_name, p0, p1, n, k, gamma, e0, beta, alpha, epsilon, out):
    """Exact error probabilities by type-class enumeration."""
    P0 = _parse_dist(p0)
    P1 = _parse_dist(p1)
    params = {}
    if gamma is not None:
        params["gamma"] = gamma
    if e0 is not None:
        params["e0"] = e0
    if beta is not None:
        params["beta"] = beta
    if alpha is not None:
        params["alpha"] = float(_parse_fraction(alpha))
    if epsilon is not None:
        params["epsilon"] = epsilon
    rule = make_rule(rule_name, params, P0, P1)
    pair = exact_error_probs(rule, P0, P1, n, k)
    _emit_json({"rule": rule_name, "n": n, "k": k,
                "eps0": pair.eps0, "eps1": pair.eps1}, out)


def _config_from_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for rule in raw.get("rules", []):
        bad = set(rule) - _RULE_KEYS
        if bad:
            raise ConfigError(f"unknown rule keys: {sorted(bad)}")
        if "name" not in rule:
            raise ConfigError("each rule needs a name")
    return raw


def _canonical_config(cfg: ExperimentConfig) -> dict:
    return {
        "p0": [float(v) for v in cfg.P0.probs],
        "p1": [float(v) for v in cfg.P1.probs],
        "alpha": str(cfg.alpha),
        "n_grid": list(cfg.n_grid),
        "trials": cfg.trials,
        "seed": cfg.master_seed,
        "rules": [dict({"name": name}, **params) for name, params in cfg.rules],
    }


def _experiment_config(raw: dict) -> ExperimentConfig:
    missing = {"p0", "p1", "alpha", "n_grid", "trials", "rules"} - set(raw)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    rules = []
    for rule in raw["rules"]:
        params = {key: val for key, val in rule.items() if key != "name"}
        rules.append((rule["name"], params))
    return ExperimentConfig(
        P0=Distribution(raw["p0"]), P1=Distribution(raw["p1"]),
        n_grid=tuple(int(v) for v in raw["n_grid"]),
        alpha=Fraction(str(raw["alpha"])), trials=int(raw["trials"]),
        rules=tuple(rules), master_seed=_resolve_seed(raw.get("seed")))


@cli.command("simulate-fixed")
@click.option("--config", "config_path", default=None,
              help="JSON config file; unknown keys are rejected")
@click.option("--p0", default=None)
@click.option("--p1", default=None)
@click.option("--alpha", default=None)
@click.option("--n", "n_grid", default=None, help="comma list of block lengths")
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--rules", default=None, help="comma list of rule names")
@click.option("--e0", type=float, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--epsilon", type=float, default=None)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--print-config", is_flag=True,
              help="echo the canonical config and exit without running")
@click.option("--out", default=None)
def cmd_simulate_fixed(config_path, p0, p1, alpha, n_grid, trials, seed, rules,
                       e0, beta, epsilon, workers, print_config, out):
    """Fixed-sample Monte Carlo over a block-length grid; CSV output."""
    if config_path is not None:
        raw = _config_from_file(config_path)
        if seed is not None:
            raw["seed"] = seed
    else:
        needed = {"--p0": p0, "--p1": p1, "--alpha": alpha, "--n": n_grid,
                  "--trials": trials, "--rules": rules}
        missing = [flag for flag, val in needed.items() if val is None]
        if missing:
            raise ConfigError(f"missing flags: {missing} (or use --config)")
        rule_list = []
        for name in rules.split(","):
            spec = {"name": name.strip()}
            if name.strip() in ("lrt", "glrt", "interp") and e0 is not None:
                spec["e0"] = e0
            if name.strip() == "interp" and beta is not None:
                spec["beta"] = beta
            if name.strip() == "gutman":
                spec["alpha"] = float(_parse_fraction(alpha))
                if epsilon is not None:
                    spec["epsilon"] = epsilon
            rule_list.append(spec)
        raw = {"p0": [float(v) for v in p0.split(",")],
               "p1": [float(v) for v in p1.split(",")],
               "alpha": alpha, "n_grid": [int(v) for v in n_grid.split(",")],
               "trials": trials, "seed": seed, "rules": rule_list}
    cfg = _experiment_config(raw)
    if print_config:
        _emit_json(_canonical_config(cfg), out)
        return
    result = run_fixed_experiment(cfg, workers=workers)
    _emit(result_to_csv(result), out)


@cli.command("simulate-seq")
@click.option("--p0", required=True)
@click.option("--p1", required=True)
@click.option("--alpha", required=True)
@click.option("--n", type=int, required=True)
@click.option("--trials", type=int, required=True)
@click.option("--seed", type=int, default=None)
@click.option("--penalty", type=click.Choice(["on", "off"]), default="on",
              show_default=True)
@click.option("--truth", type=click.Choice(["0", "1", "both"]), default="both",
              show_default=True)
@click.option("--budget-multiple", type=int, default=50, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", default=None)
def cmd_simulate_seq(p0, p1, alpha, n, trials, seed, penalty, truth,
                     budget_multiple, workers, out):
    """Sequential-classifier Monte Carlo; JSON output."""
    P0 = _parse_dist(p0)
    P1 = _parse_dist(p1)
    cfg = SequentialConfig(n=n, alpha=_parse_fraction(alpha),
                           penalty_enabled=(penalty == "on"))
    resolved = _resolve_seed(seed)
    budget = budget_multiple * n
    payload = {"config": {"p0": [float(v) for v in P0.probs],
                          "p1": [float(v) for v in P1.probs],
                          "alpha": str(cfg.alpha), "n": n, "trials": trials,
                          "seed": resolved, "penalty": penalty,
                          "budget": budget}}
    if truth in ("0", "both"):
        res = seq_simulate(P0, 0, P0, P1, cfg, trials, resolved,
                           budget=budget, workers=workers)
        payload["side0"] = dataclasses.asdict(res)
    if truth in ("1", "both"):
        res = seq_simulate(P1, 1, P0, P1, cfg, trials, resolved,
                           budget=budget, workers=workers)
        payload["side1"] = dataclasses.asdict(res)
    _emit_json(payload, out)


@cli.command("alpha-sweep")
@click.option("--p0", required=True)
@click.option("--p1", required=True)
@click.option("--e0", type=float, required=True)
@click.option("--betas", required=True, help="comma list, strictly increasing")
@click.option("--out", default=None)
def cmd_alpha_sweep(p0, p1, e0, betas, out):
    """Spectral lower bound on the critical ratio over a beta grid; CSV."""
    try:
        grid = [float(b) for b in betas.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad beta grid: {betas!r}") from exc
    rows = run_alpha_sweep(_parse_dist(p0), _parse_dist(p1), e0, grid)
    _emit(sweep_to_csv(rows), out)


def _figure_fixed(trials: int, seed: int, workers: int) -> str:
    ex = _EXAMPLE1
    cfg = ExperimentConfig(
        P0=Distribution(ex["p0"]), P1=Distribution(ex["p1"]),
        n_grid=tuple(ex["n_grid"]), alpha=Fraction(ex["alpha"]),
        trials=trials, master_seed=seed,
        rules=(("lrt", {"e0": ex["e0"]}), ("glrt", {"e0": ex["e0"]}),
               ("interp", {"beta": 1.0, "e0": ex["e0"]})))
    return result_to_csv(run_fixed_experiment(cfg, workers=workers))


def _figure_seq(trials: int, seed: int, workers: int, penalty: str) -> str:
    ex = _EXAMPLE3
    P0 = Distribution(ex["p0"])
    P1 = Distribution(ex["p1"])
    ratio = Fraction(ex["alpha"])
    e1_ref, e0_ref = stein_exponents(P0, P1, float(ratio))
    lines = [CSV_HEADER]
    for n in ex["n_grid"]:
        cfg = SequentialConfig(n=n, alpha=ratio,
                               penalty_enabled=(penalty == "on"))
        side0 = seq_simulate(P0, 0, P0, P1, cfg, trials, seed, workers=workers)
        side1 = seq_simulate(P1, 1, P0, P1, cfg, trials, seed, workers=workers)

        def eps_of(res):
            if res.censored:
                return clopper_pearson_upper(0, res.trials), 0.0, 1
            return res.error_rate, res.std_err, 0

        eps0, se0, cens0 = eps_of(side0)
        eps1, se1, cens1 = eps_of(side1)
        point = RuleSeriesPoint(
            rule="seq", n=n, k=int(ratio * n), trials=trials, eps0=eps0,
            eps1=eps1, se0=se0, se1=se1, exp0=-math.log(eps0) / n,
            exp1=-math.log(eps1) / n,
            prefac0=prefactor_diagnostic(eps0, n, e0_ref),
            prefac1=prefactor_diagnostic(eps1, n, e1_ref),
            censored0=cens0, censored1=cens1)
        lines.append(",".join(_fmt(v) for v in (
            point.rule, point.n, point.k, point.trials, point.eps0, point.eps1,
            point.se0, point.se1, point.exp0, point.exp1, point.prefac0,
            point.prefac1, point.censored0, point.censored1)))
    return "\n".join(lines) + "\n"


def _figure_sweep() -> str:
    ex = _EXAMPLE2
    grid = [round(0.01 * i, 2) for i in range(1, 101)]
    rows = run_alpha_sweep(Distribution(ex["p0"]), Distribution(ex["p1"]),
                           ex["e0"], grid)
    return sweep_to_csv(rows)


@cli.command("figure")
@click.argument("name", type=click.Choice(["fig2", "fig3", "fig5", "fig6"]))
@click.option("--trials", type=int, default=None,
              help="override the preset trial count")
@click.option("--seed", type=int, default=None)
@click.option("--penalty", type=click.Choice(["on", "off"]), default="off",
              show_default=True, help="sequential preset only")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", default=None)
def cmd_figure(name, trials, seed, penalty, workers, out):
    """Emit the full CSV behind a named reproduction preset."""
    resolved = _resolve_seed(seed)
    if name in ("fig2", "fig3"):
        text = _figure_fixed(trials or 1_000_000, resolved, workers)
    elif name == "fig5":
        text = _figure_seq(trials or 100_000, resolved, workers, penalty)
    else:
        text = _figure_sweep()
    _emit(text, out)


def dispatch(argv) -> int:
    """Runs the CLI on argv; returns 0 (ok), 2 (config) or 3 (numeric domain)."""
    try:
        cli.main(args=list(argv), prog_name="np-universal",
                 standalone_mode=False)
        return 0
    except SystemExit as exc:  # --help and friends
        code = exc.code or 0
        return int(code)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except click.ClickException as exc:
        print(f"config error: {exc.format_message()}", file=sys.stderr)
        return 2
    except click.exceptions.Abort:
        print("aborted", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
