"""Fixed-sample Monte Carlo harness, prefactor diagnostics, CSV output."""

import math

import numpy as np
import pytest

from np_universal import (
    ConfigError,
    Distribution,
    DomainError,
    ExperimentConfig,
    clopper_pearson_upper,
    exact_error_probs,
    make_rule,
    optimal_tradeoff,
    prefactor_diagnostic,
    result_to_csv,
    run_alpha_sweep,
    run_fixed_experiment,
    sweep_to_csv,
)
from np_universal.simulation import CSV_HEADER

T0 = Distribution([0.3, 0.3, 0.4])
T1 = Distribution([0.35, 0.35, 0.3])
P0 = Distribution([0.3, 0.7])
P1 = Distribution([0.4, 0.6])

ALL_RULES = (
    ("lrt", {"gamma": 0.01}),
    ("glrt", {"e0": 0.02}),
    ("interp", {"beta": 0.8, "e0": 0.005}),
    ("gutman", {"alpha": 2.0, "epsilon": 0.1}),
)


def small_config(**overrides):
    base = dict(P0=T0, P1=T1, n_grid=(8,), alpha=2, trials=100,
                rules=ALL_RULES, master_seed=99)
    base.update(overrides)
    return ExperimentConfig(**base)


class TestExperimentConfig:
    def test_grid_must_hold_positive_lengths(self):
        with pytest.raises(ConfigError, match="positive lengths"):
            small_config(n_grid=())
        with pytest.raises(ConfigError, match="positive lengths"):
            small_config(n_grid=(0, 10))

    def test_grid_must_be_increasing(self):
        with pytest.raises(ConfigError, match="grid must be increasing"):
            small_config(n_grid=(100, 50))
        with pytest.raises(ConfigError, match="grid must be increasing"):
            small_config(n_grid=(50, 50))

    def test_ratio_positive(self):
        with pytest.raises(ConfigError, match="training ratio"):
            small_config(alpha=0)

    def test_trials_positive(self):
        with pytest.raises(ConfigError, match="trials"):
            small_config(trials=0)

    def test_seed_fits_64_bits(self):
        with pytest.raises(ConfigError, match="master seed"):
            small_config(master_seed=-1)
        with pytest.raises(ConfigError, match="master seed"):
            small_config(master_seed=2 ** 64)

    def test_rules_required(self):
        with pytest.raises(ConfigError, match="at least one rule"):
            small_config(rules=())


class TestRunFixedExperiment:
    def test_bad_rule_rejected_before_sampling(self):
        cfg = small_config(rules=(("oracle", {}),), trials=10 ** 9)
        with pytest.raises(ConfigError, match="unknown rule name"):
            run_fixed_experiment(cfg)

    def test_single_trial_constant_rule(self):
        # a level no ternary type can reach makes glrt decide 0 always; the
        # empty decide-1 tally is censored, the full decide-0 tally is exact
        cfg = small_config(n_grid=(6,), trials=1, rules=(("glrt", {"e0": 50.0}),))
        point = run_fixed_experiment(cfg).points[0]
        assert point.censored0 == 1
        assert point.eps0 == clopper_pearson_upper(0, 1)
        assert point.eps1 == 1.0
        assert point.censored1 == 0
        assert point.exp1 == pytest.approx(0.0, abs=0.0)

    def test_matches_enumeration_within_three_sigma(self):
        cfg = small_config(trials=20_000)
        result = run_fixed_experiment(cfg)
        for point, (name, params) in zip(result.points, ALL_RULES):
            assert point.rule == name
            rule = make_rule(name, params, T0, T1)
            exact = exact_error_probs(rule, T0, T1, point.n, point.k)
            assert abs(point.eps0 - exact.eps0) <= 3.0 * max(point.se0, 1e-9)
            assert abs(point.eps1 - exact.eps1) <= 3.0 * max(point.se1, 1e-9)

    def test_common_random_numbers_across_rules(self):
        # the same threshold reached through e0 or given directly must see
        # identical samples, hence identical tallies
        gamma = optimal_tradeoff(T0, T1, 0.005).gamma
        cfg = small_config(
            trials=5_000,
            rules=(("lrt", {"e0": 0.005}), ("lrt", {"gamma": gamma})))
        by_level, by_gamma = run_fixed_experiment(cfg).points
        assert by_level.eps0 == by_gamma.eps0
        assert by_level.eps1 == by_gamma.eps1
        assert by_level.se0 == by_gamma.se0
        assert by_level.se1 == by_gamma.se1
        assert by_level.prefac0 == pytest.approx(by_gamma.prefac0, abs=1e-8)

    def test_partition_independent_of_workers(self):
        cfg = small_config(n_grid=(50,), trials=40_000)
        serial = run_fixed_experiment(cfg, workers=1)
        pooled = run_fixed_experiment(cfg, workers=4)
        assert len(serial.points) == len(pooled.points)
        for one, many in zip(serial.points, pooled.points):
            for field in ("rule", "n", "k", "trials", "eps0", "eps1", "se0",
                          "se1", "exp0", "exp1", "prefac0", "prefac1",
                          "censored0", "censored1"):
                a, b = getattr(one, field), getattr(many, field)
                if isinstance(a, float) and math.isnan(a):
                    assert math.isnan(b)
                else:
                    assert a == b, field

    def test_exponents_biased_high_and_decreasing(self):
        cfg = small_config(
            n_grid=(200, 400), trials=20_000, master_seed=1234,
            rules=(("lrt", {"e0": 0.005}), ("interp", {"beta": 1.0, "e0": 0.005})))
        result = run_fixed_experiment(cfg, workers=4)
        for name in ("lrt", "interp"):
            rows = result.rows_for(name)
            assert len(rows) == 2
            assert rows[0].n == 200 and rows[1].n == 400
            assert rows[0].exp0 > rows[1].exp0 > 0.005
            assert rows[0].exp1 > rows[1].exp1

    def test_zero_error_side_reports_bound(self):
        cfg = small_config(n_grid=(30,), trials=60, rules=(("glrt", {"e0": 1.0}),),
                           master_seed=5)
        point = run_fixed_experiment(cfg).points[0]
        assert point.censored0 == 1
        assert point.se0 == 0.0
        assert point.eps0 == clopper_pearson_upper(0, 60)
        assert point.exp0 == pytest.approx(-math.log(point.eps0) / 30, abs=1e-15)


class TestPrefactorDiagnostic:
    def test_reference_decay_scores_zero(self):
        n, E = 400, 0.01
        eps = n ** -0.5 * math.exp(-n * E)
        assert prefactor_diagnostic(eps, n, E) == pytest.approx(0.0, abs=1e-12)

    def test_positive_estimate_required(self):
        with pytest.raises(DomainError, match="positive error estimate"):
            prefactor_diagnostic(0.0, 100, 0.01)

    def test_round_trip_at_reference_point(self):
        # invert the diagnostic at its published magnitude and recover it
        target = 3.65615
        eps = math.exp(target - 1500 * 0.005 - 0.5 * math.log(1500))
        assert prefactor_diagnostic(eps, 1500, 0.005) == pytest.approx(
            target, abs=1e-9)


class TestAlphaSweep:
    def test_reference_beta_grid(self):
        rows = run_alpha_sweep(P0, P1, 0.005, [0.25, 0.5, 0.75, 1.0])
        expected = (0.0064371, 0.0117359, 0.0164433, 0.0204974)
        for (beta, value), want in zip(rows, expected):
            assert value == pytest.approx(want, abs=1e-4)

    def test_single_point(self):
        rows = run_alpha_sweep(P0, P1, 0.005, [0.5])
        assert len(rows) == 1
        assert rows[0][0] == 0.5

    def test_reversed_grid_rejected(self):
        with pytest.raises(ConfigError, match="grid must be increasing"):
            run_alpha_sweep(P0, P1, 0.005, [1.0, 0.5])

    def test_empty_grid_rejected(self):
        with pytest.raises(ConfigError, match="beta grid is empty"):
            run_alpha_sweep(P0, P1, 0.005, [])

    def test_sweep_csv_shape(self):
        text = sweep_to_csv(run_alpha_sweep(P0, P1, 0.005, [0.5, 1.0]))
        lines = text.strip().split("\n")
        assert lines[0] == "beta,alpha_lower"
        assert len(lines) == 3
        beta, value = lines[1].split(",")
        assert float(beta) == 0.5
        assert float(value) > 0


class TestCsvOutput:
    def test_header_and_formatting(self):
        cfg = small_config(trials=500)
        result = run_fixed_experiment(cfg)
        text = result_to_csv(result)
        lines = text.strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert lines[0] == ("rule,n,k,trials,eps0,eps1,se0,se1,exp0,exp1,"
                            "prefac0,prefac1,censored0,censored1")
        assert len(lines) == 1 + len(result.points)
        first = lines[1].split(",")
        point = result.points[0]
        assert first[0] == point.rule
        assert first[1] == "8" and first[2] == "16" and first[3] == "500"
        assert first[4] == f"{point.eps0:.12g}"
        assert first[8] == f"{point.exp0:.12g}"

    def test_rules_without_design_levels_emit_nan(self):
        cfg = small_config(trials=200, rules=(("gutman", {"alpha": 2.0,
                                                          "epsilon": 0.1}),))
        line = result_to_csv(run_fixed_experiment(cfg)).strip().split("\n")[1]
        fields = line.split(",")
        assert fields[10] == "nan" and fields[11] == "nan"

    def test_trailing_newline(self):
        cfg = small_config(trials=100)
        assert result_to_csv(run_fixed_experiment(cfg)).endswith("\n")
