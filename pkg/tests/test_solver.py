import dataclasses

import numpy as np
import pytest

from swarmdefense import (
    ControlSchedule,
    OptimizationConfig,
    WeaponParams,
    build_rule,
    ensemble_objective,
    objective_gradient,
    optimize,
    rule_at,
    simulate_ensemble,
)

from conftest import desk_scenario


def random_control(cfg, rng, S=10, scale=0.5):
    u = scale * rng.normal(size=(S + 1, cfg.n_defenders, cfg.n))
    return ControlSchedule(cfg.t_f, u).projected(cfg.u_max)


def test_objective_zero_without_attacker_weapons(rng):
    cfg = desk_scenario("vbap", weapons=WeaponParams(lambda_d=2.0, sigma_d=2.0, lambda_a=0.0, sigma_a=2.0))
    ctrl = random_control(cfg, rng)
    rule = build_rule("trapezoid", 3, cfg.uncertain)
    assert ensemble_objective(ctrl, rule, cfg) == 0.0


def test_objective_m1_equals_nominal_scalar(cfg_vbap, rng):
    ctrl = random_control(cfg_vbap, rng)
    a = ensemble_objective(ctrl, build_rule("trapezoid", 1, cfg_vbap.uncertain), cfg_vbap)
    traj = simulate_ensemble(ctrl, rule_at(1.0, cfg_vbap.uncertain), cfg_vbap)
    assert a == 1.0 - traj.terminal_p0()[0]


def test_gradient_zero_without_any_weapons(cfg_vbap, rng):
    cfg = dataclasses.replace(
        cfg_vbap, weapons=WeaponParams(lambda_d=0.0, sigma_d=2.0, lambda_a=0.0, sigma_a=2.0)
    )
    ctrl = random_control(cfg, rng)
    grad, J = objective_gradient(ctrl, build_rule("trapezoid", 3, cfg.uncertain), cfg)
    assert J == 0.0 and np.all(grad == 0.0)


def test_gradient_is_weighted_sum_of_node_gradients(cfg_vbap, rng):
    ctrl = random_control(cfg_vbap, rng, S=6)
    rule = build_rule("trapezoid", 3, cfg_vbap.uncertain)
    grad, _ = objective_gradient(ctrl, rule, cfg_vbap)
    acc = np.zeros_like(grad)
    for theta, alpha in zip(rule.nodes, rule.weights):
        g_i, _ = objective_gradient(ctrl, rule_at(float(theta), cfg_vbap.uncertain), cfg_vbap)
        acc += alpha * g_i
    assert np.max(np.abs(grad - acc)) <= 1e-10 * max(1.0, np.max(np.abs(grad)))


def test_gradient_directional_fd(cfg_reynolds, rng):
    ctrl = random_control(cfg_reynolds, rng, S=6)
    rule = build_rule("trapezoid", 2, cfg_reynolds.uncertain)
    grad, _ = objective_gradient(ctrl, rule, cfg_reynolds)
    d = rng.normal(size=ctrl.u.shape)
    d /= np.linalg.norm(d)
    eps = 1e-5
    Jp = ensemble_objective(ControlSchedule(ctrl.t_f, ctrl.u + eps * d), rule, cfg_reynolds)
    Jm = ensemble_objective(ControlSchedule(ctrl.t_f, ctrl.u - eps * d), rule, cfg_reynolds)
    fd = (Jp - Jm) / (2 * eps)
    assert np.sum(grad * d) == pytest.approx(fd, rel=1e-4)


def test_optimize_trivial_scenario_converges_immediately():
    cfg = desk_scenario("vbap", weapons=WeaponParams(lambda_d=2.0, sigma_d=2.0, lambda_a=0.0, sigma_a=2.0))
    rule = build_rule("trapezoid", 3, cfg.uncertain)
    sol = optimize(cfg, rule, OptimizationConfig(max_iterations=10, knots=5))
    assert sol.convergence_flag == "converged"
    assert sol.iterations == 0
    assert sol.objective_value == 0.0


def test_optimize_descends_and_is_deterministic(cfg_vbap):
    rule = build_rule("trapezoid", 3, cfg_vbap.uncertain)
    opt = OptimizationConfig(max_iterations=5, knots=5, gradient_tolerance=1e-12)
    a = optimize(cfg_vbap, rule, opt, jobs=2)
    b = optimize(cfg_vbap, rule, opt, jobs=1)
    objectives = [row[1] for row in a.log]
    assert all(x >= y - 1e-15 for x, y in zip(objectives, objectives[1:]))
    assert a.objective_value < objectives[0]
    assert np.array_equal(a.control.u, b.control.u)
    assert a.log == b.log
    assert a.control.is_feasible(cfg_vbap.u_max)


def test_optimize_reports_iteration_cap(cfg_vbap):
    rule = build_rule("trapezoid", 2, cfg_vbap.uncertain)
    sol = optimize(cfg_vbap, rule, OptimizationConfig(max_iterations=1, knots=5, gradient_tolerance=1e-12))
    assert sol.convergence_flag in ("max_iterations", "stalled")
    assert sol.iterations <= 1


def test_solution_records_rule_metadata(cfg_vbap):
    rule = build_rule("gauss-legendre", 3, cfg_vbap.uncertain)
    sol = optimize(cfg_vbap, rule, OptimizationConfig(max_iterations=1, knots=5))
    assert sol.rule_scheme == "gauss-legendre"
    assert np.array_equal(sol.rule_nodes, rule.nodes)
    assert np.array_equal(sol.rule_weights, rule.weights)
    assert 0.0 <= sol.objective_value <= 1.0
