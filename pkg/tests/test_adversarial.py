import numpy as np
import pytest

from drsub.adversarial import (
    stationary_trap_instance,
    stationary_trap_sets,
    frank_wolfe_trap_instance,
    brute_force_opt_grid,
    perturb_around_x_loc,
)
from drsub.errors import InputError
from drsub.objectives import check_submodular_bruteforce, multilinear_eval_exact
from drsub.solvers import StepSchedule, frank_wolfe, sga, stationarity_gap


def test_stationary_trap_sets_small():
    # 0-based: hub element is 4
    assert stationary_trap_sets(2) == [{0, 4}, {1, 4}, {2}, {3}, {0, 1, 4}]


def test_stationary_trap_k2_values():
    inst = stationary_trap_instance(2)
    assert inst.objective.value(inst.x_loc) == 3.0
    np.testing.assert_array_equal(inst.objective.grad_exact(inst.x_loc), [1, 1, 1, 1, 0])
    assert inst.opt == 4.0
    assert inst.objective.value(inst.x_loc) / inst.opt == pytest.approx(0.75)
    assert check_submodular_bruteforce(inst.f, monotone=True)


def test_stationary_trap_opt_matches_grid_search():
    inst = stationary_trap_instance(2)
    assert brute_force_opt_grid(inst.objective.value, inst.K, 0.25) == pytest.approx(inst.opt)


def test_stationary_trap_closed_form(rng):
    for k in (1, 2, 4):
        inst = stationary_trap_instance(k)
        for _ in range(20):
            x = rng.random(inst.n)
            assert inst.closed_form(x) == pytest.approx(multilinear_eval_exact(inst.f, x), abs=1e-9)
            np.testing.assert_allclose(inst.closed_form_grad(x), inst.objective.grad_exact(x), atol=1e-9)


def test_stationary_trap_local_maximum(rng):
    for k in (2, 5):
        inst = stationary_trap_instance(k)
        eps = min(0.5 / k, 0.1)
        for _ in range(200):
            y = perturb_around_x_loc(inst, eps, rng)
            assert inst.K.contains(y)
            assert inst.closed_form(y) <= k + 1 + 1e-9


def test_stationary_trap_errors():
    with pytest.raises(InputError):
        stationary_trap_instance(0)
    with pytest.raises(InputError):
        frank_wolfe_trap_instance(2)


def test_frank_wolfe_trap_values():
    inst = frank_wolfe_trap_instance(5)
    assert inst.value(inst.x_inf) == pytest.approx(0.25)
    assert inst.value(inst.x_star) == 0.5
    assert inst.predicted_ratio == 0.5
    assert frank_wolfe_trap_instance(3).predicted_ratio == 1.0
    for n in (4, 9, 20):
        b = frank_wolfe_trap_instance(n)
        assert b.value(b.x_star) == 0.5
        np.testing.assert_allclose(b.mean_gradient[:-1], 1 / (n - 1))


def test_frank_wolfe_trap_sga_succeeds_where_fw_fails(rng):
    inst = frank_wolfe_trap_instance(11)
    fw = np.mean([inst.value(frank_wolfe(inst.objective, inst.K, 2000, rng).final) for _ in range(5)])
    x = sga(inst.objective, inst.K, 2000, StepSchedule.inverse_sqrt(0.5), rng=rng).final
    assert fw / inst.opt == pytest.approx(0.2, abs=0.02)
    assert inst.value(x) >= 0.5 * inst.opt - 0.02
    assert stationarity_gap(inst.objective, inst.K, inst.x_star) == 0.0
