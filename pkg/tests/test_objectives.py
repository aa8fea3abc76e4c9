import itertools
import math

import numpy as np
import pytest

from conftest import brute_force_multilinear, random_coverage, random_monotone_submodular
from drsub.adversarial import stationary_trap_instance, stationary_trap_sets, frank_wolfe_trap_instance
from drsub.errors import CapabilityError, DiagnosticError, InputError
from drsub.objectives import (
    CallableSetFunction,
    Coverage,
    FunctionObjective,
    ListFamily,
    RatingsFamily,
    RatingsMatrix,
    all_masks,
    check_dr_crossderiv,
    check_submodular_bruteforce,
    concave_over_modular,
    coverage_from_sets,
    estimate_gamma,
    facility_location,
    modular,
    multilinear_eval_exact,
    multilinear_eval_sampled,
    multilinear_grad_estimate,
    multilinear_grad_exact,
    multilinear_objective,
    smoothness_bound_l1,
    stochastic_objective,
)


# --- set functions -----------------------------------------------------------


def test_coverage_counts_union():
    f = coverage_from_sets(stationary_trap_sets(2), 5)
    assert f([0]) == 2
    assert f([]) == 0
    assert f(range(5)) == 5
    assert f([0, 1]) == 3


def test_coverage_rejects_out_of_range_element():
    with pytest.raises(InputError):
        coverage_from_sets([[0, 7]], 5)


def test_coverage_agrees_with_python_sets(rng):
    subsets = [set(np.flatnonzero(rng.random(9) < 0.4).tolist()) for _ in range(7)]
    f = coverage_from_sets(subsets, 9)
    for mask in all_masks(7):
        union = set().union(*(subsets[i] for i in np.flatnonzero(mask)))
        assert f.value(mask) == len(union)


def test_coverage_table_matches_values(rng):
    f = random_coverage(rng, 8)
    np.testing.assert_array_equal(f.table(), f.values(all_masks(8)))


def test_facility_location_examples():
    assert facility_location(np.array([[5.0, 3.0]]))([1]) == 3
    f = facility_location(np.array([[5.0, 0.0], [0.0, 4.0]]))
    assert f([0, 1]) == pytest.approx(4.5)
    assert f([]) == 0


def test_concave_over_modular_examples():
    f = concave_over_modular(np.array([[4.0, 9.0]]), power=0.5)
    assert f([0, 1]) == pytest.approx(math.sqrt(13))
    assert f([]) == 0
    R = np.array([[1.0, 2.0, 3.0], [0.0, 5.0, 1.0]])
    lin = concave_over_modular(R, power=1.0)
    assert lin([0, 2]) == pytest.approx(R[:, [0, 2]].sum(axis=1).mean())


@pytest.mark.parametrize("power", [0.0, -1.0, 1.5])
def test_concave_over_modular_rejects_bad_power(power):
    with pytest.raises(InputError):
        concave_over_modular(np.ones((2, 2)), power=power)


@pytest.mark.parametrize("kind", ["facility", "concave"])
def test_ratings_family_gains_match_differences(rng, kind):
    R = rng.integers(0, 6, size=(6, 7)).astype(float)
    fam = RatingsFamily(RatingsMatrix(R), kind, 0.5)
    masks = rng.random((5, 7)) < 0.5
    idx = rng.integers(6, size=5)
    g = fam.gains_for(idx, masks)
    for r in range(5):
        f = fam.member(int(idx[r]))
        for i in range(7):
            up, down = masks[r].copy(), masks[r].copy()
            up[i], down[i] = True, False
            assert g[r, i] == pytest.approx(f.value(up) - f.value(down))


def test_ratings_matrix_from_entries():
    R = RatingsMatrix.from_entries([(0, 1, 4.0), (2, 0, 3.0)])
    assert (R.n_users, R.n_items) == (3, 2)
    assert R.ratings[0, 1] == 4.0 and R.ratings[1].sum() == 0


def test_table_refused_above_cap():
    f = modular(np.ones(26))
    with pytest.raises(CapabilityError):
        f.table()


def test_list_family_dimension_mismatch():
    with pytest.raises(InputError):
        ListFamily([modular([1.0, 2.0]), modular([1.0])])


# --- multilinear extension ---------------------------------------------------


def test_multilinear_agrees_on_vertices(rng):
    f = random_coverage(rng, 6)
    for mask in all_masks(6):
        assert multilinear_eval_exact(f, mask.astype(float)) == pytest.approx(f.value(mask), abs=1e-12)


def test_multilinear_matches_brute_force_sum(rng):
    for _ in range(5):
        f = random_monotone_submodular(rng, 6)
        x = rng.random(6)
        assert multilinear_eval_exact(f, x) == pytest.approx(brute_force_multilinear(f, x), abs=1e-10)


def test_multilinear_examples():
    inst = stationary_trap_instance(2)
    assert multilinear_eval_exact(inst.f, inst.x_loc) == 3.0
    card = CallableSetFunction(2, len)
    assert multilinear_eval_exact(card, [0.5, 0.5]) == pytest.approx(1.0)


def test_multilinear_refused_above_cap():
    with pytest.raises(CapabilityError):
        multilinear_eval_exact(modular(np.ones(26)), np.full(26, 0.5))


def test_grad_exact_examples():
    inst = stationary_trap_instance(2)
    np.testing.assert_array_equal(multilinear_grad_exact(inst.f, inst.x_loc), [1, 1, 1, 1, 0])
    w = np.array([0.3, 2.0, 1.1])
    np.testing.assert_allclose(multilinear_grad_exact(modular(w), [0.2, 0.9, 0.4]), w)


def test_grad_exact_matches_finite_differences(rng):
    f = random_monotone_submodular(rng, 7)
    x = rng.uniform(0.1, 0.9, 7)
    g = multilinear_grad_exact(f, x)
    h = 1e-4
    for i in range(7):
        e = np.zeros(7)
        e[i] = h
        fd = (multilinear_eval_exact(f, x + e) - multilinear_eval_exact(f, x - e)) / (2 * h)
        assert g[i] == pytest.approx(fd, abs=1e-6)


def test_sampled_value_degenerate_points(rng):
    f = random_coverage(rng, 5)
    assert multilinear_eval_sampled(f, np.ones(5), 7, rng) == f(range(5))
    assert multilinear_eval_sampled(f, np.zeros(5), 7, rng) == 0.0


def test_sampled_value_and_gradient_on_coverage_counterexample(rng):
    inst = stationary_trap_instance(2)
    assert multilinear_eval_sampled(inst.f, inst.x_loc, 100_000, rng) == pytest.approx(3.0, abs=0.05)
    # x_loc is integral so sampling is degenerate; shake it to make the check non-trivial
    x = np.clip(inst.x_loc + rng.uniform(-0.1, 0.1, 5), 0, 1)
    est = multilinear_grad_estimate(inst.f, x, 100_000, rng)
    np.testing.assert_allclose(est, multilinear_grad_exact(inst.f, x), atol=0.05)


def test_grad_estimate_deterministic_for_modular(rng):
    w = np.array([1.0, 0.5, 2.5, 0.0])
    np.testing.assert_allclose(multilinear_grad_estimate(modular(w), rng.random(4), 1, rng), w)


def test_grad_estimate_at_all_ones_is_marginal_gain(rng):
    f = random_coverage(rng, 6)
    full = f(range(6))
    expected = [full - f([j for j in range(6) if j != i]) for i in range(6)]
    np.testing.assert_allclose(multilinear_grad_estimate(f, np.ones(6), 3, rng), expected)


def test_stochastic_objective_single_member_matches_extension(rng):
    f = random_coverage(rng, 6)
    F = stochastic_objective([f])
    x = rng.random(6)
    assert F.value(x) == pytest.approx(multilinear_eval_exact(f, x))
    np.testing.assert_allclose(F.grad_exact(x), multilinear_grad_exact(f, x))
    twice = stochastic_objective([f, f])
    assert twice.value(x) == pytest.approx(F.value(x))


def test_stochastic_objective_frank_wolfe_trap_gradient_at_origin():
    inst = frank_wolfe_trap_instance(11)
    g = inst.objective.grad_exact(np.zeros(11))
    np.testing.assert_allclose(g[:10], 0.1)
    assert g[10] == pytest.approx(0.5)


def test_stochastic_objective_weights(rng):
    a, b = modular([1.0, 0.0]), modular([0.0, 1.0])
    F = stochastic_objective([a, b], weights=[0.25, 0.75])
    np.testing.assert_allclose(F.grad_exact([0.3, 0.3]), [0.25, 0.75])
    draws = np.mean([F.grad_sample(np.array([0.3, 0.3]), rng) for _ in range(20_000)], axis=0)
    np.testing.assert_allclose(draws, [0.25, 0.75], atol=0.02)
    with pytest.raises(InputError):
        stochastic_objective([a, b], weights=[0.5, 0.6])


def test_sample_cost_is_n_times_batch():
    F = multilinear_objective(modular(np.ones(9)), batch_size=4)
    assert F.sample_cost == 36


# --- structural verifiers ------------------------------------------------------


def test_bruteforce_submodularity_examples(rng):
    assert check_submodular_bruteforce(random_coverage(rng, 6), monotone=True)
    assert check_submodular_bruteforce(modular([1.0, 2.0, 0.5]))
    assert not check_submodular_bruteforce(CallableSetFunction(3, lambda S: len(S) ** 2))


def test_bruteforce_detects_non_monotone():
    # cut function of a single edge
    f = CallableSetFunction(2, lambda S: 1.0 if len(S) == 1 else 0.0)
    assert check_submodular_bruteforce(f)
    assert not check_submodular_bruteforce(f, monotone=True)


def test_bruteforce_refuses_large_n_without_samples(rng):
    f = random_coverage(rng, 14)
    with pytest.raises(CapabilityError):
        check_submodular_bruteforce(f)
    assert check_submodular_bruteforce(f, samples=500, rng=rng)


def test_dr_crossderiv_examples(rng):
    F = multilinear_objective(random_coverage(rng, 5))
    assert check_dr_crossderiv(F, rng.uniform(0.1, 0.9, 5))
    sq = FunctionObjective(3, lambda x: float(np.sum(x)) ** 2)
    assert not check_dr_crossderiv(sq, np.full(3, 0.5))
    assert check_dr_crossderiv(multilinear_objective(modular([1.0, 2.0])), [0.5, 0.5])


def test_dr_crossderiv_margin_error():
    F = multilinear_objective(modular([1.0, 2.0]))
    with pytest.raises(InputError):
        check_dr_crossderiv(F, [0.0, 0.5])


def test_gamma_examples(rng):
    F = multilinear_objective(random_coverage(rng, 6))
    assert estimate_gamma(F, 50, rng) == pytest.approx(1.0, abs=1e-9)
    assert estimate_gamma(multilinear_objective(modular([1.0, 3.0])), 10, rng) == pytest.approx(1.0)
    # gradient 2^x doubles across the box, so the worst ratio is 1/2 at (0, 1)
    doubling = FunctionObjective(
        1,
        lambda x: float((2.0 ** x[0] - 1) / math.log(2)),
        grad=lambda x: np.array([2.0 ** x[0]]),
    )
    assert estimate_gamma(doubling, 50, rng) == pytest.approx(0.5, abs=1e-12)


def test_gamma_without_positive_gradients():
    flat = FunctionObjective(2, lambda x: 0.0, grad=lambda x: np.zeros(2))
    with pytest.raises(DiagnosticError):
        estimate_gamma(flat, 5, np.random.default_rng(0))


def test_smoothness_bound_examples(rng):
    assert smoothness_bound_l1(stationary_trap_instance(2).f) == 3
    assert smoothness_bound_l1(modular([0.5, 4.0, 1.0])) == 4.0
    R = rng.integers(0, 6, size=(20, 8)).astype(float)
    assert smoothness_bound_l1(facility_location(RatingsMatrix(R, r_max=5.0))) <= 5
