import itertools
import math

import numpy as np
import pytest

import causalkl as ck
from causalkl import (STAR, CapacityError, InterventionConfig,
                      InterventionScheme, ScopeError)

import oracles

ALL_SCHEMES = (InterventionScheme.INDEPENDENT, InterventionScheme.SUBSETS,
               InterventionScheme.ONE_FREE)


def _support_map(support):
    """{forced tuple: weight} with None marking free variables."""
    return {cfg.forced: float(w) for cfg, w in support.items()}


def test_scheme_from_name_roundtrip():
    assert InterventionScheme.from_name("ckl1") is InterventionScheme.INDEPENDENT
    assert InterventionScheme.from_name("ckl2") is InterventionScheme.SUBSETS
    assert InterventionScheme.from_name("ckl3") is InterventionScheme.ONE_FREE
    with pytest.raises(ValueError):
        InterventionScheme.from_name("ckl4")


def test_intervention_config_basics(truth):
    cfg = InterventionConfig.from_mapping(truth.variables, {"S": "F"})
    assert cfg.forced == (None, "F", None, None)
    assert cfg.free_indices() == (0, 2, 3)
    assert cfg.overrides(truth.variables) == {1: 1}


def test_intervention_config_errors(truth):
    with pytest.raises(ScopeError):
        InterventionConfig.from_mapping(truth.variables, {"Q": "T"})
    with pytest.raises(ValueError):
        InterventionConfig.from_mapping(truth.variables, {"M": "maybe"})


def test_support_sizes(truth):
    # Independent: three choices per variable (free, T, F). Subsets: the
    # benchmark joint is strictly positive, so every subset-value combo
    # survives. One-free: four choices of free variable, eight settings each.
    assert len(ck.intervention_support(ALL_SCHEMES[0], truth).configs) == 81
    assert len(ck.intervention_support(ALL_SCHEMES[1], truth).configs) == 81
    assert len(ck.intervention_support(ALL_SCHEMES[2], truth).configs) == 32


@pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=lambda s: s.value)
def test_support_weights_sum_to_one(truth, scheme):
    support = ck.intervention_support(scheme, truth)
    assert float(np.sum(support.weights)) == pytest.approx(1.0, abs=1e-9)
    assert np.all(support.weights > 0)


def test_support_matches_oracle(truth, meta_obj):
    names = oracles.names_of(meta_obj)
    for scheme in ALL_SCHEMES:
        expect = {}
        for cfg, pr in oracles.support(scheme.value, meta_obj):
            key = tuple(cfg.get(n) for n in names)
            expect[key] = expect.get(key, 0.0) + pr
        got = _support_map(ck.intervention_support(scheme, truth))
        assert set(got) == set(expect)
        for key, w in got.items():
            assert w == pytest.approx(expect[key], abs=1e-12)


def test_independent_scheme_single_forced_weight(truth):
    got = _support_map(
        ck.intervention_support(InterventionScheme.INDEPENDENT, truth))
    # force M=T, leave S, B, C free: (1/4) * (1/2)^3
    assert got[("T", None, None, None)] == 1.0 / 32.0


def test_star_mass(truth):
    independent = ck.intervention_support(InterventionScheme.INDEPENDENT, truth)
    one_free = ck.intervention_support(InterventionScheme.ONE_FREE, truth)
    for name in truth.dag.names:
        assert independent.free_probability(name) == 0.5
        assert one_free.free_probability(name) == pytest.approx(
            0.25, abs=1e-12)


def test_zero_mass_value_combinations_are_never_forced():
    # In the probe network P(G=T, P=T) = 0. The subset and one-free schemes
    # draw intervention values from the joint, so they never force that pair;
    # the independent scheme picks values blindly and does force it.
    probe = ck.positivity_probe_network()

    def forces_impossible(support):
        return any(cfg.forced[0] == "T" and cfg.forced[1] == "T"
                   for cfg in support.configs)

    assert forces_impossible(
        ck.intervention_support(InterventionScheme.INDEPENDENT, probe))
    assert not forces_impossible(
        ck.intervention_support(InterventionScheme.SUBSETS, probe))
    assert not forces_impossible(
        ck.intervention_support(InterventionScheme.ONE_FREE, probe))


# ------------------------------------------------------- intervened networks

def test_intervened_conditional_all_free_is_joint(truth):
    cfg = InterventionConfig.from_mapping(truth.variables, {})
    got = ck.intervened_conditional(truth, cfg)
    assert np.allclose(got.probs, ck.joint_distribution(truth).probs,
                       atol=1e-12)


def test_intervened_conditional_all_forced_is_point_mass(truth):
    cfg = InterventionConfig.from_mapping(
        truth.variables, {"M": "T", "S": "F", "B": "T", "C": "T"})
    got = ck.intervened_conditional(truth, cfg)
    assert float(got.probs[0, 1, 0, 0]) == 1.0
    assert float(got.probs.sum()) == pytest.approx(1.0, abs=1e-12)


def test_intervened_conditional_matches_oracle(truth, meta_obj):
    cfg = InterventionConfig.from_mapping(truth.variables, {"M": "T"})
    got = ck.intervened_conditional(truth, cfg)
    expect = oracles.joint(meta_obj, {"M": "T"})
    names = oracles.names_of(meta_obj)
    states = oracles.states_of(meta_obj)
    for assign, p in expect.items():
        idx = tuple(states[n].index(s) for n, s in zip(names, assign))
        assert float(got.probs[idx]) == pytest.approx(p, abs=1e-12)


# ------------------------------------------------------------ augmented joint

def test_augmented_scope_and_mass(truth):
    aug = ck.augmented_joint(InterventionScheme.INDEPENDENT, truth, truth)
    assert aug.names == ("M'", "S'", "B'", "C'", "M", "S", "B", "C")
    assert aug.scope[0].states == (STAR, "T", "F")
    assert float(aug.probs.sum()) == pytest.approx(1.0, abs=1e-9)


def test_augmented_joint_shifts_forced_marginal(truth):
    aug1 = ck.augmented_joint(InterventionScheme.INDEPENDENT, truth, truth)
    assert float(ck.marginal(aug1, ["M"]).probs[0]) == pytest.approx(
        0.7, abs=1e-12)
    aug2 = ck.augmented_joint(InterventionScheme.SUBSETS, truth, truth)
    assert float(ck.marginal(aug2, ["M"]).probs[0]) == pytest.approx(
        0.9, abs=1e-12)


def test_augmented_joint_conditioned_on_no_interventions(truth, suite):
    # Given every decision variable sits at its free state, the augmented
    # joint reduces to the model's own joint.
    _, mutations = suite
    by_name = {m.name: m for m in mutations}
    dag, _ = ck.apply_mutation(truth, by_name["rev.out.strong"])
    model = ck.project_parameters(ck.joint_distribution(truth), dag)
    aug = ck.augmented_joint(InterventionScheme.INDEPENDENT, truth, model)
    free = {f"{n}'": STAR for n in truth.dag.names}
    got = ck.conditional(aug, list(truth.dag.names), free)
    assert np.allclose(got.probs, ck.joint_distribution(model).probs,
                       atol=1e-12)


def test_one_free_parents_keep_observational_law(truth):
    # Condition the augmented joint on variable i being the one left free:
    # the distribution over its parents must equal the truth marginal.
    aug = ck.augmented_joint(InterventionScheme.ONE_FREE, truth, truth)
    for i, ps in enumerate(truth.dag.parent_sets):
        if not ps:
            continue
        name = truth.dag.names[i]
        parent_names = [truth.dag.names[p] for p in ps]
        got = ck.conditional(aug, parent_names, {f"{name}'": STAR})
        expect = ck.marginal(ck.joint_distribution(truth), parent_names)
        assert np.allclose(got.probs, expect.probs, atol=1e-10)


def test_subsets_scheme_forced_values_match_marginals(truth):
    # The values the subsets scheme forces are drawn from the observational
    # joint, so per variable the forced-value distribution is exactly the
    # observational marginal. This holds for every network.
    support = ck.intervention_support(InterventionScheme.SUBSETS, truth)
    jt = ck.joint_distribution(truth)
    for name in truth.dag.names:
        got = support.forced_value_distribution(name)
        expect = ck.marginal(jt, [name]).probs
        assert np.allclose(got, expect, atol=1e-12)


def test_subsets_scheme_preserves_single_parent_marginals(truth):
    # Arc surgery leaves a node's own mixture marginal intact as long as its
    # parents are never forced into an impossible combination of dependence:
    # with at most one parent there is no parent correlation to sever, so
    # M, S and B keep their observational marginals under the subsets scheme.
    aug = ck.augmented_joint(InterventionScheme.SUBSETS, truth, truth)
    jt = ck.joint_distribution(truth)
    for name in ("M", "S", "B"):
        got = ck.marginal(aug, [name])
        expect = ck.marginal(jt, [name])
        assert np.allclose(got.probs, expect.probs, atol=1e-10)


def test_subsets_scheme_shifts_collider_child_marginal(truth):
    # C has two parents whose correlation flows through M. Forcing a parent
    # subset severs that correlation, so C's mixture marginal moves a little:
    # the exact value is pinned here as a regression guard.
    aug = ck.augmented_joint(InterventionScheme.SUBSETS, truth, truth)
    got = float(ck.marginal(aug, ["C"]).probs[0])
    assert got == pytest.approx(0.635759375, abs=1e-9)
    assert abs(got - 0.635) > 5e-4


def test_augmentation_budget(truth):
    with pytest.raises(CapacityError):
        ck.augmented_joint(InterventionScheme.INDEPENDENT, truth, truth,
                           budget=100)
