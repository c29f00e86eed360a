"""Divergences between discrete networks.

kl compares two joints cellwise. ckl averages KL between the two networks'
response distributions over a scheme of perfect interventions whose
distribution always comes from the truth side (both augmented models then
share the same intervention marginal, so only response terms remain). wed3
is the closed-form parent-set decomposition that reproduces the ONE_FREE
average times the variable count.

Conventions throughout: 0*ln(0/q) = 0 and p*ln(p/0) = infinity. Values are
in nats; presentation scaling and unit conversion live in the harness.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .augmentation import (InterventionScheme, intervened_conditional,
                           intervention_support)
from .errors import ScopeError
from .network import (DEFAULT_CELL_BUDGET, DiscreteNetwork, JointTable,
                      joint_distribution, marginal)


@dataclass(frozen=True)
class DivergenceValue:
    """A nonnegative divergence, possibly infinite.

    hit_zero_denominator is set exactly when the value is infinite (a model
    cell or row is zero where the truth side has mass). zero_mass_rows_used
    reports that a uniform-fallback CPT row of either network actually
    received positive evaluation weight.
    """

    value: float
    hit_zero_denominator: bool = False
    zero_mass_rows_used: bool = False

    def __post_init__(self):
        if math.isinf(self.value) != self.hit_zero_denominator:
            raise ValueError("infinite value iff a zero denominator was hit")
        if not math.isinf(self.value) and self.value < 0:
            raise ValueError("divergence must be nonnegative")

    def __float__(self) -> float:
        return self.value


def _clip(total: float) -> float:
    # tiny negative totals are float noise from nearly-identical inputs
    if total < 0:
        if total < -1e-9:
            raise AssertionError(f"negative divergence {total}")
        return 0.0
    return total


def kl(p: JointTable, q: JointTable) -> DivergenceValue:
    """Kullback-Leibler divergence between two joints on identical scopes."""
    if p.names != q.names:
        raise ScopeError("scopes differ or are ordered differently")
    for a, b in zip(p.scope, q.scope):
        if a.states != b.states:
            raise ScopeError(f"state lists for {a.name!r} disagree")
    mask = p.probs > 0
    if np.any(q.probs[mask] == 0):
        return DivergenceValue(math.inf, hit_zero_denominator=True)
    pv = p.probs[mask]
    total = float(np.sum(pv * np.log(pv / q.probs[mask])))
    return DivergenceValue(_clip(total))


def _fallback_lookup(net: DiscreteNetwork) -> dict[int, list[tuple[int, ...]]]:
    """Uniform-fallback rows as {variable index: [parent state tuples]}."""
    out: dict[int, list[tuple[int, ...]]] = {}
    for child_name, given in net.uniform_fallback_rows():
        i = net.dag.index(child_name)
        by_name = dict(given)
        ps = net.cpts[i].parent_order
        key = tuple(
            net.variables[p].index(by_name[net.dag.names[p]]) for p in ps
        )
        out.setdefault(i, []).append(key)
    return out


def _rows_touched(table: JointTable, var: int, rows: list[tuple[int, ...]],
                  parent_order: tuple[int, ...]) -> bool:
    """Whether any listed parent configuration has mass under the table."""
    if not rows:
        return False
    names = [table.names[p] for p in parent_order]
    if not names:
        return True  # a fallback root row is always in play
    sub = marginal(table, names)
    return any(float(sub.probs[row]) > 0 for row in rows)


def ckl(scheme: InterventionScheme, truth: DiscreteNetwork,
        model: DiscreteNetwork, *,
        budget: int = DEFAULT_CELL_BUDGET) -> DivergenceValue:
    """Intervention-averaged KL divergence.

    Sum over the scheme's configurations of P'(config) times the KL
    divergence between the truth and model response distributions under that
    configuration. Raw value: presentation scaling is applied by callers.
    """
    if truth.dag.names != model.dag.names:
        raise ScopeError("truth and model must share variables, in order")
    for a, b in zip(truth.variables, model.variables):
        if a.states != b.states:
            raise ScopeError(f"state lists for {a.name!r} disagree")
    support = intervention_support(scheme, truth, budget=budget)
    truth_rows = _fallback_lookup(truth)
    model_rows = _fallback_lookup(model)
    fallback_used = False
    total = 0.0
    for cfg, w in support.items():
        if w == 0.0:
            continue
        p1 = intervened_conditional(truth, cfg, cell_budget=budget)
        p2 = intervened_conditional(model, cfg, cell_budget=budget)
        if not fallback_used and (truth_rows or model_rows):
            free = set(cfg.free_indices())
            for net, rows_of in ((truth, truth_rows), (model, model_rows)):
                for var, rows in rows_of.items():
                    if var in free and _rows_touched(
                            p1, var, rows, net.cpts[var].parent_order):
                        fallback_used = True
        term = kl(p1, p2)
        if term.hit_zero_denominator:
            return DivergenceValue(math.inf, hit_zero_denominator=True,
                                   zero_mass_rows_used=fallback_used)
        total += float(w) * term.value
    return DivergenceValue(_clip(total), zero_mass_rows_used=fallback_used)


def ckl3(truth: DiscreteNetwork, model: DiscreteNetwork, *,
         budget: int = DEFAULT_CELL_BUDGET) -> DivergenceValue:
    """ckl under the ONE_FREE scheme (one variable free, the rest forced)."""
    return ckl(InterventionScheme.ONE_FREE, truth, model, budget=budget)


@dataclass(frozen=True)
class Wed3Term:
    """One variable's contribution to wed3, for inspection."""

    variable: str
    truth_parents: tuple[str, ...]
    model_parents: tuple[str, ...]
    weight_scope: tuple[str, ...]  # union of the two parent sets
    value: float


def wed3_decomposition(truth: DiscreteNetwork, model: DiscreteNetwork, *,
                       cell_budget: int = DEFAULT_CELL_BUDGET
                       ) -> tuple[list[Wed3Term], DivergenceValue]:
    """Per-variable terms of the parent-set weighted divergence.

    For each variable, truth's marginal over the union of both models'
    parent sets weighs the KL divergence between the two CPT rows selected
    by that parent assignment.
    """
    if truth.dag.names != model.dag.names:
        raise ScopeError("truth and model must share variables, in order")
    for a, b in zip(truth.variables, model.variables):
        if a.states != b.states:
            raise ScopeError(f"state lists for {a.name!r} disagree")
    names = truth.dag.names
    joint = joint_distribution(truth, cell_budget=cell_budget)
    model_rows = _fallback_lookup(model)
    truth_rows = _fallback_lookup(truth)

    terms = []
    total = 0.0
    infinite = False
    fallback_used = False
    for i, name in enumerate(names):
        ps1 = truth.cpts[i].parent_order
        ps2 = model.cpts[i].parent_order
        union = tuple(sorted(set(ps1) | set(ps2)))
        t1, t2 = truth.cpts[i].table, model.cpts[i].table
        value = 0.0
        if union:
            weights = marginal(joint, [names[u] for u in union]).probs
        else:
            weights = None
        for states in (np.ndindex(weights.shape) if union else [()]):
            w = float(weights[states]) if union else 1.0
            if w == 0.0:
                continue
            at = dict(zip(union, states))
            row1 = t1[tuple(at[p] for p in ps1)]
            row2 = t2[tuple(at[p] for p in ps2)]
            if not fallback_used:
                if i in model_rows and tuple(at[p] for p in ps2) in [
                        tuple(r) for r in model_rows[i]]:
                    fallback_used = True
                if i in truth_rows and tuple(at[p] for p in ps1) in [
                        tuple(r) for r in truth_rows[i]]:
                    fallback_used = True
            mask = row1 > 0
            if np.any(row2[mask] == 0):
                infinite = True
                value = math.inf
                break
            value += w * float(np.sum(row1[mask] *
                                      np.log(row1[mask] / row2[mask])))
        terms.append(Wed3Term(
            variable=name,
            truth_parents=tuple(names[p] for p in ps1),
            model_parents=tuple(names[p] for p in ps2),
            weight_scope=tuple(names[u] for u in union),
            value=value,
        ))
        if infinite:
            break
        total += value
    if infinite:
        dv = DivergenceValue(math.inf, hit_zero_denominator=True,
                             zero_mass_rows_used=fallback_used)
    else:
        dv = DivergenceValue(_clip(total), zero_mass_rows_used=fallback_used)
    return terms, dv


def wed3(truth: DiscreteNetwork, model: DiscreteNetwork, *,
         cell_budget: int = DEFAULT_CELL_BUDGET) -> DivergenceValue:
    """Parent-set weighted divergence; equals len(variables) times ckl3."""
    _, dv = wed3_decomposition(truth, model, cell_budget=cell_budget)
    return dv


def calibrate_log_base(values_in_nats, reference_values,
                       candidates=(math.e, 2.0), tolerance: float = 5e-4
                       ) -> float:
    """Pick the logarithm base under which computed divergences match
    reference values.

    values_in_nats and reference_values are parallel sequences; the first
    candidate base whose rescaled values all land within tolerance of the
    references wins. Raises if no candidate fits.
    """
    computed = np.asarray(list(values_in_nats), dtype=float)
    reference = np.asarray(list(reference_values), dtype=float)
    if computed.shape != reference.shape:
        raise ValueError("value sequences differ in length")
    for base in candidates:
        scaled = computed / math.log(base)
        if np.all(np.abs(scaled - reference) <= tolerance):
            return float(base)
    raise ValueError("no candidate base matches the reference values")
