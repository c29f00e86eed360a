"""Intervention spaces for causal scoring.

Every variable X of a network gets a companion intervention variable X' with
one state per state of X plus the non-intervention state "*". A scheme is a
probability distribution over joint settings of the intervention variables;
three are provided:

- INDEPENDENT: each X' independently is "*" with probability 1/2, otherwise
  uniform over the forced states.
- SUBSETS: the intervened set is uniform over all 2^n subsets; given the set,
  forced values follow the reference joint's marginal over it.
- ONE_FREE: exactly one variable is left free, uniform over the n choices;
  all others are forced jointly per the reference marginal.

Supports are enumerated directly as (config, probability) lists; a scheme
never needs to materialize extra nodes.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import CapacityError, ScopeError, ZeroMassError
from .network import (DEFAULT_CELL_BUDGET, DiscreteNetwork, JointTable,
                      Variable, _check_budget, _product_table,
                      joint_distribution, marginal)

STAR = "*"


class InterventionScheme(enum.Enum):
    """The three built-in distributions over intervention configurations."""

    INDEPENDENT = "ckl1"
    SUBSETS = "ckl2"
    ONE_FREE = "ckl3"

    @classmethod
    def from_name(cls, name: str) -> "InterventionScheme":
        for member in cls:
            if member.value == name or member.name.lower() == name.lower():
                return member
        raise ValueError(f"unknown intervention scheme {name!r}")


@dataclass(frozen=True)
class InterventionConfig:
    """One joint setting: a forced state name per variable, or None if the
    variable is left to its own conditional (the "*" state)."""

    forced: tuple[str | None, ...]

    def __post_init__(self):
        object.__setattr__(self, "forced", tuple(self.forced))

    @classmethod
    def from_mapping(cls, variables: Iterable[Variable],
                     forced: Mapping[str, str]) -> "InterventionConfig":
        variables = tuple(variables)
        unknown = set(forced) - {v.name for v in variables}
        if unknown:
            raise ScopeError(f"unknown variable {sorted(unknown)[0]!r}")
        for v in variables:
            if v.name in forced:
                v.index(forced[v.name])  # raises on an unknown state
        return cls(tuple(forced.get(v.name) for v in variables))

    def free_indices(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.forced) if s is None)

    def overrides(self, variables: tuple[Variable, ...]) -> dict[int, int]:
        """Forced states as {variable index: state index}."""
        out = {}
        for i, state in enumerate(self.forced):
            if state is not None:
                out[i] = variables[i].index(state)
        return out


@dataclass(frozen=True, eq=False)
class InterventionSupport:
    """A distribution over intervention configurations."""

    variables: tuple[Variable, ...]
    configs: tuple[InterventionConfig, ...]
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "configs", tuple(self.configs))
        w = np.array(self.weights, dtype=float)
        if w.shape != (len(self.configs),):
            raise ValueError("one weight per config required")
        if np.any(w < 0):
            raise ValueError("negative config probability")
        if abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError(f"config probabilities sum to {float(w.sum())}")
        if len(set(self.configs)) != len(self.configs):
            raise ValueError("duplicate configs in support")
        for cfg in self.configs:
            if len(cfg.forced) != len(self.variables):
                raise ScopeError("config arity does not match variables")
            for v, s in zip(self.variables, cfg.forced):
                if s is not None:
                    v.index(s)  # raises on a bad state
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.configs)

    def items(self):
        return zip(self.configs, self.weights)

    def free_probability(self, name: str) -> float:
        """Total mass of configs leaving the named variable unintervened."""
        i = [v.name for v in self.variables].index(name)
        return float(sum(
            w for cfg, w in self.items() if cfg.forced[i] is None
        ))

    def forced_value_distribution(self, name: str) -> np.ndarray:
        """Distribution over the values the variable is forced to, given
        that it is intervened on at all (star mass renormalized away)."""
        i = [v.name for v in self.variables].index(name)
        states = self.variables[i].states
        mass = np.zeros(len(states))
        for cfg, w in self.items():
            if cfg.forced[i] is not None:
                mass[states.index(cfg.forced[i])] += w
        total = float(mass.sum())
        if total <= 0:
            raise ZeroMassError(f"{name!r} is never intervened on")
        return mass / total


def _support_size(scheme: InterventionScheme, cards: list[int]) -> int:
    # all three schemes draw configs from the partial-assignment lattice
    size = 1
    for c in cards:
        size *= c + 1
    if scheme is InterventionScheme.ONE_FREE:
        size = 0
        for i in range(len(cards)):
            rest = 1
            for j, c in enumerate(cards):
                if j != i:
                    rest *= c
            size += rest
    return size


def intervention_support(scheme: InterventionScheme, truth: DiscreteNetwork, *,
                         budget: int = DEFAULT_CELL_BUDGET
                         ) -> InterventionSupport:
    """Enumerate a scheme's distribution over intervention configurations.

    Forced values under SUBSETS and ONE_FREE follow the truth's marginal
    joint, so configurations with zero truth probability are omitted.
    """
    variables = truth.variables
    cards = [v.cardinality for v in variables]
    _check_budget(_support_size(scheme, cards), budget, "intervention support")

    configs: list[InterventionConfig] = []
    weights: list[float] = []

    if scheme is InterventionScheme.INDEPENDENT:
        options = [
            [(None, 0.5)] + [(s, 0.5 / v.cardinality) for s in v.states]
            for v in variables
        ]
        for combo in itertools.product(*options):
            w = 1.0
            for _, p in combo:
                w *= p
            configs.append(InterventionConfig(tuple(s for s, _ in combo)))
            weights.append(w)
        return InterventionSupport(variables, tuple(configs), weights)

    joint = joint_distribution(truth, cell_budget=budget)
    n = len(variables)
    if scheme is InterventionScheme.SUBSETS:
        set_weight = 0.5 ** n
        for mask in itertools.product((False, True), repeat=n):
            members = [i for i in range(n) if mask[i]]
            if not members:
                configs.append(InterventionConfig((None,) * n))
                weights.append(set_weight)
                continue
            sub = marginal(joint, [variables[i].name for i in members])
            for states in np.ndindex(sub.probs.shape):
                p = float(sub.probs[states])
                if p == 0.0:
                    continue
                forced: list[str | None] = [None] * n
                for i, s in zip(members, states):
                    forced[i] = variables[i].states[s]
                configs.append(InterventionConfig(tuple(forced)))
                weights.append(set_weight * p)
        return InterventionSupport(variables, tuple(configs), weights)

    if scheme is InterventionScheme.ONE_FREE:
        for free in range(n):
            others = [i for i in range(n) if i != free]
            sub = marginal(joint, [variables[i].name for i in others])
            for states in np.ndindex(sub.probs.shape):
                p = float(sub.probs[states])
                if p == 0.0:
                    continue
                forced = [None] * n
                for i, s in zip(others, states):
                    forced[i] = variables[i].states[s]
                configs.append(InterventionConfig(tuple(forced)))
                weights.append(p / n)
        return InterventionSupport(variables, tuple(configs), weights)

    raise ValueError(f"unknown scheme {scheme!r}")


def intervened_conditional(net: DiscreteNetwork, config: InterventionConfig, *,
                           cell_budget: int = DEFAULT_CELL_BUDGET) -> JointTable:
    """The network's response distribution under a perfect intervention:
    forced variables become point masses, free variables keep their CPT rows
    given realized parent values (truncated factorization)."""
    if len(config.forced) != len(net.variables):
        raise ScopeError("config arity does not match the network")
    overrides = config.overrides(net.variables)
    return JointTable(net.variables,
                      _product_table(net, overrides, cell_budget))


def _primed_variable(v: Variable) -> Variable:
    return Variable(v.name + "'", (STAR,) + v.states)


def augmented_joint(scheme: InterventionScheme, truth: DiscreteNetwork,
                    model: DiscreteNetwork, *,
                    budget: int = DEFAULT_CELL_BUDGET) -> JointTable:
    """Joint over intervention variables and originals: the intervention
    marginal always comes from truth, the response from model."""
    if truth.dag.names != model.dag.names:
        raise ScopeError("truth and model must share variables, in order")
    support = intervention_support(scheme, truth, budget=budget)
    variables = truth.variables
    cards = [v.cardinality for v in variables]
    cells = 1
    for c in cards:
        cells *= c * (c + 1)
    _check_budget(cells, budget, "augmented joint")

    primed = tuple(_primed_variable(v) for v in variables)
    shape = tuple(c + 1 for c in cards) + tuple(cards)
    probs = np.zeros(shape)
    for cfg, w in support.items():
        response = intervened_conditional(model, cfg, cell_budget=budget)
        idx = tuple(
            0 if s is None else 1 + variables[i].index(s)
            for i, s in enumerate(cfg.forced)
        )
        probs[idx] = w * response.probs
    return JointTable(primed + variables, probs)
