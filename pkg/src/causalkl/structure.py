"""Structural metrics between DAGs: edit distance, Markov-equivalence
patterns, and weighted edit distances for path models and discrete networks.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ScopeError, StructuralError
from .network import (DEFAULT_CELL_BUDGET, Dag, DiscreteNetwork, JointTable,
                      joint_distribution, mutual_information,
                      topological_order)


def _require_same_variables(a: Dag, b: Dag):
    na, nb = set(a.names), set(b.names)
    if na != nb:
        missing = sorted(na ^ nb)
        raise ScopeError(f"variable sets differ; {missing[0]!r} is not shared")
    for v in a.variables:
        w = b.variables[b.index(v.name)]
        if v.states != w.states:
            raise ScopeError(f"state lists for {v.name!r} disagree")


def edit_distance(m1: Dag, m2: Dag) -> int:
    """Number of single-arc additions plus deletions separating two DAGs.

    A reversed arc counts as one deletion plus one addition. Since each
    operation's cost is arc-local, the minimum over edit paths is exactly the
    size of the symmetric difference of the directed arc sets.
    """
    _require_same_variables(m1, m2)
    return len(m1.arc_names() ^ m2.arc_names())


@dataclass(frozen=True)
class EditOp:
    kind: str  # "add" or "delete"
    arc: tuple[str, str]

    def __post_init__(self):
        if self.kind not in ("add", "delete"):
            raise ValueError(f"unknown edit kind {self.kind!r}")
        object.__setattr__(self, "arc", tuple(self.arc))


@dataclass(frozen=True)
class EditScript:
    """An ordered arc edit sequence; apply() checks acyclicity at each step."""

    ops: tuple[EditOp, ...]

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))

    def __len__(self) -> int:
        return len(self.ops)

    def apply(self, dag: Dag) -> Dag:
        current = set(dag.arc_names())
        for op in self.ops:
            if op.kind == "delete":
                if op.arc not in current:
                    raise StructuralError(f"cannot delete missing arc {op.arc}")
                current.discard(op.arc)
            else:
                if op.arc in current:
                    raise StructuralError(f"cannot add existing arc {op.arc}")
                current.add(op.arc)
            dag = Dag.from_arcs(dag.variables, current)  # raises on a cycle
        return dag


def edit_script(source: Dag, target: Dag) -> EditScript:
    """A minimal edit script from source to target: deletions first, then
    additions. Intermediate graphs are subgraphs of source or target, so
    every step stays acyclic; the length equals edit_distance.
    """
    _require_same_variables(source, target)
    src, dst = source.arc_names(), target.arc_names()
    ops = [EditOp("delete", arc) for arc in sorted(src - dst)]
    ops += [EditOp("add", arc) for arc in sorted(dst - src)]
    return EditScript(tuple(ops))


@dataclass(frozen=True)
class Pattern:
    """Markov-equivalence fingerprint: skeleton plus uncovered collisions.

    A collision (x, z, y) is stored with x < y; it requires arcs x->z and
    y->z with x and y non-adjacent.
    """

    skeleton: frozenset[frozenset[str]]
    colliders: frozenset[tuple[str, str, str]]

    def __post_init__(self):
        for x, z, y in self.colliders:
            if x > y:
                raise ValueError("collider endpoints must be ordered")
            for end in (x, y):
                if frozenset((end, z)) not in self.skeleton:
                    raise ValueError("collider arc missing from skeleton")
            if frozenset((x, y)) in self.skeleton:
                raise ValueError("collider endpoints are adjacent")


def pattern_of(dag: Dag) -> Pattern:
    names = dag.names
    skeleton = frozenset(frozenset(arc) for arc in dag.arc_names())
    colliders = set()
    for child, ps in enumerate(dag.parent_sets):
        for i, a in enumerate(ps):
            for b in ps[i + 1:]:
                if frozenset((names[a], names[b])) in skeleton:
                    continue
                x, y = sorted((names[a], names[b]))
                colliders.add((x, names[child], y))
    return Pattern(skeleton, frozenset(colliders))


def same_pattern(m1: Dag, m2: Dag) -> bool:
    """Whether two DAGs are statistically indistinguishable from
    observational data (same skeleton and uncovered collisions)."""
    _require_same_variables(m1, m2)
    return pattern_of(m1) == pattern_of(m2)


@dataclass(frozen=True, eq=False)
class PathModel:
    """Standardized linear model on a DAG: one path coefficient per arc.

    The implied correlation matrix (variables in dag order) is derived at
    construction by the usual recursion on standardized variables and must be
    a valid correlation matrix, i.e. every residual variance nonnegative.
    """

    dag: Dag
    coefficients: Mapping[tuple[str, str], float]

    def __post_init__(self):
        coefs = {tuple(k): float(v) for k, v in dict(self.coefficients).items()}
        arcs = self.dag.arc_names()
        extra = set(coefs) - set(arcs)
        if extra:
            raise StructuralError(f"coefficient for missing arc {sorted(extra)[0]}")
        missing = set(arcs) - set(coefs)
        if missing:
            raise StructuralError(f"no coefficient for arc {sorted(missing)[0]}")
        object.__setattr__(self, "coefficients", coefs)
        object.__setattr__(self, "correlation", self._implied_correlation())
        self.correlation.setflags(write=False)

    def _implied_correlation(self) -> np.ndarray:
        names = self.dag.names
        n = len(names)
        corr = np.eye(n)
        for v in topological_order(self.dag):
            ps = self.dag.parent_sets[v]
            if not ps:
                continue
            a = np.array([self.coefficients[(names[p], names[v])] for p in ps])
            explained = float(a @ corr[np.ix_(ps, ps)] @ a)
            if explained > 1.0 + 1e-9:
                raise ValueError(
                    f"implied variance of {names[v]!r} exceeds 1 "
                    f"(explained {explained:.6f}); coefficients inconsistent "
                    "with standardization"
                )
            cov = corr[:, ps] @ a  # corr(v, u) for every u processed so far
            corr[v, :] = cov
            corr[:, v] = cov
            corr[v, v] = 1.0
        return corr

    def coefficient(self, parent: str, child: str) -> float:
        return self.coefficients[(parent, child)]


def wed_p(truth: PathModel, learned: Dag) -> float:
    """Weighted edit distance for path models.

    Arcs of the true model missing from the learned DAG weigh the squared
    path coefficient; arcs present only in the learned DAG weigh the squared
    marginal correlation of their endpoints implied by the true model (so a
    reversal contributes both terms).
    """
    _require_same_variables(truth.dag, learned)
    true_arcs = truth.dag.arc_names()
    got_arcs = learned.arc_names()
    names = truth.dag.names
    pos = {n: i for i, n in enumerate(names)}
    total = 0.0
    for arc in true_arcs - got_arcs:
        total += truth.coefficients[arc] ** 2
    for a, b in got_arcs - true_arcs:
        total += float(truth.correlation[pos[a], pos[b]]) ** 2
    return total


def wed_d(truth: DiscreteNetwork, learned: Dag, *,
          cell_budget: int = DEFAULT_CELL_BUDGET,
          base: float | None = None) -> float:
    """Weighted edit distance for discrete networks: each arc in the
    symmetric difference weighs the mutual information of its endpoints under
    the true joint, so a reversal contributes twice the pair's information."""
    _require_same_variables(truth.dag, learned)
    joint = joint_distribution(truth, cell_budget=cell_budget)
    cache: dict[frozenset[str], float] = {}
    total = 0.0
    for a, b in truth.dag.arc_names() ^ learned.arc_names():
        key = frozenset((a, b))
        if key not in cache:
            cache[key] = mutual_information(joint, a, b, base=base)
        total += cache[key]
    return total
