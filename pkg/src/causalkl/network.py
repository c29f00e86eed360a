"""Discrete Bayesian networks with exact inference by dense enumeration.

Everything here is small-network machinery: joints are materialized as dense
numpy arrays (one axis per variable), which keeps every downstream computation
exact. A cell budget guards against accidentally enumerating something huge.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import CapacityError, ScopeError, StructuralError, ZeroMassError

DEFAULT_CELL_BUDGET = 10_000_000

# construction-time float slack for CPT rows / joint mass
ROW_TOL = 1e-12
MASS_TOL = 1e-9


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Variable:
    """A named categorical variable with a fixed, ordered state list."""

    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not self.name:
            raise ValueError("variable name must be nonempty")
        if len(self.states) < 2:
            raise ValueError(f"variable {self.name!r} needs at least two states")
        if len(set(self.states)) != len(self.states):
            raise ValueError(f"variable {self.name!r} has duplicate states")

    @property
    def cardinality(self) -> int:
        return len(self.states)

    def index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise ScopeError(
                f"variable {self.name!r} has no state {state!r}"
            ) from None


def _toposort(n: int, parent_sets: Sequence[Sequence[int]], names) -> tuple[int, ...]:
    """Deterministic Kahn order; ties broken by declaration index."""
    placed = [False] * n
    order = []
    for _ in range(n):
        nxt = -1
        for i in range(n):
            if not placed[i] and all(placed[p] for p in parent_sets[i]):
                nxt = i
                break
        if nxt < 0:
            # stuck: walk parent links among unplaced nodes until one repeats
            start = next(i for i in range(n) if not placed[i])
            seen = {start}
            node = start
            while True:
                par = next(p for p in parent_sets[node] if not placed[p])
                if par in seen:
                    raise StructuralError(
                        f"cycle detected: arc {names[par]!r} -> {names[node]!r} "
                        "lies on a directed cycle"
                    )
                seen.add(par)
                node = par
        placed[nxt] = True
        order.append(nxt)
    return tuple(order)


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over an ordered tuple of variables.

    parent_sets[i] holds the (sorted) indices of variable i's parents.
    Acyclicity is checked at construction.
    """

    variables: tuple[Variable, ...]
    parent_sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ScopeError("duplicate variable names")
        n = len(self.variables)
        if len(self.parent_sets) != n:
            raise StructuralError("need exactly one parent set per variable")
        canon = []
        for i, ps in enumerate(self.parent_sets):
            ps = tuple(sorted(ps))
            if any(p < 0 or p >= n for p in ps):
                raise StructuralError(f"parent index out of range for {names[i]!r}")
            if i in ps:
                raise StructuralError(f"self-arc on {names[i]!r}")
            if len(set(ps)) != len(ps):
                raise StructuralError(f"duplicate parent for {names[i]!r}")
            canon.append(ps)
        object.__setattr__(self, "parent_sets", tuple(canon))
        _toposort(n, self.parent_sets, names)  # raises on cycles

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def index(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise ScopeError(f"unknown variable {name!r}")

    def arcs(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            (p, c) for c, ps in enumerate(self.parent_sets) for p in ps
        )

    def arc_names(self) -> frozenset[tuple[str, str]]:
        names = self.names
        return frozenset((names[p], names[c]) for p, c in self.arcs())

    @classmethod
    def from_arcs(cls, variables: Sequence[Variable],
                  arcs: Iterable[tuple[str, str]]) -> "Dag":
        variables = tuple(variables)
        idx = {v.name: i for i, v in enumerate(variables)}
        parents: list[list[int]] = [[] for _ in variables]
        for parent, child in arcs:
            if parent not in idx:
                raise ScopeError(f"unknown variable {parent!r} in arc")
            if child not in idx:
                raise ScopeError(f"unknown variable {child!r} in arc")
            parents[idx[child]].append(idx[parent])
        return cls(variables, tuple(tuple(ps) for ps in parents))


def topological_order(dag: Dag) -> tuple[int, ...]:
    """Indices of dag.variables in a deterministic ancestral order."""
    return _toposort(len(dag.variables), dag.parent_sets, dag.names)


@dataclass(frozen=True, eq=False)
class Cpt:
    """Conditional probability table for one variable.

    table has one axis per parent (in parent_order) plus a trailing axis over
    the child's states; every row on the trailing axis sums to 1.
    """

    child: int
    parent_order: tuple[int, ...]
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "parent_order", tuple(self.parent_order))
        object.__setattr__(self, "table", _frozen_array(self.table))
        if self.table.ndim != len(self.parent_order) + 1:
            raise ValueError("CPT shape does not match parent count")
        if np.any(self.table < -ROW_TOL) or np.any(self.table > 1 + ROW_TOL):
            raise ValueError("CPT entries must lie in [0, 1]")
        sums = self.table.sum(axis=-1)
        if np.any(np.abs(sums - 1.0) > ROW_TOL):
            worst = float(np.max(np.abs(sums - 1.0)))
            raise ValueError(f"CPT rows must sum to 1 (worst error {worst:.3g})")

    def row(self, parent_states: tuple[int, ...]) -> np.ndarray:
        return self.table[tuple(parent_states)]


@dataclass(frozen=True, eq=False)
class DiscreteNetwork:
    """A Dag plus one Cpt per variable.

    metadata records provenance facts such as uniform-fallback rows introduced
    by fitting or projection; it never affects computation.
    """

    dag: Dag
    cpts: tuple[Cpt, ...]
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "cpts", tuple(self.cpts))
        if len(self.cpts) != len(self.dag.variables):
            raise ValueError("need exactly one CPT per variable")
        cards = [v.cardinality for v in self.dag.variables]
        for i, cpt in enumerate(self.cpts):
            if cpt.child != i:
                raise ValueError(f"CPT at position {i} is for variable {cpt.child}")
            if set(cpt.parent_order) != set(self.dag.parent_sets[i]):
                raise StructuralError(
                    f"CPT parents for {self.dag.names[i]!r} disagree with the dag"
                )
            want = tuple(cards[p] for p in cpt.parent_order) + (cards[i],)
            if cpt.table.shape != want:
                raise ValueError(
                    f"CPT shape {cpt.table.shape} for {self.dag.names[i]!r}, "
                    f"expected {want}"
                )

    @property
    def variables(self) -> tuple[Variable, ...]:
        return self.dag.variables

    def cpt_for(self, name: str) -> Cpt:
        return self.cpts[self.dag.index(name)]

    def uniform_fallback_rows(self) -> tuple:
        """Rows that were filled in uniformly for lack of data or mass."""
        return tuple(self.metadata.get("uniform_rows", ()))


@dataclass(frozen=True, eq=False)
class JointTable:
    """Dense joint distribution over an ordered scope of variables."""

    scope: tuple[Variable, ...]
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "scope", tuple(self.scope))
        probs = np.array(self.probs, dtype=float)
        want = tuple(v.cardinality for v in self.scope)
        if probs.shape != want:
            raise ValueError(f"joint shape {probs.shape}, scope needs {want}")
        if np.any(probs < -ROW_TOL):
            raise ValueError("joint has negative mass")
        np.clip(probs, 0.0, None, out=probs)
        total = float(probs.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"joint mass {total} is not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.scope)

    def index(self, name: str) -> int:
        for i, v in enumerate(self.scope):
            if v.name == name:
                return i
        raise ScopeError(f"unknown variable {name!r}")

    def prob(self, assignment: Mapping[str, str]) -> float:
        if set(assignment) != set(self.names):
            raise ScopeError("assignment must cover the full scope")
        idx = tuple(v.index(assignment[v.name]) for v in self.scope)
        return float(self.probs[idx])


def _check_budget(cells: int, budget: int, what: str):
    if cells > budget:
        raise CapacityError(
            f"{what} needs {cells} cells, over the budget of {budget}"
        )


def _product_table(net: DiscreteNetwork, overrides: Mapping[int, int],
                   cell_budget: int) -> np.ndarray:
    """Dense product of CPT factors; overridden variables become point masses."""
    cards = [v.cardinality for v in net.variables]
    cells = 1
    for c in cards:
        cells *= c
    _check_budget(cells, cell_budget, "joint table")
    n = len(cards)
    out = np.ones(tuple(cards))
    for i, cpt in enumerate(net.cpts):
        if i in overrides:
            factor = np.zeros(cards[i])
            factor[overrides[i]] = 1.0
            shape = [1] * n
            shape[i] = cards[i]
            out = out * factor.reshape(shape)
            continue
        axes = (*cpt.parent_order, i)
        # permute the cpt so its axes appear in ascending variable order,
        # then broadcast it over the full grid
        perm = np.argsort(axes)
        arr = np.transpose(cpt.table, perm)
        shape = [1] * n
        for ax in sorted(axes):
            shape[ax] = cards[ax]
        out = out * arr.reshape(shape)
    return out


def joint_distribution(net: DiscreteNetwork, *,
                       cell_budget: int = DEFAULT_CELL_BUDGET) -> JointTable:
    """Exact full joint of the network as a dense table."""
    return JointTable(net.variables, _product_table(net, {}, cell_budget))


def marginal(joint: JointTable, subset: Sequence[str]) -> JointTable:
    """Marginal over the named variables, in the requested order."""
    names = list(subset)
    if len(set(names)) != len(names):
        raise ScopeError("marginal subset has repeats")
    if not names:
        raise ScopeError("marginal subset is empty")
    keep = [joint.index(n) for n in names]
    drop = tuple(i for i in range(len(joint.scope)) if i not in keep)
    summed = joint.probs.sum(axis=drop) if drop else joint.probs
    # axes of `summed` follow the original relative order of the kept vars
    kept_sorted = sorted(keep)
    perm = [kept_sorted.index(i) for i in keep]
    return JointTable(
        tuple(joint.scope[i] for i in keep), np.transpose(summed, perm)
    )


def conditional(joint: JointTable, target: Sequence[str],
                given: Mapping[str, str]) -> JointTable:
    """Conditional distribution of the target variables given an assignment."""
    target = list(target)
    given_names = list(given)
    if set(target) & set(given):
        raise ScopeError("target and conditioning variables overlap")
    sub = marginal(joint, target + given_names)
    idx: list[Any] = [slice(None)] * len(target)
    for pos, name in enumerate(given_names):
        var = sub.scope[len(target) + pos]
        idx.append(var.index(given[name]))
    sliced = sub.probs[tuple(idx)]
    mass = float(sliced.sum())
    if mass <= 0.0:
        cond = ", ".join(f"{k}={v}" for k, v in given.items())
        raise ZeroMassError(f"conditioning event ({cond}) has zero probability")
    return JointTable(tuple(sub.scope[: len(target)]), sliced / mass)


def mutual_information(joint: JointTable, a: str, b: str, *,
                       base: float | None = None) -> float:
    """Mutual information of two variables under the joint; nats by default."""
    pab = marginal(joint, [a, b]).probs
    pa = pab.sum(axis=1, keepdims=True)
    pb = pab.sum(axis=0, keepdims=True)
    mask = pab > 0
    terms = pab[mask] * np.log(pab[mask] / (pa * pb + 0.0)[mask])
    value = float(terms.sum())
    if base is not None:
        value /= float(np.log(base))
    return max(value, 0.0)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Complete records over a scope, stored as state indices."""

    scope: tuple[Variable, ...]
    records: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "scope", tuple(self.scope))
        rec = np.array(self.records, dtype=np.int64)
        if rec.ndim != 2 or rec.shape[1] != len(self.scope):
            raise ValueError("records must be an (n, len(scope)) array")
        for j, v in enumerate(self.scope):
            col = rec[:, j]
            if col.size and (col.min() < 0 or col.max() >= v.cardinality):
                raise ValueError(f"record state out of range for {v.name!r}")
        rec.setflags(write=False)
        object.__setattr__(self, "records", rec)

    def __len__(self) -> int:
        return self.records.shape[0]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.scope)

    def state_rows(self):
        """Yield each record as a tuple of state names."""
        for row in self.records:
            yield tuple(v.states[row[j]] for j, v in enumerate(self.scope))


def sample(net: DiscreteNetwork, n: int, seed: int) -> Dataset:
    """Ancestral sampling; deterministic for a fixed seed."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = np.random.default_rng(seed)
    k = len(net.variables)
    cols = np.zeros((n, k), dtype=np.int64)
    for i in topological_order(net.dag):
        cpt = net.cpts[i]
        card = net.variables[i].cardinality
        if cpt.parent_order:
            rows = cpt.table[tuple(cols[:, p] for p in cpt.parent_order)]
        else:
            rows = np.broadcast_to(cpt.table, (n, card))
        cdf = np.cumsum(rows, axis=1)
        u = rng.random(n)
        cols[:, i] = np.minimum((cdf < u[:, None]).sum(axis=1), card - 1)
    return Dataset(net.variables, cols, seed=seed)


def fit_mle(dag: Dag, data: Dataset, pseudocount: float = 0.0) -> DiscreteNetwork:
    """Maximum-likelihood CPTs from complete data.

    With pseudocount 0, a parent configuration never seen in the data gets a
    uniform row; such rows are listed in the result's metadata.
    """
    if pseudocount < 0:
        raise ValueError("pseudocount must be nonnegative")
    if tuple(v.name for v in data.scope) == dag.names:
        col_of = list(range(len(dag.variables)))
    else:
        by_name = {v.name: j for j, v in enumerate(data.scope)}
        missing = [n for n in dag.names if n not in by_name]
        if missing:
            raise ScopeError(f"dataset lacks variable {missing[0]!r}")
        col_of = [by_name[n] for n in dag.names]
    for i, v in enumerate(dag.variables):
        dv = data.scope[col_of[i]]
        if dv.states != v.states:
            raise ScopeError(f"state lists for {v.name!r} disagree with the data")

    cards = [v.cardinality for v in dag.variables]
    cpts = []
    uniform_rows = []
    rec = data.records
    for i, ps in enumerate(dag.parent_sets):
        shape = tuple(cards[p] for p in ps) + (cards[i],)
        counts = np.zeros(shape)
        idx = tuple(rec[:, col_of[p]] for p in ps) + (rec[:, col_of[i]],)
        np.add.at(counts, idx, 1.0)
        counts += pseudocount
        totals = counts.sum(axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            table = counts / totals
        empty = totals[..., 0] == 0
        if np.any(empty):
            table = np.where(totals > 0, table, 1.0 / cards[i])
            for pos in np.argwhere(empty):
                states = tuple(
                    dag.variables[p].states[s] for p, s in zip(ps, pos)
                )
                uniform_rows.append((dag.names[i], tuple(zip(
                    (dag.names[p] for p in ps), states))))
        cpts.append(Cpt(i, ps, table))
    meta = {"fitted_n": len(data), "pseudocount": pseudocount}
    if uniform_rows:
        meta["uniform_rows"] = tuple(uniform_rows)
    return DiscreteNetwork(dag, tuple(cpts), meta)


def project_parameters(truth: JointTable, dag: Dag, *,
                       cell_budget: int = DEFAULT_CELL_BUDGET) -> DiscreteNetwork:
    """Parameterize a structure with the conditionals its parent sets induce
    under a reference joint.

    This is the infinite-data limit of fitting: each CPT row is the reference
    conditional of the child given that parent configuration. Parent
    configurations with zero reference mass get uniform rows, recorded in
    metadata.
    """
    if set(truth.names) != set(dag.names):
        extra = set(truth.names) ^ set(dag.names)
        raise ScopeError(f"joint and dag variable sets differ on {sorted(extra)}")
    for v in dag.variables:
        tv = truth.scope[truth.index(v.name)]
        if tv.states != v.states:
            raise ScopeError(f"state lists for {v.name!r} disagree")

    cpts = []
    uniform_rows = []
    cards = [v.cardinality for v in dag.variables]
    for i, ps in enumerate(dag.parent_sets):
        fam = marginal(truth, [dag.names[p] for p in ps] + [dag.names[i]])
        family = fam.probs
        totals = family.sum(axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            table = family / totals
        empty = totals[..., 0] == 0
        if np.any(empty):
            table = np.where(totals > 0, table, 1.0 / cards[i])
            for pos in np.argwhere(empty):
                states = tuple(
                    dag.variables[p].states[s] for p, s in zip(ps, pos)
                )
                uniform_rows.append((dag.names[i], tuple(zip(
                    (dag.names[p] for p in ps), states))))
        cpts.append(Cpt(i, ps, table))
    meta: dict[str, Any] = {"projected": True}
    if uniform_rows:
        meta["uniform_rows"] = tuple(uniform_rows)
    return DiscreteNetwork(dag, tuple(cpts), meta)
