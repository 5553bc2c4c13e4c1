"""Causal chain graphs: partial causal orders over features and the
interventional factorizations they induce.

A chain graph partitions the features into fully connected components with
directed edges between components. Each component carries a flag saying
whether its within-component dependencies come from a latent confounder
(interventions on members do not move the other members) or from mutual
interaction (they do).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import GraphValidationError

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class FeatureKind:
    kind: str
    levels: tuple | None = None

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, CATEGORICAL):
            raise GraphValidationError(f"unknown feature kind {self.kind!r}")
        if self.kind == CATEGORICAL and not self.levels:
            raise GraphValidationError("categorical feature needs enumerated levels")
        if self.kind == CONTINUOUS and self.levels is not None:
            raise GraphValidationError("continuous feature cannot carry levels")


@dataclass(frozen=True)
class FeatureSpace:
    names: tuple[str, ...]
    kinds: tuple[FeatureKind, ...]

    def __post_init__(self):
        if len(self.names) != len(self.kinds):
            raise GraphValidationError("names and kinds must have equal length")
        if len(set(self.names)) != len(self.names):
            raise GraphValidationError("feature names must be unique")
        if any(not n for n in self.names):
            raise GraphValidationError("feature names must be non-empty")

    @property
    def n(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise GraphValidationError(f"unknown feature name {name!r}") from None

    @property
    def continuous_indices(self) -> tuple[int, ...]:
        return tuple(i for i, k in enumerate(self.kinds) if k.kind == CONTINUOUS)

    @property
    def categorical_indices(self) -> tuple[int, ...]:
        return tuple(i for i, k in enumerate(self.kinds) if k.kind == CATEGORICAL)

    @classmethod
    def continuous(cls, names: Sequence[str]) -> "FeatureSpace":
        """All-continuous feature space, a common shortcut."""
        return cls(tuple(names), tuple(FeatureKind(CONTINUOUS) for _ in names))

    @classmethod
    def binary(cls, names: Sequence[str]) -> "FeatureSpace":
        """All-binary feature space with levels (0, 1)."""
        return cls(tuple(names), tuple(FeatureKind(CATEGORICAL, (0, 1)) for _ in names))


@dataclass(frozen=True)
class ChainComponent:
    members: frozenset[int]
    confounded: bool
    parents: frozenset[int]  # component ids, earlier in topological order

    def __post_init__(self):
        if not self.members:
            raise GraphValidationError("chain component must have at least one member")


@dataclass(frozen=True)
class Coalition:
    """In-coalition feature indices with their fixed values."""

    in_set: frozenset[int]
    values: Mapping[int, object]

    def __post_init__(self):
        if set(self.values) != set(self.in_set):
            raise GraphValidationError("coalition values must cover exactly the in-set")

    @classmethod
    def from_instance(cls, in_set: Iterable[int], x: Sequence) -> "Coalition":
        s = frozenset(in_set)
        return cls(s, {i: x[i] for i in s})

    def complement(self, n: int) -> frozenset[int]:
        return frozenset(range(n)) - self.in_set


@dataclass(frozen=True)
class Factor:
    """One conditional in the interventional factorization of a component."""

    component: int
    targets: tuple[int, ...]           # tau & complement(S), sorted
    sampled_parents: tuple[int, ...]   # pa(tau) & complement(S)
    fixed: tuple[int, ...]             # pa(tau) & S, plus tau & S iff non-confounded
    confounded: bool


@dataclass(frozen=True)
class FactorPlan:
    """Factors in topological component order; their targets partition the
    out-of-coalition set."""

    factors: tuple[Factor, ...]

    @property
    def targets(self) -> frozenset[int]:
        out: set[int] = set()
        for f in self.factors:
            out.update(f.targets)
        return frozenset(out)


@dataclass(frozen=True)
class ChainGraph:
    feature_space: FeatureSpace
    components: tuple[ChainComponent, ...]
    _component_of: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.feature_space.n
        seen: dict[int, int] = {}
        for cid, comp in enumerate(self.components):
            for i in comp.members:
                if not 0 <= i < n:
                    raise GraphValidationError(
                        f"component {cid} references unknown feature index {i}"
                    )
                if i in seen:
                    raise GraphValidationError(
                        f"feature {self.feature_space.names[i]!r} appears in "
                        f"components {seen[i]} and {cid}"
                    )
                seen[i] = cid
        missing = set(range(n)) - set(seen)
        if missing:
            names = [self.feature_space.names[i] for i in sorted(missing)]
            raise GraphValidationError(f"features missing from all components: {names}")
        for cid, comp in enumerate(self.components):
            for p in comp.parents:
                if not 0 <= p < len(self.components):
                    raise GraphValidationError(
                        f"component {cid} has unknown parent component {p}"
                    )
                if p >= cid:
                    raise GraphValidationError(
                        f"component {cid} has parent {p} not earlier in the "
                        "listed (topological) order"
                    )
        object.__setattr__(self, "_component_of", seen)

    @property
    def n(self) -> int:
        return self.feature_space.n

    def component_of(self, feature: int) -> int:
        return self._component_of[feature]

    def ancestor_components(self, cid: int) -> frozenset[int]:
        """Strict ancestors of a component in the component DAG."""
        out: set[int] = set()
        stack = list(self.components[cid].parents)
        while stack:
            p = stack.pop()
            if p not in out:
                out.add(p)
                stack.extend(self.components[p].parents)
        return frozenset(out)

    def ancestor_features(self, feature: int) -> frozenset[int]:
        """Features in strict-ancestor components of a feature's component."""
        out: set[int] = set()
        for cid in self.ancestor_components(self.component_of(feature)):
            out.update(self.components[cid].members)
        return frozenset(out)


def build_chain_graph(
    feature_space: FeatureSpace,
    partial_order: Sequence[Iterable[int]],
    confounding: Sequence[bool],
    explicit_parents: Sequence[Iterable[int]] | None = None,
) -> ChainGraph:
    """Build a chain graph from an ordered partition of the feature indices.

    Without ``explicit_parents``, every earlier component is a parent of every
    later one (the listed order is taken as a total order of components).
    """
    if len(partial_order) != len(confounding):
        raise GraphValidationError("partial_order and confounding lengths differ")
    if explicit_parents is not None and len(explicit_parents) != len(partial_order):
        raise GraphValidationError("explicit_parents length differs from partial_order")
    components = []
    for cid, members in enumerate(partial_order):
        members = frozenset(members)
        if explicit_parents is None:
            parents = frozenset(range(cid))
        else:
            parents = frozenset(explicit_parents[cid])
        components.append(ChainComponent(members, bool(confounding[cid]), parents))
    return ChainGraph(feature_space, tuple(components))


def single_component_graph(feature_space: FeatureSpace, confounded: bool) -> ChainGraph:
    """All features in one parentless component."""
    return build_chain_graph(
        feature_space, [range(feature_space.n)], [confounded]
    )


def intervention_factorization(graph: ChainGraph, coalition: Coalition) -> FactorPlan:
    """Factor plan realizing P(X_out | do(x_in)) for a coalition.

    For a confounded component the factor never conditions on the component's
    own in-coalition members; for a non-confounded one it does. With an empty
    coalition this is the observational factorization.
    """
    for i in coalition.in_set:
        if not 0 <= i < graph.n:
            raise GraphValidationError(f"coalition index {i} outside feature space")
    in_set = coalition.in_set
    factors = []
    for cid, comp in enumerate(graph.components):
        targets = comp.members - in_set
        if not targets:
            continue
        parents: set[int] = set()
        for p in comp.parents:
            parents.update(graph.components[p].members)
        fixed = set(parents & in_set)
        if not comp.confounded:
            fixed |= comp.members & in_set
        factors.append(
            Factor(
                component=cid,
                targets=tuple(sorted(targets)),
                sampled_parents=tuple(sorted(parents - in_set)),
                fixed=tuple(sorted(fixed)),
                confounded=comp.confounded,
            )
        )
    return FactorPlan(tuple(factors))


def is_consistent_permutation(graph: ChainGraph, perm: Sequence[int]) -> bool:
    """True iff every feature in a strict-ancestor component precedes the
    features of the descendant component. Features within one component are
    mutually unconstrained."""
    position = {f: k for k, f in enumerate(perm)}
    if set(position) != set(range(graph.n)):
        raise GraphValidationError("perm is not a permutation of the feature indices")
    for j in range(graph.n):
        pj = position[j]
        for i in graph.ancestor_features(j):
            if position[i] > pj:
                return False
    return True


# --- file format -----------------------------------------------------------

def graph_to_dict(graph: ChainGraph) -> dict:
    features = []
    for name, kind in zip(graph.feature_space.names, graph.feature_space.kinds):
        entry: dict = {"name": name, "kind": kind.kind}
        if kind.levels is not None:
            entry["levels"] = list(kind.levels)
        features.append(entry)
    components = []
    for comp in graph.components:
        components.append(
            {
                "members": [graph.feature_space.names[i] for i in sorted(comp.members)],
                "confounded": comp.confounded,
                "parents": sorted(comp.parents),
            }
        )
    return {"features": features, "components": components}


def graph_from_dict(spec: dict) -> ChainGraph:
    try:
        raw_features = spec["features"]
        raw_components = spec["components"]
    except (KeyError, TypeError) as exc:
        raise GraphValidationError(f"graph spec missing section: {exc}") from exc
    names, kinds = [], []
    for entry in raw_features:
        names.append(entry["name"])
        levels = entry.get("levels")
        kinds.append(FeatureKind(entry["kind"], tuple(levels) if levels else None))
    space = FeatureSpace(tuple(names), tuple(kinds))
    order, confounding, parents = [], [], []
    explicit = any("parents" in c for c in raw_components)
    for comp in raw_components:
        order.append([space.index(n) for n in comp["members"]])
        confounding.append(bool(comp.get("confounded", False)))
        parents.append(comp.get("parents", []))
    return build_chain_graph(
        space, order, confounding, parents if explicit else None
    )


def load_graph(path: str | Path) -> ChainGraph:
    with open(path) as fh:
        return graph_from_dict(json.load(fh))


def save_graph(graph: ChainGraph, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(graph_to_dict(graph), fh, indent=2)
        fh.write("\n")
