"""Aggregation of value functions into Shapley values under a permutation
distribution, with per-permutation contributions and the split of each
contribution into direct and indirect effects."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import EnumerationCapError, GraphValidationError
from .graph import ChainGraph, is_consistent_permutation
from .rng import RngStream
from .values import ValueEstimate, ValueFunction, Variant

EXACT_ENUMERATION_CAP = 10

Permutation = tuple[int, ...]


class PermutationMode(str, enum.Enum):
    EXACT_UNIFORM = "exact-uniform"
    EXACT_ASYMMETRIC = "exact-asymmetric"
    SAMPLED_UNIFORM = "sampled-uniform"
    SAMPLED_ASYMMETRIC = "sampled-asymmetric"

    @property
    def asymmetric(self) -> bool:
        return self in (self.EXACT_ASYMMETRIC, self.SAMPLED_ASYMMETRIC)

    @property
    def sampled(self) -> bool:
        return self in (self.SAMPLED_UNIFORM, self.SAMPLED_ASYMMETRIC)


@dataclass(frozen=True)
class PermutationDistribution:
    mode: PermutationMode
    n_permutations: int | None = None
    graph: ChainGraph | None = None
    seed: int = 0

    def __post_init__(self):
        mode = PermutationMode(self.mode)
        object.__setattr__(self, "mode", mode)
        if mode.asymmetric and self.graph is None:
            raise GraphValidationError("asymmetric modes require a chain graph")
        if mode.sampled and (self.n_permutations is None or self.n_permutations < 1):
            raise GraphValidationError("sampled modes require n_permutations >= 1")


@dataclass(frozen=True)
class ContributionRecord:
    feature: int
    perm: Permutation
    total: float
    direct: float | None = None
    indirect: float | None = None
    total_stderr: float = 0.0
    direct_stderr: float | None = None
    indirect_stderr: float | None = None


@dataclass(frozen=True)
class AttributionReport:
    feature_names: tuple[str, ...]
    feature_values: tuple
    phi: tuple[float, ...]
    stderr: tuple[float, ...]
    direct: tuple[float, ...] | None
    indirect: tuple[float, ...] | None
    f0: float
    f0_stderr: float
    fx: float
    variant: str
    mode: str
    n_permutations: int | None
    n_samples: int | None
    seed: int | None

    @property
    def symmetry(self) -> str:
        return "asymmetric" if PermutationMode(self.mode).asymmetric else "symmetric"

    @property
    def efficiency_gap(self) -> float:
        return sum(self.phi) - (self.fx - self.f0)


def _plain(value):
    """Strip numpy scalar wrappers so reports serialize cleanly."""
    if isinstance(value, np.generic):
        return value.item()
    return value


def _prefix(perm: Permutation, i: int) -> frozenset[int]:
    pos = perm.index(i)
    return frozenset(perm[:pos])


def contribution(perm: Permutation, i: int, values: ValueFunction) -> ContributionRecord:
    """Per-permutation contribution: v(predecessors + i) - v(predecessors)."""
    before = _prefix(perm, i)
    after = before | {i}
    va = values.value(after)
    vb = values.value(before)
    return ContributionRecord(
        feature=i,
        perm=tuple(perm),
        total=va.value - vb.value,
        total_stderr=math.hypot(va.stderr, vb.stderr),
    )


def decompose_effects(perm: Permutation, i: int, values: ValueFunction) -> ContributionRecord:
    """Split a contribution into direct and indirect parts.

    The mixed term clamps feature i in the predictor input while still only
    intervening on the predecessors, so direct + indirect = total holds
    exactly record by record.
    """
    before = _prefix(perm, i)
    after = before | {i}
    va = values.value(after)
    vb = values.value(before)
    mixed = values.value(before, clamp=frozenset({i}))
    direct = mixed.value - vb.value
    indirect = va.value - mixed.value
    return ContributionRecord(
        feature=i,
        perm=tuple(perm),
        total=direct + indirect,
        direct=direct,
        indirect=indirect,
        total_stderr=math.hypot(va.stderr, vb.stderr),
        direct_stderr=math.hypot(mixed.stderr, vb.stderr),
        indirect_stderr=math.hypot(va.stderr, mixed.stderr),
    )


# --- permutation supports ---------------------------------------------------

def _required_predecessors(graph: ChainGraph) -> list[frozenset[int]]:
    return [graph.ancestor_features(j) for j in range(graph.n)]


def enumerate_consistent_permutations(graph: ChainGraph) -> Iterator[Permutation]:
    """All permutations where features of strict-ancestor components precede
    the descendant component's features."""
    n = graph.n
    req = _required_predecessors(graph)

    def rec(placed: list[int], placed_set: set[int]):
        if len(placed) == n:
            yield tuple(placed)
            return
        for j in range(n):
            if j not in placed_set and req[j] <= placed_set:
                placed.append(j)
                placed_set.add(j)
                yield from rec(placed, placed_set)
                placed.pop()
                placed_set.remove(j)

    yield from rec([], set())


def sample_consistent_permutation(graph: ChainGraph, gen: np.random.Generator) -> Permutation:
    """Random consistent permutation by uniform tie-breaking among currently
    available features. Covers the full support; not exactly uniform over it."""
    n = graph.n
    req = _required_predecessors(graph)
    placed: list[int] = []
    placed_set: set[int] = set()
    while len(placed) < n:
        avail = [j for j in range(n) if j not in placed_set and req[j] <= placed_set]
        j = avail[int(gen.integers(len(avail)))]
        placed.append(j)
        placed_set.add(j)
    return tuple(placed)


def sample_consistent_permutation_rejection(
    graph: ChainGraph, gen: np.random.Generator, max_tries: int = 1_000_000
) -> Permutation:
    """Exactly uniform over the consistent support, by rejection. Intended for
    verification at small n only."""
    for _ in range(max_tries):
        perm = tuple(int(v) for v in gen.permutation(graph.n))
        if is_consistent_permutation(graph, perm):
            return perm
    raise EnumerationCapError("rejection sampling failed to find a consistent permutation")


# --- aggregation ------------------------------------------------------------

def _exact_prefix_weights(
    dist: PermutationDistribution, n: int
) -> dict[int, list[tuple[frozenset[int], float]]]:
    """Per feature, the distribution of predecessor sets over the support.

    For the uniform mode this is the classical subset weighting; for the
    asymmetric mode prefix sets are counted over the consistent support.
    Aggregating over prefix sets instead of raw permutations keeps the cost
    at the number of distinct coalitions.
    """
    if n > EXACT_ENUMERATION_CAP:
        raise EnumerationCapError(
            f"exact enumeration capped at {EXACT_ENUMERATION_CAP} features (got {n})"
        )
    out: dict[int, list[tuple[frozenset[int], float]]] = {}
    if dist.mode is PermutationMode.EXACT_UNIFORM:
        fact = [math.factorial(k) for k in range(n + 1)]
        for i in range(n):
            entries = []
            others = [j for j in range(n) if j != i]
            for k in range(n):
                w = fact[k] * fact[n - k - 1] / fact[n]
                for subset in itertools.combinations(others, k):
                    entries.append((frozenset(subset), w))
            out[i] = entries
        return out
    counts: dict[int, dict[frozenset[int], int]] = {i: {} for i in range(n)}
    total = 0
    for perm in enumerate_consistent_permutations(dist.graph):
        total += 1
        seen: set[int] = set()
        for j in perm:
            key = frozenset(seen)
            counts[j][key] = counts[j].get(key, 0) + 1
            seen.add(j)
    assert total > 0, "acyclic graphs always admit a consistent permutation"
    for i in range(n):
        out[i] = [(s, c / total) for s, c in sorted(counts[i].items(), key=repr)]
    return out


def shapley_values(
    dist: PermutationDistribution,
    values: ValueFunction,
    feature_names: Sequence[str] | None = None,
    decompose: bool = False,
    n_samples: int | None = None,
    seed: int | None = None,
) -> AttributionReport:
    """Aggregate the value function into per-feature attributions under the
    permutation distribution, optionally with the direct/indirect split."""
    n = values.space.n
    names = tuple(feature_names) if feature_names else values.space.names
    full = frozenset(range(n))
    fx_est = values.value(full)
    f0_est = values.value(frozenset())
    if dist.mode.sampled:
        report = _sampled_report(dist, values, decompose)
    else:
        report = _exact_mode_report(dist, values, decompose)
    phi, stderr, direct, indirect = report
    return AttributionReport(
        feature_names=names,
        feature_values=tuple(_plain(v) for v in values.x),
        phi=tuple(float(v) for v in phi),
        stderr=tuple(float(v) for v in stderr),
        direct=tuple(float(v) for v in direct) if decompose else None,
        indirect=tuple(float(v) for v in indirect) if decompose else None,
        f0=float(f0_est.value),
        f0_stderr=float(f0_est.stderr),
        fx=float(fx_est.value),
        variant=str(getattr(values, "variant", Variant.CAUSAL).value),
        mode=dist.mode.value,
        n_permutations=dist.n_permutations,
        n_samples=n_samples,
        seed=seed,
    )


def _exact_mode_report(dist, values, decompose):
    n = values.space.n
    weights = _exact_prefix_weights(dist, n)
    phi = np.zeros(n)
    stderr = np.zeros(n)
    direct = np.zeros(n)
    indirect = np.zeros(n)
    for i in range(n):
        for prefix, w in weights[i]:
            after = values.value(prefix | {i})
            before = values.value(prefix)
            phi[i] += w * (after.value - before.value)
            # conservative: correlations between shared estimates ignored
            stderr[i] += w * math.hypot(after.stderr, before.stderr)
            if decompose:
                mixed = values.value(prefix, clamp=frozenset({i}))
                direct[i] += w * (mixed.value - before.value)
                indirect[i] += w * (after.value - mixed.value)
    return phi, stderr, direct, indirect


def _sampled_report(dist, values, decompose):
    n = values.space.n
    gen = RngStream(dist.seed, "permutations").generator
    m = dist.n_permutations
    totals = np.zeros((m, n))
    directs = np.zeros((m, n))
    noise = np.zeros((m, n))
    for r in range(m):
        if dist.mode is PermutationMode.SAMPLED_ASYMMETRIC:
            perm = sample_consistent_permutation(dist.graph, gen)
        else:
            perm = tuple(int(v) for v in gen.permutation(n))
        for i in range(n):
            rec = decompose_effects(perm, i, values) if decompose else contribution(perm, i, values)
            totals[r, i] = rec.total
            noise[r, i] = rec.total_stderr
            if decompose:
                directs[r, i] = rec.direct
    phi = totals.mean(axis=0)
    perm_se = totals.std(axis=0, ddof=1) / math.sqrt(m) if m > 1 else np.zeros(n)
    value_se = noise.mean(axis=0)
    stderr = np.sqrt(perm_se**2 + value_se**2)
    direct = directs.mean(axis=0)
    indirect = phi - direct
    return phi, stderr, direct, indirect
