"""Value functions v(S) = E[f(X) | do(x_S)] under three conditioning regimes.

The conditioning regime is realized uniformly by mapping each variant to an
effective chain graph: no conditioning uses a single confounded component
(interventions reduce to the marginal), conditioning by observation uses a
single non-confounded component, and conditioning by intervention uses the
user's graph. Monte Carlo estimation samples from the induced factor plan;
two exact backends cover linear predictors over Gaussian features and fully
discrete models given the joint probability table.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .distributions import (
    DiscreteJointModel,
    GaussianModel,
    sample_interventional,
)
from .errors import ConfigError, ZeroProbabilityError
from .graph import (
    ChainGraph,
    Coalition,
    FeatureSpace,
    intervention_factorization,
    single_component_graph,
)
from .predictors import LinearModel
from .rng import RngStream, coalition_label


class Variant(str, enum.Enum):
    MARGINAL = "marginal"
    CONDITIONAL = "conditional"
    CAUSAL = "causal"


@dataclass(frozen=True)
class SamplerConfig:
    n_samples: int = 1000
    seed: int = 0
    antithetic: bool = False
    independent_within_confounded: bool = False

    def __post_init__(self):
        if self.n_samples < 1:
            raise ConfigError("n_samples must be >= 1")


@dataclass(frozen=True)
class ValueEstimate:
    value: float
    stderr: float
    n_samples: int
    exact: bool

    def __post_init__(self):
        if self.exact and self.stderr != 0.0:
            raise ValueError("exact estimates carry zero stderr")


def effective_graph(
    variant: Variant, graph: ChainGraph | None, space: FeatureSpace
) -> ChainGraph:
    variant = Variant(variant)
    if variant is Variant.CAUSAL:
        if graph is None:
            raise ConfigError("the causal variant requires a chain graph")
        return graph
    confounded = variant is Variant.MARGINAL
    return single_component_graph(space, confounded=confounded)


class ValueFunction:
    """Memoized accessor for v(S) and the clamped mixed terms.

    ``value(in_set, clamp)`` evaluates E[f(X_rest, x_{S u C}) | do(x_S)]:
    features in the clamp set C are fixed in the predictor input but not
    intervened upon in the sampler. ``clamp`` empty gives the plain v(S).
    """

    def __init__(self, space: FeatureSpace, x):
        self.space = space
        self.x = x
        self._memo: dict = {}

    def value(self, in_set, clamp=frozenset()) -> ValueEstimate:
        key = (frozenset(in_set), frozenset(clamp))
        hit = self._memo.get(key)
        if hit is None:
            hit = self._evaluate(*key)
            self._memo[key] = hit
        return hit

    def _evaluate(self, in_set, clamp) -> ValueEstimate:
        raise NotImplementedError


class MonteCarloValueFunction(ValueFunction):
    def __init__(
        self,
        variant: Variant,
        graph: ChainGraph | None,
        model,
        predictor,
        x,
        config: SamplerConfig,
    ):
        if isinstance(model, DiscreteJointModel):
            space = model.feature_space
        else:
            space = model.feature_space
        super().__init__(space, x)
        self.variant = Variant(variant)
        self.graph = effective_graph(self.variant, graph, space)
        self.model = model
        self.predictor = predictor
        self.config = config

    def _predict(self, batch: np.ndarray) -> np.ndarray:
        return np.asarray(self.predictor.predict(batch), dtype=float)

    def _evaluate(self, in_set, clamp) -> ValueEstimate:
        n = self.space.n
        fixed = in_set | clamp
        if len(fixed) == n:
            row = np.array([self.x], dtype=object if self.space.categorical_indices else float)
            fx = float(self._predict(row)[0])
            return ValueEstimate(fx, 0.0, 1, exact=True)
        if self.variant is Variant.MARGINAL:
            # one shared stream of joint draws for every coalition, so that
            # clamping i reproduces bit-identical inputs to v(S u i)
            sample_set: frozenset[int] = frozenset()
        else:
            sample_set = in_set
        coalition = Coalition.from_instance(sample_set, self.x)
        plan = intervention_factorization(self.graph, coalition)
        rng = RngStream(self.config.seed, coalition_label(sample_set))
        draws = sample_interventional(
            self.graph,
            self.model,
            plan,
            coalition,
            rng,
            n_samples=self.config.n_samples,
            independent_within_confounded=self.config.independent_within_confounded,
            antithetic=self.config.antithetic,
        )
        for i in fixed:
            draws[:, i] = self.x[i]
        outputs = self._predict(draws)
        k = len(outputs)
        value = float(outputs.mean())
        stderr = float(outputs.std(ddof=1) / np.sqrt(k)) if k > 1 else 0.0
        return ValueEstimate(value, stderr, k, exact=False)


class LinearExactValueFunction(ValueFunction):
    """Closed-form values for linear predictors over Gaussian features, by
    forward propagation of interventional means through the factor plan."""

    def __init__(
        self,
        variant: Variant,
        graph: ChainGraph | None,
        model: GaussianModel,
        linear: LinearModel,
        x,
    ):
        space = model.feature_space
        if space.categorical_indices:
            raise ConfigError("exact linear values require all-continuous features")
        if len(linear) != space.n:
            raise ConfigError("linear coefficient length must match feature count")
        super().__init__(space, x)
        self.variant = Variant(variant)
        self.graph = effective_graph(self.variant, graph, space)
        self.model = model
        self.linear = linear

    def interventional_means(self, in_set) -> dict[int, float]:
        """E[X_k | do(x_S)] for every out-of-coalition feature k."""
        coalition = Coalition.from_instance(in_set, self.x)
        plan = intervention_factorization(self.graph, coalition)
        means: dict[int, float] = {}
        for factor in plan.factors:
            cond_idx = tuple(sorted(factor.sampled_parents + factor.fixed))
            mu_a, mu_b, k, _ = self.model._regression(factor.targets, cond_idx)
            vals = np.array(
                [
                    means[i] if i in factor.sampled_parents else float(self.x[i])
                    for i in cond_idx
                ]
            )
            m = mu_a + k @ (vals - mu_b) if cond_idx else mu_a
            for col, i in enumerate(factor.targets):
                means[i] = float(m[col])
        return means

    def _evaluate(self, in_set, clamp) -> ValueEstimate:
        means = self.interventional_means(in_set)
        beta = self.linear.coefficients
        total = self.linear.intercept
        for i in range(self.space.n):
            if i in in_set or i in clamp:
                total += beta[i] * float(self.x[i])
            else:
                total += beta[i] * means[i]
        return ValueEstimate(float(total), 0.0, 0, exact=True)


class DiscreteExactValueFunction(ValueFunction):
    """Brute-force values for all-categorical features: the factor plan's
    conditionals are materialized from the joint table and multiplied out."""

    def __init__(
        self,
        variant: Variant,
        graph: ChainGraph | None,
        model: DiscreteJointModel,
        predictor,
        x,
    ):
        super().__init__(model.feature_space, x)
        self.variant = Variant(variant)
        self.graph = effective_graph(self.variant, graph, model.feature_space)
        self.model = model
        self.predictor = predictor

    def _evaluate(self, in_set, clamp) -> ValueEstimate:
        space = self.space
        coalition = Coalition.from_instance(in_set, self.x)
        plan = intervention_factorization(self.graph, coalition)
        # weighted assignments of the out-of-coalition features
        assignments: list[tuple[dict, float]] = [({}, 1.0)]
        for factor in plan.factors:
            cond_idx = tuple(sorted(factor.sampled_parents + factor.fixed))
            grown = []
            for partial, p in assignments:
                given = {
                    i: partial[i] if i in factor.sampled_parents else self.x[i]
                    for i in cond_idx
                }
                combos, probs = self.model._conditional(factor.targets, given)
                for combo, q in zip(combos, probs):
                    if q == 0.0:
                        continue
                    ext = dict(partial)
                    for col, i in enumerate(factor.targets):
                        ext[i] = space.kinds[i].levels[combo[col]]
                    grown.append((ext, p * q))
            assignments = grown
        rows = np.empty((len(assignments), space.n), dtype=object)
        weights = np.empty(len(assignments))
        for r, (assign, p) in enumerate(assignments):
            for i in range(space.n):
                if i in in_set or i in clamp:
                    rows[r, i] = self.x[i]
                else:
                    rows[r, i] = assign[i]
            weights[r] = p
        outputs = np.asarray(self.predictor.predict(rows), dtype=float)
        return ValueEstimate(float(outputs @ weights), 0.0, 0, exact=True)


# --- spec-level convenience wrappers --------------------------------------

def _coalition_instance(coalition: Coalition, n: int) -> list:
    x: list = [None] * n
    for i, v in coalition.values.items():
        x[i] = v
    return x


def estimate_value(
    coalition: Coalition,
    variant: Variant,
    graph: ChainGraph | None,
    model,
    predictor,
    config: SamplerConfig,
) -> ValueEstimate:
    """Monte Carlo estimate of the value function for one coalition."""
    space = model.feature_space
    x = _coalition_instance(coalition, space.n)
    vf = MonteCarloValueFunction(variant, graph, model, predictor, x, config)
    return vf.value(coalition.in_set)


def exact_value_linear(
    coalition: Coalition,
    variant: Variant,
    graph: ChainGraph | None,
    model: GaussianModel,
    linear: LinearModel,
) -> ValueEstimate:
    x = _coalition_instance(coalition, model.feature_space.n)
    vf = LinearExactValueFunction(variant, graph, model, linear, x)
    return vf.value(coalition.in_set)


def exact_value_discrete(
    coalition: Coalition,
    variant: Variant,
    graph: ChainGraph | None,
    joint_table: DiscreteJointModel,
    predictor,
) -> ValueEstimate:
    x = _coalition_instance(coalition, joint_table.feature_space.n)
    vf = DiscreteExactValueFunction(variant, graph, joint_table, predictor, x)
    return vf.value(coalition.in_set)
