"""Closed-form reference attributions for the two-feature toy structures and
the XOR study. These double as user-facing demos and as the oracle side of
the acceptance tests."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .distributions import DiscreteJointModel, GaussianModel
from .errors import ConfigError
from .graph import ChainGraph, FeatureSpace, build_chain_graph, single_component_graph
from .predictors import LinearModel, TableModel
from .values import Variant


class ToyStructure(str, enum.Enum):
    CHAIN = "chain"
    FORK = "fork"
    CONFOUNDER = "confounder"
    CYCLE = "cycle"


@dataclass(frozen=True)
class ToyParams:
    """Two correlated features feeding a linear predictor.

    The observational law is symmetric: each feature has mean xbar_i and the
    cross regression slope is alpha both ways (unit-variance Gaussian
    realization with correlation alpha).
    """

    alpha: float
    beta1: float
    beta2: float
    x1: float
    x2: float
    xbar1: float = 0.0
    xbar2: float = 0.0


@dataclass(frozen=True)
class EffectSplit:
    direct: float
    indirect: float

    @property
    def total(self) -> float:
        return self.direct + self.indirect


def toy_interventional_reduction(
    structure: ToyStructure, intervene_on: int
) -> tuple[str, int]:
    """Which observational object E[X_other | do(x_i)] reduces to, with the
    applicable rewrite rule number (2: action/observation exchange, 3:
    action deletion)."""
    structure = ToyStructure(structure)
    if intervene_on not in (1, 2):
        raise ConfigError("toy structures have features 1 and 2")
    table = {
        (ToyStructure.CHAIN, 1): ("conditional", 2),
        (ToyStructure.CHAIN, 2): ("marginal", 3),
        (ToyStructure.FORK, 1): ("marginal", 3),
        (ToyStructure.FORK, 2): ("conditional", 2),
        (ToyStructure.CONFOUNDER, 1): ("marginal", 3),
        (ToyStructure.CONFOUNDER, 2): ("marginal", 3),
        (ToyStructure.CYCLE, 1): ("conditional", 2),
        (ToyStructure.CYCLE, 2): ("conditional", 2),
    }
    return table[(structure, intervene_on)]


def _expectation_given(
    structure: ToyStructure, variant: Variant, other: int, params: ToyParams
) -> float:
    """E[X_other | conditioning on the first-placed feature] per variant."""
    variant = Variant(variant)
    xbar = (params.xbar1, params.xbar2)
    x = (params.x1, params.x2)
    first = 3 - other
    conditional = xbar[other - 1] + params.alpha * (x[first - 1] - xbar[first - 1])
    if variant is Variant.MARGINAL:
        return xbar[other - 1]
    if variant is Variant.CONDITIONAL:
        return conditional
    reduction, _ = toy_interventional_reduction(structure, first)
    return conditional if reduction == "conditional" else xbar[other - 1]


def toy_contributions(
    structure: ToyStructure, variant: Variant, perm: tuple[int, int], params: ToyParams
) -> dict[int, EffectSplit]:
    """Per-permutation direct/indirect contributions for one toy structure."""
    first, second = perm
    beta = (params.beta1, params.beta2)
    x = (params.x1, params.x2)
    xbar = (params.xbar1, params.xbar2)
    e_second = _expectation_given(structure, variant, second, params)
    return {
        first: EffectSplit(
            direct=beta[first - 1] * (x[first - 1] - xbar[first - 1]),
            indirect=beta[second - 1] * (e_second - xbar[second - 1]),
        ),
        second: EffectSplit(
            direct=beta[second - 1] * (x[second - 1] - e_second),
            indirect=0.0,
        ),
    }


def toy_shapley(
    structure: ToyStructure,
    variant: Variant,
    symmetry: str,
    params: ToyParams,
) -> dict[int, EffectSplit]:
    """Exact per-feature (direct, indirect) attributions.

    Asymmetric weighting restricts to the causally ordered permutation for
    the chain (1 before 2) and the fork (2 before 1); the confounder and the
    cycle form a single component, so both permutations stay in play and the
    asymmetric values coincide with the symmetric ones.
    """
    structure = ToyStructure(structure)
    variant = Variant(variant)
    if symmetry not in ("symmetric", "asymmetric"):
        raise ConfigError(f"unknown symmetry {symmetry!r}")
    if symmetry == "asymmetric" and structure is ToyStructure.CHAIN:
        perms = [(1, 2)]
    elif symmetry == "asymmetric" and structure is ToyStructure.FORK:
        perms = [(2, 1)]
    else:
        perms = [(1, 2), (2, 1)]
    acc = {1: [0.0, 0.0], 2: [0.0, 0.0]}
    w = 1.0 / len(perms)
    for perm in perms:
        contrib = toy_contributions(structure, variant, perm, params)
        for i in (1, 2):
            acc[i][0] += w * contrib[i].direct
            acc[i][1] += w * contrib[i].indirect
    return {i: EffectSplit(direct=acc[i][0], indirect=acc[i][1]) for i in (1, 2)}


def toy_gaussian_realization(
    structure: ToyStructure, params: ToyParams
) -> tuple[ChainGraph, GaussianModel, LinearModel]:
    """A Gaussian model and chain graph whose engine attributions must match
    toy_shapley: means xbar, unit variances, covariance alpha."""
    structure = ToyStructure(structure)
    space = FeatureSpace.continuous(("x1", "x2"))
    mean = np.array([params.xbar1, params.xbar2])
    cov = np.array([[1.0, params.alpha], [params.alpha, 1.0]])
    model = GaussianModel(space, mean, cov, {}, regularization=0.0)
    if structure is ToyStructure.CHAIN:
        graph = build_chain_graph(space, [{0}, {1}], [False, False])
    elif structure is ToyStructure.FORK:
        graph = build_chain_graph(space, [{1}, {0}], [False, False])
    elif structure is ToyStructure.CONFOUNDER:
        graph = single_component_graph(space, confounded=True)
    else:
        graph = single_component_graph(space, confounded=False)
    linear = LinearModel(0.0, (params.beta1, params.beta2))
    return graph, model, linear


# --- XOR study --------------------------------------------------------------

class XorStructure(str, enum.Enum):
    NONE = "none"
    CHAIN_12 = "chain-12"
    CHAIN_21 = "chain-21"
    CONFOUNDER = "confounder"
    MUTUAL = "mutual"


@dataclass(frozen=True)
class XorSpec:
    """Joint law p00 = p11 = (1+eps)/4, p01 = p10 = (1-eps)/4 with an assumed
    causal structure between the two binary features."""

    epsilon: float
    structure: XorStructure = XorStructure.NONE
    instance: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ConfigError("epsilon must lie in [0, 1)")
        object.__setattr__(self, "structure", XorStructure(self.structure))

    def joint(self) -> np.ndarray:
        same = (1.0 + self.epsilon) / 4.0
        diff = (1.0 - self.epsilon) / 4.0
        return np.array([[same, diff], [diff, same]])


def xor_feature_space() -> FeatureSpace:
    return FeatureSpace.binary(("x1", "x2"))


def xor_joint_model(spec: XorSpec) -> DiscreteJointModel:
    return DiscreteJointModel(xor_feature_space(), spec.joint())


def xor_table_model() -> TableModel:
    return TableModel.from_function(xor_feature_space(), lambda a, b: a ^ b)


def xor_graph(structure: XorStructure) -> ChainGraph:
    space = xor_feature_space()
    structure = XorStructure(structure)
    if structure is XorStructure.CHAIN_12:
        return build_chain_graph(space, [{0}, {1}], [False, False])
    if structure is XorStructure.CHAIN_21:
        return build_chain_graph(space, [{1}, {0}], [False, False])
    if structure is XorStructure.CONFOUNDER:
        return single_component_graph(space, confounded=True)
    if structure is XorStructure.MUTUAL:
        return single_component_graph(space, confounded=False)
    raise ConfigError("structure 'none' has no chain graph to intervene on")


def _xor_single_values(spec: XorSpec, variant: Variant) -> tuple[float, float]:
    """(v({1}), v({2})) at the spec instance under the chosen regime."""
    p = spec.joint()
    a, b = spec.instance
    f = lambda i, j: float(i ^ j)

    def marginal_one():
        p2 = p.sum(axis=0)
        return sum(p2[j] * f(a, j) for j in (0, 1))

    def marginal_two():
        p1 = p.sum(axis=1)
        return sum(p1[i] * f(i, b) for i in (0, 1))

    def conditional_one():
        row = p[a] / p[a].sum()
        return sum(row[j] * f(a, j) for j in (0, 1))

    def conditional_two():
        col = p[:, b] / p[:, b].sum()
        return sum(col[i] * f(i, b) for i in (0, 1))

    variant = Variant(variant)
    if variant is Variant.MARGINAL:
        return marginal_one(), marginal_two()
    if variant is Variant.CONDITIONAL:
        return conditional_one(), conditional_two()
    s = spec.structure
    if s is XorStructure.NONE:
        raise ConfigError("causal XOR values need an assumed structure")
    if s is XorStructure.CHAIN_12:
        return conditional_one(), marginal_two()
    if s is XorStructure.CHAIN_21:
        return marginal_one(), conditional_two()
    if s is XorStructure.CONFOUNDER:
        return marginal_one(), marginal_two()
    return conditional_one(), conditional_two()


def xor_shapley(spec: XorSpec, variant: Variant, symmetry: str) -> tuple[float, float]:
    """Theoretical XOR attributions for the spec instance."""
    if symmetry not in ("symmetric", "asymmetric"):
        raise ConfigError(f"unknown symmetry {symmetry!r}")
    p = spec.joint()
    a, b = spec.instance
    v_empty = float(sum(p[i, j] * (i ^ j) for i in (0, 1) for j in (0, 1)))
    v_full = float(a ^ b)
    v1, v2 = _xor_single_values(spec, variant)
    if symmetry == "asymmetric" and spec.structure is XorStructure.CHAIN_12:
        return v1 - v_empty, v_full - v1
    if symmetry == "asymmetric" and spec.structure is XorStructure.CHAIN_21:
        return v_full - v2, v2 - v_empty
    phi1 = 0.5 * (v1 - v_empty) + 0.5 * (v_full - v2)
    phi2 = 0.5 * (v2 - v_empty) + 0.5 * (v_full - v1)
    return phi1, phi2
