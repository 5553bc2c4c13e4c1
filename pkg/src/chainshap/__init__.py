"""Causal Shapley value attributions for black-box models, with value
functions that condition by intervention on a causal chain graph."""

from .distributions import (
    DataMatrix,
    DiscreteJointModel,
    GaussianModel,
    condition_gaussian,
    fit_gaussian,
    load_csv,
    load_gaussian,
    sample_interventional,
    save_gaussian,
)
from .errors import (
    ChainShapError,
    ConfigError,
    EnumerationCapError,
    GraphValidationError,
    ModelFitError,
    PredictorError,
    SingularConditioningError,
    ZeroProbabilityError,
)
from .graph import (
    ChainComponent,
    ChainGraph,
    Coalition,
    FactorPlan,
    FeatureKind,
    FeatureSpace,
    build_chain_graph,
    intervention_factorization,
    is_consistent_permutation,
    load_graph,
    save_graph,
    single_component_graph,
)
from .predictors import ExternalPredictor, LinearModel, TableModel
from .rng import RngStream
from .shapley import (
    AttributionReport,
    ContributionRecord,
    PermutationDistribution,
    PermutationMode,
    contribution,
    decompose_effects,
    shapley_values,
)
from .values import (
    DiscreteExactValueFunction,
    LinearExactValueFunction,
    MonteCarloValueFunction,
    SamplerConfig,
    ValueEstimate,
    Variant,
    estimate_value,
    exact_value_discrete,
    exact_value_linear,
)

__version__ = "0.1.0"
