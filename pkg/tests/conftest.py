"""Shared helpers for the test suite: random discrete setups and small
Gaussian fixtures."""

import itertools

import numpy as np

from chainshap import DiscreteJointModel, FeatureKind, FeatureSpace, GaussianModel, TableModel


def random_feature_space(gen: np.random.Generator, n: int) -> FeatureSpace:
    names = tuple(f"x{i + 1}" for i in range(n))
    return FeatureSpace(names, tuple(FeatureKind("categorical", (0, 1)) for _ in names))


def random_joint_model(gen: np.random.Generator, n: int) -> DiscreteJointModel:
    """Random strictly positive joint table over n binary features."""
    space = random_feature_space(gen, n)
    raw = gen.dirichlet(np.ones(2**n)) + 1e-3
    table = (raw / raw.sum()).reshape((2,) * n)
    return DiscreteJointModel(space, table)


def random_table_predictor(gen: np.random.Generator, space: FeatureSpace) -> TableModel:
    levels = [k.levels for k in space.kinds]
    return TableModel(
        {combo: float(gen.normal()) for combo in itertools.product(*levels)}
    )


def random_instance(gen: np.random.Generator, space: FeatureSpace) -> list:
    return [k.levels[int(gen.integers(len(k.levels)))] for k in space.kinds]


def random_pd_covariance(gen: np.random.Generator, d: int) -> np.ndarray:
    a = gen.normal(size=(d, d))
    return a @ a.T + d * np.eye(d)


def random_gaussian_model(gen: np.random.Generator, d: int) -> GaussianModel:
    space = FeatureSpace.continuous(tuple(f"x{i + 1}" for i in range(d)))
    mean = gen.normal(size=d)
    cov = random_pd_covariance(gen, d)
    return GaussianModel(space, mean, cov, {}, regularization=0.0)
