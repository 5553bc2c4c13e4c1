"""Observational distribution models and interventional sampling.

Continuous features are modelled jointly as a multivariate Gaussian fitted
from training data; categorical features carry empirical level frequencies
and are supported only where an interventional query reduces to their
marginal (targets of parentless confounded components). A fully discrete
joint probability table is also provided, mainly as the exact brute-force
backend for small feature spaces.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ModelFitError, SingularConditioningError, ZeroProbabilityError
from .graph import (
    CATEGORICAL,
    CONTINUOUS,
    ChainGraph,
    Coalition,
    FactorPlan,
    FeatureKind,
    FeatureSpace,
)
from .rng import RngStream


@dataclass(frozen=True)
class DataMatrix:
    """Training observations; continuous entries float, categorical entries
    valid levels of their feature."""

    feature_space: FeatureSpace
    rows: np.ndarray  # (m, n), object dtype when categorical features present

    def __post_init__(self):
        if self.rows.ndim != 2 or self.rows.shape[1] != self.feature_space.n:
            raise ModelFitError(
                f"data shape {self.rows.shape} does not match "
                f"{self.feature_space.n} features"
            )
        for j, kind in enumerate(self.feature_space.kinds):
            col = self.rows[:, j]
            if kind.kind == CATEGORICAL:
                bad = {v for v in col if v not in kind.levels}
                if bad:
                    raise ModelFitError(
                        f"column {self.feature_space.names[j]!r} contains "
                        f"unknown levels {sorted(map(str, bad))}"
                    )
            else:
                vals = col.astype(float)
                if not np.all(np.isfinite(vals)):
                    raise ModelFitError(
                        f"column {self.feature_space.names[j]!r} has missing or "
                        "non-finite values"
                    )

    @property
    def m(self) -> int:
        return self.rows.shape[0]

    def continuous_block(self) -> np.ndarray:
        idx = self.feature_space.continuous_indices
        return self.rows[:, idx].astype(float)


class GaussianModel:
    """Fitted observational distribution: Gaussian block over the continuous
    features plus empirical marginals for the categorical ones."""

    def __init__(
        self,
        feature_space: FeatureSpace,
        mean: np.ndarray,
        covariance: np.ndarray,
        categorical_marginals: Mapping[int, Mapping[object, float]],
        regularization: float,
    ):
        self.feature_space = feature_space
        self.gauss_indices = feature_space.continuous_indices
        self.mean = np.asarray(mean, dtype=float)
        self.covariance = np.asarray(covariance, dtype=float)
        self.categorical_marginals = {
            i: dict(tbl) for i, tbl in categorical_marginals.items()
        }
        self.regularization = float(regularization)
        d = len(self.gauss_indices)
        if self.mean.shape != (d,) or self.covariance.shape != (d, d):
            raise ModelFitError("mean/covariance shape mismatch with continuous block")
        if d and not np.allclose(self.covariance, self.covariance.T, atol=1e-10):
            raise ModelFitError("covariance must be symmetric")
        for i, tbl in self.categorical_marginals.items():
            if abs(sum(tbl.values()) - 1.0) > 1e-9:
                raise ModelFitError(
                    f"categorical marginal for feature {i} does not sum to 1"
                )
        self._pos = {f: k for k, f in enumerate(self.gauss_indices)}
        self._cond_cache: dict = {}
        if d:
            try:
                np.linalg.cholesky(self.covariance)
            except np.linalg.LinAlgError:
                eigmin = float(np.linalg.eigvalsh(self.covariance)[0])
                raise ModelFitError(
                    "covariance not positive definite after regularization "
                    f"(smallest eigenvalue {eigmin:.3e})"
                )

    # regression of block a on block b, both tuples of *feature* indices
    def _regression(self, a: tuple[int, ...], b: tuple[int, ...]):
        key = (a, b)
        hit = self._cond_cache.get(key)
        if hit is not None:
            return hit
        ia = [self._pos[i] for i in a]
        ib = [self._pos[i] for i in b]
        mu_a = self.mean[ia]
        mu_b = self.mean[ib]
        sig_aa = self.covariance[np.ix_(ia, ia)]
        if not ib:
            out = (mu_a, mu_b, np.zeros((len(ia), 0)), sig_aa)
        else:
            sig_bb = self.covariance[np.ix_(ib, ib)]
            sig_ab = self.covariance[np.ix_(ia, ib)]
            try:
                cho = np.linalg.cholesky(sig_bb)
            except np.linalg.LinAlgError:
                raise SingularConditioningError(
                    f"conditioning block for features {b} is singular"
                )
            # K = sig_ab @ inv(sig_bb) via two triangular solves
            tmp = np.linalg.solve(cho, sig_ab.T)
            k = np.linalg.solve(cho.T, tmp).T
            cond_cov = sig_aa - k @ sig_ab.T
            cond_cov = 0.5 * (cond_cov + cond_cov.T)
            out = (mu_a, mu_b, k, cond_cov)
        self._cond_cache[key] = out
        return out


def fit_gaussian(data: DataMatrix, regularization: float | None = None) -> GaussianModel:
    """Fit mean, ML covariance (+ diagonal jitter) and categorical marginals.

    ``regularization=None`` uses the scale-aware default 1e-8 * trace/d.
    """
    if data.m < 2:
        raise ModelFitError(f"need at least 2 rows to fit, got {data.m}")
    if regularization is not None and regularization < 0:
        raise ModelFitError("regularization must be >= 0")
    space = data.feature_space
    block = data.continuous_block()
    d = block.shape[1]
    if d:
        mean = block.mean(axis=0)
        centered = block - mean
        cov = centered.T @ centered / data.m
        if regularization is None:
            regularization = 1e-8 * float(np.trace(cov)) / d
        cov = cov + regularization * np.eye(d)
    else:
        mean = np.zeros(0)
        cov = np.zeros((0, 0))
        regularization = 0.0 if regularization is None else regularization
    marginals = {}
    for j in space.categorical_indices:
        col = data.rows[:, j]
        levels = space.kinds[j].levels
        marginals[j] = {lv: float(np.sum(col == lv)) / data.m for lv in levels}
    return GaussianModel(space, mean, cov, marginals, regularization)


def condition_gaussian(
    model: GaussianModel, given: Mapping[int, float]
) -> tuple[np.ndarray, np.ndarray]:
    """Exact conditional (mean, covariance) of the remaining continuous
    features given fixed values for some of them. The covariance does not
    depend on the given values."""
    b = tuple(sorted(given))
    for i in b:
        if i not in model._pos:
            raise SingularConditioningError(
                f"feature {i} is not part of the continuous Gaussian block"
            )
    a = tuple(i for i in model.gauss_indices if i not in given)
    mu_a, mu_b, k, cond_cov = model._regression(a, b)
    vals = np.array([float(given[i]) for i in b])
    return mu_a + k @ (vals - mu_b), cond_cov


def sample_interventional(
    graph: ChainGraph,
    model,
    plan: FactorPlan,
    coalition: Coalition,
    rng: RngStream,
    n_samples: int = 1,
    independent_within_confounded: bool = False,
    antithetic: bool = False,
) -> np.ndarray:
    """Draw (n_samples, n) feature matrices with the out-of-coalition block
    filled in from the interventional distribution of the plan.

    ``independent_within_confounded`` switches confounded components to the
    literal per-feature draw (each target from its own conditional given the
    parents only), losing within-component correlation among the targets.
    ``antithetic`` mirrors the Gaussian noise of the first half of the draws
    onto the second half.
    """
    if isinstance(model, DiscreteJointModel):
        return model.sample_plan(plan, coalition, rng, n_samples)
    return _sample_gaussian_plan(
        graph, model, plan, coalition, rng, n_samples,
        independent_within_confounded, antithetic,
    )


def _sample_gaussian_plan(
    graph: ChainGraph,
    model: GaussianModel,
    plan: FactorPlan,
    coalition: Coalition,
    rng: RngStream,
    n_samples: int,
    independent_within_confounded: bool,
    antithetic: bool,
) -> np.ndarray:
    space = graph.feature_space
    has_cat = bool(space.categorical_indices)
    out = np.empty((n_samples, space.n), dtype=object if has_cat else float)
    for i, v in coalition.values.items():
        out[:, i] = v
    gen = rng.generator
    for factor in plan.factors:
        cat_targets = [i for i in factor.targets if space.kinds[i].kind == CATEGORICAL]
        cont_targets = tuple(
            i for i in factor.targets if space.kinds[i].kind == CONTINUOUS
        )
        if cat_targets:
            if factor.sampled_parents or factor.fixed or not factor.confounded:
                raise SingularConditioningError(
                    "categorical targets are only supported in parentless "
                    f"confounded components (factor for component {factor.component})"
                )
            for i in cat_targets:
                tbl = model.categorical_marginals[i]
                levels = list(tbl)
                probs = np.array([tbl[lv] for lv in levels])
                idx = gen.choice(len(levels), size=n_samples, p=probs / probs.sum())
                out[:, i] = np.array(levels, dtype=object)[idx]
        if not cont_targets:
            continue
        cond_idx = tuple(sorted(factor.sampled_parents + factor.fixed))
        for i in cond_idx:
            if space.kinds[i].kind != CONTINUOUS:
                raise SingularConditioningError(
                    f"cannot condition the Gaussian block on categorical feature "
                    f"{space.names[i]!r}"
                )
        if independent_within_confounded and factor.confounded and len(cont_targets) > 1:
            target_groups = [(i,) for i in cont_targets]
        else:
            target_groups = [cont_targets]
        for targets in target_groups:
            mu_a, mu_b, k, cond_cov = model._regression(targets, cond_idx)
            if cond_idx:
                vals = out[:, list(cond_idx)].astype(float)
                means = mu_a + (vals - mu_b) @ k.T
            else:
                means = np.broadcast_to(mu_a, (n_samples, len(targets)))
            try:
                chol = np.linalg.cholesky(
                    cond_cov + 1e-14 * np.trace(cond_cov) / max(len(targets), 1)
                    * np.eye(len(targets))
                )
            except np.linalg.LinAlgError:
                raise SingularConditioningError(
                    f"conditional covariance for targets {targets} is singular"
                )
            if antithetic:
                half = gen.standard_normal(((n_samples + 1) // 2, len(targets)))
                z = np.vstack([half, -half])[:n_samples]
            else:
                z = gen.standard_normal((n_samples, len(targets)))
            draws = means + z @ chol.T
            for col, i in enumerate(targets):
                out[:, i] = draws[:, col]
    return out


# --- fully discrete joint model -------------------------------------------

class DiscreteJointModel:
    """Joint probability table over an all-categorical feature space."""

    def __init__(self, feature_space: FeatureSpace, table: np.ndarray):
        if feature_space.continuous_indices:
            raise ModelFitError("DiscreteJointModel requires all-categorical features")
        shape = tuple(len(k.levels) for k in feature_space.kinds)
        table = np.asarray(table, dtype=float)
        if table.shape != shape:
            raise ModelFitError(f"table shape {table.shape} != level counts {shape}")
        if np.any(table < 0) or abs(float(table.sum()) - 1.0) > 1e-9:
            raise ModelFitError("joint table must be non-negative and sum to 1")
        self.feature_space = feature_space
        self.table = table
        self._level_index = [
            {lv: k for k, lv in enumerate(kind.levels)} for kind in feature_space.kinds
        ]

    def level_idx(self, feature: int, value) -> int:
        try:
            return self._level_index[feature][value]
        except KeyError:
            raise ModelFitError(
                f"value {value!r} is not a level of feature "
                f"{self.feature_space.names[feature]!r}"
            ) from None

    def _conditional(self, targets: tuple[int, ...], given: Mapping[int, object]):
        """Distribution over target level-index tuples given fixed features.

        Returns (list of target level-index tuples, probability vector).
        """
        n = self.feature_space.n
        index: list = [slice(None)] * n
        for i, v in given.items():
            index[i] = self.level_idx(i, v)
        sub = self.table[tuple(index)]
        # axes of sub follow the non-given features in ascending index order,
        # and targets are sorted, so the kept axes already match target order
        rest = [i for i in range(n) if i not in given]
        keep_axes = [rest.index(i) for i in targets]
        drop_axes = tuple(ax for ax in range(len(rest)) if ax not in keep_axes)
        marg = sub.sum(axis=drop_axes) if drop_axes else sub
        total = float(marg.sum())
        if total <= 0.0:
            names = {self.feature_space.names[i]: given[i] for i in given}
            raise ZeroProbabilityError(
                f"conditioning event {names} has probability zero"
            )
        combos = list(itertools.product(*[range(s) for s in marg.shape]))
        probs = marg.reshape(-1) / total
        return combos, probs

    def factor_assignments(self, factor, given: Mapping[int, object]):
        """Conditional over a factor's targets given its conditioning values."""
        return self._conditional(factor.targets, given)

    def sample_plan(
        self, plan: FactorPlan, coalition: Coalition, rng: RngStream, n_samples: int
    ) -> np.ndarray:
        space = self.feature_space
        out = np.empty((n_samples, space.n), dtype=object)
        for i, v in coalition.values.items():
            out[:, i] = v
        gen = rng.generator
        for factor in plan.factors:
            cond_idx = tuple(sorted(factor.sampled_parents + factor.fixed))
            # group rows sharing a conditioning assignment; few distinct combos
            groups: dict[tuple, list[int]] = {}
            for row in range(n_samples):
                key = tuple(out[row, i] for i in cond_idx)
                groups.setdefault(key, []).append(row)
            for key in sorted(groups, key=repr):
                rows = groups[key]
                given = dict(zip(cond_idx, key))
                combos, probs = self._conditional(factor.targets, given)
                picks = gen.choice(len(combos), size=len(rows), p=probs)
                for col, i in enumerate(factor.targets):
                    levels = space.kinds[i].levels
                    for r, p in zip(rows, picks):
                        out[r, i] = levels[combos[p][col]]
        return out

    @classmethod
    def from_data(cls, data: DataMatrix) -> "DiscreteJointModel":
        """Empirical joint frequencies, e.g. fitted XOR feature tables."""
        space = data.feature_space
        shape = tuple(len(k.levels) for k in space.kinds)
        table = np.zeros(shape)
        for row in data.rows:
            idx = tuple(space.kinds[j].levels.index(row[j]) for j in range(space.n))
            table[idx] += 1.0
        return cls(space, table / data.m)


# --- persistence -----------------------------------------------------------

def gaussian_to_dict(model: GaussianModel) -> dict:
    space = model.feature_space
    return {
        "features": [
            {"name": n, "kind": k.kind, **({"levels": list(k.levels)} if k.levels else {})}
            for n, k in zip(space.names, space.kinds)
        ],
        "mean": model.mean.tolist(),
        "covariance": model.covariance.reshape(-1).tolist(),
        "categorical_marginals": {
            space.names[i]: {str(lv): p for lv, p in tbl.items()}
            for i, tbl in model.categorical_marginals.items()
        },
        "regularization": model.regularization,
    }


def gaussian_from_dict(spec: dict) -> GaussianModel:
    names, kinds = [], []
    for entry in spec["features"]:
        names.append(entry["name"])
        levels = entry.get("levels")
        kinds.append(FeatureKind(entry["kind"], tuple(levels) if levels else None))
    space = FeatureSpace(tuple(names), tuple(kinds))
    d = len(space.continuous_indices)
    mean = np.array(spec["mean"], dtype=float)
    cov = np.array(spec["covariance"], dtype=float).reshape(d, d)
    marginals = {}
    for name, tbl in spec.get("categorical_marginals", {}).items():
        i = space.index(name)
        levels = space.kinds[i].levels
        by_str = {str(lv): lv for lv in levels}
        marginals[i] = {by_str[s]: float(p) for s, p in tbl.items()}
    return GaussianModel(space, mean, cov, marginals, float(spec["regularization"]))


def save_gaussian(model: GaussianModel, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(gaussian_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_gaussian(path: str | Path) -> GaussianModel:
    with open(path) as fh:
        return gaussian_from_dict(json.load(fh))


def load_csv(path: str | Path, feature_space: FeatureSpace | None = None) -> DataMatrix:
    """Read training data; the header row must match the feature names when a
    feature space is supplied, otherwise kinds are inferred per column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ModelFitError(f"{path}: empty CSV file") from None
        raw = [row for row in reader if row]
    if feature_space is not None:
        if tuple(header) != feature_space.names:
            raise ModelFitError(
                f"{path}: header {header} does not match feature names "
                f"{list(feature_space.names)}"
            )
        space = feature_space
    else:
        space = _infer_space(header, raw)
    rows = np.empty((len(raw), space.n), dtype=object)
    for r, row in enumerate(raw):
        if len(row) != space.n:
            raise ModelFitError(f"{path}: row {r + 2} has {len(row)} fields")
        for j, cell in enumerate(row):
            if space.kinds[j].kind == CONTINUOUS:
                try:
                    rows[r, j] = float(cell)
                except ValueError:
                    raise ModelFitError(
                        f"{path}: non-numeric value {cell!r} in continuous "
                        f"column {space.names[j]!r}"
                    ) from None
            else:
                rows[r, j] = _coerce_level(cell, space.kinds[j].levels)
    return DataMatrix(space, rows)


def _coerce_level(cell: str, levels: tuple):
    for lv in levels:
        if cell == str(lv):
            return lv
    raise ModelFitError(f"unknown categorical level {cell!r} (levels: {levels})")


def _infer_space(header: Sequence[str], raw: list[list[str]]) -> FeatureSpace:
    kinds = []
    for j in range(len(header)):
        col = [row[j] for row in raw]
        try:
            [float(c) for c in col]
            kinds.append(FeatureKind(CONTINUOUS))
        except ValueError:
            kinds.append(FeatureKind(CATEGORICAL, tuple(sorted(set(col)))))
    return FeatureSpace(tuple(header), tuple(kinds))
