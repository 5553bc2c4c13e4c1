"""Shapley aggregation: axioms, permutation supports, sampled-mode
convergence, and the effect decomposition."""

import itertools

import numpy as np
import pytest

from chainshap import (
    DiscreteExactValueFunction,
    EnumerationCapError,
    GraphValidationError,
    LinearModel,
    MonteCarloValueFunction,
    PermutationDistribution,
    PermutationMode,
    SamplerConfig,
    TableModel,
    Variant,
    build_chain_graph,
    contribution,
    decompose_effects,
    shapley_values,
    single_component_graph,
)
from chainshap.shapley import (
    enumerate_consistent_permutations,
    sample_consistent_permutation,
    sample_consistent_permutation_rejection,
)
from chainshap import is_consistent_permutation

from conftest import (
    random_feature_space,
    random_gaussian_model,
    random_instance,
    random_joint_model,
    random_table_predictor,
)


def exact_uniform():
    return PermutationDistribution(PermutationMode.EXACT_UNIFORM)


def discrete_case(seed=0, n=3, graph=None, variant=Variant.CONDITIONAL):
    gen = np.random.default_rng(seed)
    model = random_joint_model(gen, n)
    predictor = random_table_predictor(gen, model.feature_space)
    x = random_instance(gen, model.feature_space)
    vf = DiscreteExactValueFunction(variant, graph, model, predictor, x)
    return model, predictor, x, vf


class TestPermutationSupports:
    def test_enumeration_counts(self):
        from chainshap import FeatureSpace

        space = FeatureSpace.continuous(("a", "b", "c"))
        chain = build_chain_graph(space, [{0}, {1}, {2}], [False] * 3)
        single = single_component_graph(space, confounded=False)
        two = build_chain_graph(space, [{0, 1}, {2}], [False, False])
        assert list(enumerate_consistent_permutations(chain)) == [(0, 1, 2)]
        assert len(list(enumerate_consistent_permutations(single))) == 6
        assert sorted(enumerate_consistent_permutations(two)) == [(0, 1, 2), (1, 0, 2)]

    def test_enumerated_permutations_are_consistent(self):
        from chainshap import FeatureSpace

        space = FeatureSpace.continuous(tuple("abcde"))
        graph = build_chain_graph(
            space, [{0, 1}, {2}, {3, 4}], [True, False, False],
            explicit_parents=[[], [0], [0]],
        )
        support = list(enumerate_consistent_permutations(graph))
        assert all(is_consistent_permutation(graph, p) for p in support)
        total = {p for p in itertools.permutations(range(5))}
        outside = total - set(support)
        assert all(not is_consistent_permutation(graph, p) for p in outside)

    def test_samplers_stay_on_the_support(self):
        from chainshap import FeatureSpace

        space = FeatureSpace.continuous(tuple("abcd"))
        graph = build_chain_graph(space, [{0, 1}, {2, 3}], [False, False])
        gen = np.random.default_rng(0)
        for _ in range(200):
            assert is_consistent_permutation(graph, sample_consistent_permutation(graph, gen))
            assert is_consistent_permutation(
                graph, sample_consistent_permutation_rejection(graph, gen)
            )

    def test_distribution_validation(self):
        with pytest.raises(GraphValidationError):
            PermutationDistribution(PermutationMode.EXACT_ASYMMETRIC)
        with pytest.raises(GraphValidationError):
            PermutationDistribution(PermutationMode.SAMPLED_UNIFORM)

    def test_enumeration_cap(self):
        from chainshap.shapley import _exact_prefix_weights

        with pytest.raises(EnumerationCapError):
            _exact_prefix_weights(exact_uniform(), 11)

    def test_exact_uniform_weights_sum_to_one(self):
        from chainshap.shapley import _exact_prefix_weights

        weights = _exact_prefix_weights(exact_uniform(), 4)
        for i in range(4):
            assert sum(w for _, w in weights[i]) == pytest.approx(1.0, abs=1e-12)


class TestAxioms:
    def test_efficiency_exact(self):
        _, _, _, vf = discrete_case(seed=1, n=4)
        report = shapley_values(exact_uniform(), vf)
        assert abs(report.efficiency_gap) < 1e-12
        assert sum(report.phi) == pytest.approx(report.fx - report.f0, abs=1e-12)

    def test_telescoping_is_bit_exact_across_permutations(self):
        gen = np.random.default_rng(3)
        model = random_gaussian_model(gen, 3)
        linear = LinearModel(0.0, tuple(gen.normal(size=3)))
        x = [float(v) for v in gen.normal(size=3)]
        vf = MonteCarloValueFunction(
            Variant.CONDITIONAL, None, model, linear, x, SamplerConfig(n_samples=200)
        )
        # memoized values cancel exactly, so the correctly rounded sum of the
        # signed value multiset is the same float for every permutation
        import math

        def perm_sum(perm):
            terms = []
            for k in range(len(perm)):
                terms.append(vf.value(frozenset(perm[: k + 1])).value)
                terms.append(-vf.value(frozenset(perm[:k])).value)
            return math.fsum(terms)

        sums = {perm_sum(perm) for perm in itertools.permutations(range(3))}
        assert len(sums) == 1
        full = vf.value(frozenset(range(3))).value
        empty = vf.value(frozenset()).value
        assert sums == {full - empty} or sums == {math.fsum([full, -empty])}

    def test_linearity(self):
        gen = np.random.default_rng(4)
        model = random_joint_model(gen, 3)
        space = model.feature_space
        f1 = random_table_predictor(gen, space)
        f2 = random_table_predictor(gen, space)
        a, b = 2.5, -0.75
        combo = TableModel({k: a * f1.outputs[k] + b * f2.outputs[k] for k in f1.outputs})
        x = random_instance(gen, space)
        reports = [
            shapley_values(
                exact_uniform(),
                DiscreteExactValueFunction(Variant.CONDITIONAL, None, model, f, x),
            )
            for f in (f1, f2, combo)
        ]
        for i in range(3):
            assert reports[2].phi[i] == pytest.approx(
                a * reports[0].phi[i] + b * reports[1].phi[i], abs=1e-12
            )

    def test_null_player(self):
        # independent joint table and a predictor ignoring the last feature
        gen = np.random.default_rng(5)
        space = random_feature_space(gen, 3)
        p = [float(gen.uniform(0.2, 0.8)) for _ in range(3)]
        table = np.zeros((2, 2, 2))
        for combo in itertools.product((0, 1), repeat=3):
            table[combo] = np.prod([p[i] if combo[i] else 1 - p[i] for i in range(3)])
        from chainshap import DiscreteJointModel

        model = DiscreteJointModel(space, table)
        predictor = TableModel(
            {combo: float(combo[0] + 2 * combo[1]) for combo in itertools.product((0, 1), repeat=3)}
        )
        vf = DiscreteExactValueFunction(Variant.CONDITIONAL, None, model, predictor, [1, 0, 1])
        report = shapley_values(exact_uniform(), vf)
        assert report.phi[2] == pytest.approx(0.0, abs=1e-12)

    def test_symmetry_relabeling(self):
        gen = np.random.default_rng(6)
        model = random_joint_model(gen, 3)
        space = model.feature_space
        predictor = random_table_predictor(gen, space)
        x = random_instance(gen, space)
        report = shapley_values(
            exact_uniform(),
            DiscreteExactValueFunction(Variant.CONDITIONAL, None, model, predictor, x),
        )
        # swap features 0 and 1 everywhere
        from chainshap import DiscreteJointModel

        swapped_model = DiscreteJointModel(space, np.swapaxes(model.table, 0, 1))
        swapped_predictor = TableModel(
            {(k[1], k[0], k[2]): v for k, v in predictor.outputs.items()}
        )
        swapped_x = [x[1], x[0], x[2]]
        swapped = shapley_values(
            exact_uniform(),
            DiscreteExactValueFunction(
                Variant.CONDITIONAL, None, swapped_model, swapped_predictor, swapped_x
            ),
        )
        assert swapped.phi[0] == pytest.approx(report.phi[1], abs=1e-12)
        assert swapped.phi[1] == pytest.approx(report.phi[0], abs=1e-12)
        assert swapped.phi[2] == pytest.approx(report.phi[2], abs=1e-12)


class TestAsymmetricModes:
    def test_single_component_asymmetric_equals_symmetric(self):
        gen = np.random.default_rng(7)
        model = random_joint_model(gen, 3)
        predictor = random_table_predictor(gen, model.feature_space)
        x = random_instance(gen, model.feature_space)
        graph = single_component_graph(model.feature_space, confounded=False)
        vf = lambda: DiscreteExactValueFunction(Variant.CAUSAL, graph, model, predictor, x)
        sym = shapley_values(exact_uniform(), vf())
        asym = shapley_values(
            PermutationDistribution(PermutationMode.EXACT_ASYMMETRIC, graph=graph), vf()
        )
        assert sym.phi == pytest.approx(asym.phi, abs=1e-12)

    def test_chain_asymmetric_uses_only_the_causal_order(self):
        gen = np.random.default_rng(8)
        model = random_joint_model(gen, 2)
        predictor = random_table_predictor(gen, model.feature_space)
        x = random_instance(gen, model.feature_space)
        graph = build_chain_graph(model.feature_space, [{0}, {1}], [False, False])
        vf = DiscreteExactValueFunction(Variant.CAUSAL, graph, model, predictor, x)
        asym = shapley_values(
            PermutationDistribution(PermutationMode.EXACT_ASYMMETRIC, graph=graph), vf
        )
        rec0 = contribution((0, 1), 0, vf)
        rec1 = contribution((0, 1), 1, vf)
        assert asym.phi[0] == pytest.approx(rec0.total, abs=1e-12)
        assert asym.phi[1] == pytest.approx(rec1.total, abs=1e-12)

    def test_sampled_uniform_converges_to_exact(self):
        _, _, _, vf = discrete_case(seed=9, n=4)
        exact = shapley_values(exact_uniform(), vf)
        sampled = shapley_values(
            PermutationDistribution(
                PermutationMode.SAMPLED_UNIFORM, n_permutations=4000, seed=0
            ),
            vf,
        )
        for i in range(4):
            tol = 4 * sampled.stderr[i] + 1e-12
            assert abs(sampled.phi[i] - exact.phi[i]) < tol

    def test_sampled_asymmetric_converges_on_a_chain(self):
        gen = np.random.default_rng(10)
        model = random_joint_model(gen, 3)
        predictor = random_table_predictor(gen, model.feature_space)
        x = random_instance(gen, model.feature_space)
        graph = build_chain_graph(model.feature_space, [{0}, {1}, {2}], [False] * 3)
        vf = DiscreteExactValueFunction(Variant.CAUSAL, graph, model, predictor, x)
        exact = shapley_values(
            PermutationDistribution(PermutationMode.EXACT_ASYMMETRIC, graph=graph), vf
        )
        sampled = shapley_values(
            PermutationDistribution(
                PermutationMode.SAMPLED_ASYMMETRIC, graph=graph,
                n_permutations=50, seed=1,
            ),
            vf,
        )
        # a total order has a single consistent permutation: exact agreement
        assert sampled.phi == pytest.approx(exact.phi, abs=1e-12)


class TestDecomposition:
    def test_record_identity_is_exact(self):
        gen = np.random.default_rng(11)
        model = random_gaussian_model(gen, 3)
        linear = LinearModel(0.5, tuple(gen.normal(size=3)))
        x = [float(v) for v in gen.normal(size=3)]
        graph = build_chain_graph(model.feature_space, [{0}, {1, 2}], [False, True])
        vf = MonteCarloValueFunction(
            Variant.CAUSAL, graph, model, linear, x, SamplerConfig(n_samples=300)
        )
        for perm in itertools.permutations(range(3)):
            for i in range(3):
                rec = decompose_effects(perm, i, vf)
                assert rec.direct + rec.indirect == rec.total

    def test_report_split_sums_to_phi(self):
        _, _, _, vf = discrete_case(seed=12, n=3)
        report = shapley_values(exact_uniform(), vf, decompose=True)
        for i in range(3):
            assert report.direct[i] + report.indirect[i] == pytest.approx(
                report.phi[i], abs=1e-12
            )

    def test_marginal_indirect_is_exactly_zero(self):
        gen = np.random.default_rng(13)
        model = random_gaussian_model(gen, 3)
        linear = LinearModel(0.0, tuple(gen.normal(size=3)))
        x = [float(v) for v in gen.normal(size=3)]
        vf = MonteCarloValueFunction(
            Variant.MARGINAL, None, model, linear, x, SamplerConfig(n_samples=400)
        )
        report = shapley_values(exact_uniform(), vf, decompose=True)
        assert report.indirect == (0.0, 0.0, 0.0)


class TestReportMetadata:
    def test_symmetry_property_and_plain_floats(self):
        _, _, _, vf = discrete_case(seed=14, n=2)
        report = shapley_values(exact_uniform(), vf, decompose=True)
        assert report.symmetry == "symmetric"
        for v in report.phi + report.stderr + report.direct + report.indirect:
            assert type(v) is float
        assert type(report.f0) is float and type(report.fx) is float
