"""Label-addressed random streams: determinism and stream independence."""

import numpy as np

from chainshap import RngStream
from chainshap.rng import coalition_label


def test_same_seed_and_label_replays_draws():
    a = RngStream(7, "S=0,2").generator.standard_normal(100)
    b = RngStream(7, "S=0,2").generator.standard_normal(100)
    assert np.array_equal(a, b)


def test_labels_separate_streams():
    a = RngStream(7, "S=0").generator.standard_normal(100)
    b = RngStream(7, "S=1").generator.standard_normal(100)
    assert not np.array_equal(a, b)


def test_seeds_separate_streams():
    a = RngStream(7, "S=0").generator.standard_normal(100)
    b = RngStream(8, "S=0").generator.standard_normal(100)
    assert not np.array_equal(a, b)


def test_substream_extends_label():
    s = RngStream(3, "base").substream("noise")
    assert s.label == "base/noise"
    t = RngStream(3, "base/noise")
    assert np.array_equal(
        s.generator.standard_normal(10), t.generator.standard_normal(10)
    )


def test_coalition_label_is_order_free_and_variant_free():
    assert coalition_label({2, 0, 1}) == "S=0,1,2"
    assert coalition_label(frozenset({2, 0, 1})) == "S=0,1,2"
    assert coalition_label(set()) == "S="
