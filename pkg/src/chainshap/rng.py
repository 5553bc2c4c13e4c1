"""Deterministic, label-addressed random number streams.

Each logical sampling task derives its own stream from a master seed and a
string label, so identical (seed, label) pairs replay the same draws no
matter how calls from other streams interleave.
"""

from __future__ import annotations

import hashlib

import numpy as np


class RngStream:
    """A numpy Generator derived deterministically from (master seed, label)."""

    def __init__(self, master_seed: int, label: str = ""):
        self.master_seed = int(master_seed)
        self.label = label
        digest = hashlib.sha256(label.encode("utf-8")).digest()
        # four uint32 words keep the spawn key independent of PYTHONHASHSEED
        key = tuple(int.from_bytes(digest[i : i + 4], "little") for i in (0, 4, 8, 12))
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=key)
        self.generator = np.random.default_rng(seq)

    def substream(self, suffix: str) -> "RngStream":
        return RngStream(self.master_seed, f"{self.label}/{suffix}")

    def __repr__(self):
        return f"RngStream(seed={self.master_seed}, label={self.label!r})"


def coalition_label(in_set: frozenset[int] | set[int]) -> str:
    """Stream label shared by all evaluations of one coalition (the do-set).

    The label deliberately omits the conditioning variant and any clamped
    features so that variant comparisons use common random numbers.
    """
    return "S=" + ",".join(str(i) for i in sorted(in_set))
