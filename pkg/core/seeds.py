"""
Seed derivation: every random stage gets its own stream from the run seed.

    derive_seed(42, "train/Y+E/gru")

hashes "42/train/Y+E/gru" with sha256 and keeps the first 4 bytes, so a stage
can be rerun on its own and still see the same numbers.
"""

import hashlib

import numpy as np


def derive_seed(seed, tag):
    digest = hashlib.sha256(f"{int(seed)}/{tag}".encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


def stage_rng(seed, tag):
    return np.random.default_rng(derive_seed(seed, tag))
