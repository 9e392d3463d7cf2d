"""Named random substreams derived from one root seed."""
from __future__ import annotations

import zlib

import numpy as np


def _entropy(root: int, name: str, keys) -> list[int]:
    return [int(root), zlib.crc32(name.encode("utf-8")), *(int(k) for k in keys)]


def substream(root: int, name: str, *keys: int) -> np.random.Generator:
    """Generator for stream ``name`` (e.g. "init", "adasyn", "folds", "synth")."""
    return np.random.default_rng(np.random.SeedSequence(_entropy(root, name, keys)))


def subseed(root: int, name: str, *keys: int) -> int:
    """A 32-bit integer seed for components that take a plain seed."""
    ss = np.random.SeedSequence(_entropy(root, name, keys))
    return int(ss.generate_state(1)[0])
