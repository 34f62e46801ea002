"""Deterministic random-stream derivation.

Experiments fan out over trials; each trial gets its own stream derived
from (root seed, trial index...) so aggregation is order-independent
and every run is reproducible from the root seed alone.
"""

from __future__ import annotations

import hashlib
from random import Random


def derive_rng(seed: int | str, *indices: int | str) -> Random:
    """Child generator keyed by the root seed and a path of indices."""
    material = ":".join(str(part) for part in (seed, *indices))
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return Random(int.from_bytes(digest, "big"))
