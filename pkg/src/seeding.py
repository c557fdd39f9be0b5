import hashlib

import numpy as np


def derive_seed(seed: int, *parts: str) -> int:
    """Stable 128-bit seed from a base seed and string keys; independent of call order."""
    h = hashlib.sha256(str(int(seed)).encode("utf-8"))
    for part in parts:
        h.update(b"\0" + str(part).encode("utf-8"))
    return int.from_bytes(h.digest()[:16], "big")


def keyed_rng(seed: int, *parts: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *parts))


def seeded_order(items, rng: np.random.Generator) -> list:
    items = list(items)
    if len(items) < 2:
        return items
    return [items[i] for i in rng.permutation(len(items))]
