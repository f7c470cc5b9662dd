"""Deterministic seed derivation for nested randomized stages."""

from __future__ import annotations

import zlib


def derive_seed(base: int, *tags) -> int:
    """A stable child seed from a base seed and a tag path."""
    key = ("/".join(str(t) for t in tags)).encode()
    return (int(base) * 0x9E3779B1 + zlib.crc32(key)) % (2**32)
