"""Stable 64-bit text hashing (platform- and process-independent).

Python's builtin hash() is salted per process, so anything that must be
reproducible across runs (embedding buckets, option placement) goes through
blake2b instead.
"""

from __future__ import annotations

import hashlib


def stable_hash64(text: str) -> int:
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")
