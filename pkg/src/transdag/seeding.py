"""Deterministic seed derivation.

A single master seed is split into labeled streams (data generation,
subsampling, per-learner initialization, ...) so that each component of an
experiment is independently reproducible. Labels compose with ``/`` to form
hierarchies, e.g. ``rep-3/data``.
"""

import hashlib

_MASK64 = (1 << 64) - 1


def derive_seed(master: int, label: str) -> int:
    """Derive a 64-bit seed from ``master`` and a textual label.

    Stable across platforms and Python versions (SHA-256 based, no reliance
    on ``hash()``).
    """
    payload = (int(master) & _MASK64).to_bytes(8, "little") + b"/" + label.encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "little")
