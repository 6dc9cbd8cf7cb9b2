"""Derivation of per-stage seeds from one master seed.

``derive_seed(master, "oversample", 3)`` hashes the decimal master seed and
the labels, joined by ``/``, with SHA-256 and keeps the first 4 bytes
(big-endian). Stages therefore get independent, order-free streams, and
adding a new stage never shifts the seeds of existing ones.
"""

import hashlib


def derive_seed(master: int, *labels) -> int:
    text = "/".join([str(int(master))] + [str(label) for label in labels])
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:4], "big")
