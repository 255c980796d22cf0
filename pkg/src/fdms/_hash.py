"""Content hashing used for dataset provenance. Re-exported by ``dataio``."""

import hashlib

#: Algorithm recorded in file headers next to any stored digest.
HASH_ALGORITHM = "sha256"


def content_hash(data: bytes) -> str:
    """Hex digest of ``data`` under the documented algorithm."""
    return hashlib.sha256(data).hexdigest()
