"""Canonical byte encoding and SHA-256 digests.

Encoding rules: every field is length-prefixed (4-byte big-endian length,
then the payload); unsigned integers encode as their minimal big-endian
magnitude (zero encodes as the empty payload); strings as UTF-8; lists as
a 4-byte count followed by the encoded items. Structures concatenate their
fields in declaration order. Two values encode equal bytes iff they are
equal, which is what the chain digest relies on.
"""

from __future__ import annotations

import hashlib
from typing import Iterable


def enc_uint(n: int) -> bytes:
    if n < 0:
        raise ValueError("canonical encoding is unsigned")
    payload = n.to_bytes((n.bit_length() + 7) // 8, "big") if n else b""
    return len(payload).to_bytes(4, "big") + payload


def enc_str(s: str) -> bytes:
    payload = s.encode("utf-8")
    return len(payload).to_bytes(4, "big") + payload


def enc_bytes(b: bytes) -> bytes:
    return len(b).to_bytes(4, "big") + b


def enc_list(items: Iterable[bytes]) -> bytes:
    chunks = list(items)
    return len(chunks).to_bytes(4, "big") + b"".join(chunks)


def sha256_hex(data: bytes) -> str:
    return "0x" + hashlib.sha256(data).hexdigest()
