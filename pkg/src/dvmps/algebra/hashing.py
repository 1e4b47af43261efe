"""Hashing into the curve group and into Z_q^*, plus seed-derived nonces.

SHA-256 is the digest everywhere in this package; call sites differ only
by domain-separation tag. Group hashing is try-and-increment with
cofactor clearing, so outputs always have order exactly q.
"""

from __future__ import annotations

import hashlib

from .counters import OpCounters
from .curve import (
    CurveParams,
    GroupElement,
    clear_cofactor,
    point_to_bytes,
)
from .field import FieldError, fp_sqrt

_MAX_RETRIES = 256


class HashToCurveError(Exception):
    """Retry cap exhausted; parameters are broken."""


def _sha256(*parts: bytes) -> bytes:
    d = hashlib.sha256()
    for part in parts:
        d.update(part)
    return d.digest()


def hash_to_group(
    curve: CurveParams,
    data: bytes,
    domain_tag: bytes,
    session: OpCounters | None = None,
) -> GroupElement:
    """Deterministic map bytes -> order-q point, never infinity.

    Candidate x = digest(tag || counter || data) mod p; solve for y;
    on a non-residue bump the counter. Counts one H per call no matter
    how many retries run.
    """
    if session is not None:
        session.hashes += 1
    p = curve.p
    for counter in range(_MAX_RETRIES):
        digest = _sha256(domain_tag, bytes([counter]), data)
        x = int.from_bytes(digest, "big") % p
        try:
            y = fp_sqrt(p, (x * x * x + x) % p)
        except FieldError:
            continue
        pt = clear_cofactor(curve, GroupElement(x, y))
        if not pt.is_infinity:
            return pt
    raise HashToCurveError("no curve point found in 256 attempts")


def scalar_hash_input(
    curve: CurveParams, msg: bytes, point: GroupElement, domain_tag: bytes
) -> bytes:
    """The exact digest preimage hash_to_scalar uses. Frozen by fixture:
    changing this layout invalidates every existing signature."""
    return (
        domain_tag
        + len(msg).to_bytes(4, "big")
        + msg
        + point_to_bytes(curve, point)
    )


def hash_to_scalar(
    curve: CurveParams,
    msg: bytes,
    point: GroupElement,
    domain_tag: bytes,
    session: OpCounters | None = None,
) -> int:
    """Map (message, point) -> Z_q^*.

    The message gets a 4-byte big-endian length prefix so the (msg, point)
    boundary is unambiguous; the point contributes its canonical compressed
    bytes. A zero residue maps to 1 rather than retrying.
    """
    if session is not None:
        session.hashes += 1
    digest = _sha256(scalar_hash_input(curve, msg, point, domain_tag))
    k = int.from_bytes(digest, "big") % curve.q
    return k if k != 0 else 1


def scalar_from_seed(q: int, seed: bytes, label: bytes) -> int:
    """Deterministic nonzero scalar in [1, q-1] from a seed and role label."""
    counter = 0
    while True:
        digest = _sha256(label, len(seed).to_bytes(4, "big"), seed, counter.to_bytes(4, "big"))
        k = int.from_bytes(digest, "big") % q
        if k != 0:
            return k
        counter += 1
