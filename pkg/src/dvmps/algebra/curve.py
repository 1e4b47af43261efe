"""Supersingular curve group E: y^2 = x^3 + x over F_p, p = 3 (mod 4).

#E(F_p) = p + 1 for these curves; the parameter sets pick q | p + 1 prime
and work in the order-q subgroup. Affine coordinates with chord-and-tangent
addition; infinity is the dataclass with x = y = None.
"""

from __future__ import annotations

from dataclasses import dataclass

from .counters import OpCounters
from .field import FieldError, fp_sqrt


class CurveError(Exception):
    """Point not on curve / malformed encoding."""


@dataclass(frozen=True)
class GroupElement:
    """Affine point or infinity. Instances are immutable and hashable."""

    x: int | None
    y: int | None

    @property
    def is_infinity(self) -> bool:
        return self.x is None


INFINITY = GroupElement(None, None)


@dataclass(frozen=True)
class CurveParams:
    """p: base-field prime, q: subgroup order, cofactor = (p+1)//q."""

    p: int
    q: int
    cofactor: int
    generator: GroupElement

    def __post_init__(self) -> None:
        assert self.p % 4 == 3
        assert self.q * self.cofactor == self.p + 1

    @property
    def field_width(self) -> int:
        """Byte width of one base-field coordinate."""
        return (self.p.bit_length() + 7) // 8

    @property
    def scalar_width(self) -> int:
        return (self.q.bit_length() + 7) // 8


def is_on_curve(p: int, pt: GroupElement) -> bool:
    if pt.is_infinity:
        return True
    x, y = pt.x, pt.y
    return (y * y - (x * x * x + x)) % p == 0


def point_neg(p: int, pt: GroupElement) -> GroupElement:
    if pt.is_infinity:
        return pt
    return GroupElement(pt.x, (-pt.y) % p)


def point_add(p: int, t1: GroupElement, t2: GroupElement) -> GroupElement:
    if t1.is_infinity:
        return t2
    if t2.is_infinity:
        return t1
    x1, y1 = t1.x, t1.y
    x2, y2 = t2.x, t2.y
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return INFINITY
        # doubling: slope (3x^2 + 1) / 2y  (curve coefficient a = 1)
        lam = (3 * x1 * x1 + 1) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    y3 = (lam * (x1 - x3) - y1) % p
    return GroupElement(x3, y3)


def point_sub(p: int, t1: GroupElement, t2: GroupElement) -> GroupElement:
    return point_add(p, t1, point_neg(p, t2))


def scalar_mul(
    curve: CurveParams,
    k: int,
    pt: GroupElement,
    session: OpCounters | None = None,
) -> GroupElement:
    """Double-and-add k*pt. Counts one M per call regardless of k."""
    if session is not None:
        session.scalar_mults += 1
    return _mul_uncounted(curve.p, k % curve.q, pt)


def _mul_uncounted(p: int, k: int, pt: GroupElement) -> GroupElement:
    if k == 0 or pt.is_infinity:
        return INFINITY
    acc = INFINITY
    base = pt
    while k:
        if k & 1:
            acc = point_add(p, acc, base)
        base = point_add(p, base, base)
        k >>= 1
    return acc


def clear_cofactor(curve: CurveParams, pt: GroupElement) -> GroupElement:
    """Multiply by the cofactor; result lands in the order-q subgroup."""
    return _mul_uncounted(curve.p, curve.cofactor, pt)


def in_subgroup(curve: CurveParams, pt: GroupElement) -> bool:
    return is_on_curve(curve.p, pt) and _mul_uncounted(curve.p, curve.q, pt).is_infinity


# --- canonical compressed encoding ---
#
# 1 tag byte: 0x00 = infinity (nothing follows), 0x02/0x03 = finite point
# with even/odd y, followed by x as big-endian bytes padded to field width.


def point_to_bytes(curve: CurveParams, pt: GroupElement) -> bytes:
    if pt.is_infinity:
        return b"\x00"
    tag = 0x02 if pt.y % 2 == 0 else 0x03
    return bytes([tag]) + pt.x.to_bytes(curve.field_width, "big")


def point_from_bytes(curve: CurveParams, data: bytes) -> GroupElement:
    if len(data) == 0:
        raise CurveError("empty point encoding")
    tag = data[0]
    if tag == 0x00:
        if len(data) != 1:
            raise CurveError("trailing bytes after infinity tag")
        return INFINITY
    if tag not in (0x02, 0x03):
        raise CurveError(f"bad point tag {tag:#x}")
    if len(data) != 1 + curve.field_width:
        raise CurveError("wrong point encoding length")
    x = int.from_bytes(data[1:], "big")
    if x >= curve.p:
        raise CurveError("x coordinate out of range")
    try:
        y = fp_sqrt(curve.p, (x * x * x + x) % curve.p)
    except FieldError:
        raise CurveError("x is not on the curve") from None
    if y % 2 != tag - 0x02:
        y = (-y) % curve.p
    return GroupElement(x, y)


def enumerate_points(p: int) -> list[GroupElement]:
    """All affine points plus infinity. Brute force; toy-sized p only."""
    pts = [INFINITY]
    for x in range(p):
        rhs = (x * x * x + x) % p
        for y in range(p):
            if (y * y) % p == rhs:
                pts.append(GroupElement(x, y))
    return pts
