"""Symmetric (Type-1) pairing on the supersingular curve.

e(T1, T2) = tate(T1, phi(T2)) where phi(x, y) = (-x, i*y) is the
distortion map into E(F_p2) and tate is the reduced Tate pairing:
Miller's algorithm for f_{q,T1} evaluated at phi(T2), then the final
exponentiation to the power (p^2 - 1) / q.

Verticals are dropped from the Miller loop: their values lie in F_p*,
which the final exponentiation kills (x^((p-1)(p+1)/q) = 1 for x in
F_p*). Line values never vanish for order-q inputs: a zero would need
an F_p-rational point with x = -x_T2, which forces -y_T2^2 to be a
square mod p, impossible with p = 3 (mod 4) and y_T2 != 0.

Output lives in the order-q subgroup of F_p2*.
"""

from __future__ import annotations

from dataclasses import dataclass

from .counters import OpCounters
from .curve import INFINITY, CurveParams, GroupElement
from .field import (
    FP2_ONE,
    Fp2,
    fp2_conj,
    fp2_inv,
    fp2_mul,
    fp2_pow,
    fp2_sqr,
)


@dataclass(frozen=True)
class TargetElement:
    """Order-q element of F_p2*; (a, b) is a + b*i."""

    a: int
    b: int

    @property
    def value(self) -> Fp2:
        return (self.a, self.b)

    def is_one(self) -> bool:
        return self.a == 1 and self.b == 0


GT_ONE = TargetElement(1, 0)


def _step(
    p: int, v1: GroupElement, v2: GroupElement, qx: int, qy_im: int
) -> tuple[Fp2, GroupElement]:
    """One Miller step: line through v1, v2 evaluated at (qx, i*qy_im),
    plus the sum v1 + v2. The slope is computed once for both.

    qx is in F_p (distorted x-coordinate); the distorted y is purely
    imaginary. Vertical lines return their F_p-valued evaluation; the
    final exponentiation erases it.
    """
    if v1.is_infinity or v2.is_infinity:
        finite = v2 if v1.is_infinity else v1
        if finite.is_infinity:
            return (1, 0), INFINITY
        return ((qx - finite.x) % p, 0), finite
    x1, y1 = v1.x, v1.y
    if v1.x == v2.x and (v1.y + v2.y) % p == 0:
        # vertical: value qx - x1, an F_p element
        return ((qx - x1) % p, 0), INFINITY
    if v1 == v2:
        lam = (3 * x1 * x1 + 1) * pow(2 * y1, -1, p) % p
    else:
        lam = (v2.y - y1) * pow(v2.x - x1, -1, p) % p
    x3 = (lam * lam - x1 - v2.x) % p
    y3 = (lam * (x1 - x3) - y1) % p
    # line value lam*(qx - x1) - (qy - y1) with qy = i*qy_im
    return ((lam * (qx - x1) + y1) % p, (-qy_im) % p), GroupElement(x3, y3)


def _miller(curve: CurveParams, t1: GroupElement, qx: int, qy_im: int) -> Fp2:
    p = curve.p
    f = FP2_ONE
    v = t1
    for bit in bin(curve.q)[3:]:
        line, v = _step(p, v, v, qx, qy_im)
        f = fp2_mul(p, fp2_sqr(p, f), line)
        if bit == "1":
            line, v = _step(p, v, t1, qx, qy_im)
            f = fp2_mul(p, f, line)
    return f


def pairing(
    curve: CurveParams,
    t1: GroupElement,
    t2: GroupElement,
    session: OpCounters | None = None,
) -> TargetElement:
    if session is not None:
        session.pairings += 1
    if t1.is_infinity or t2.is_infinity:
        return GT_ONE
    p = curve.p
    # distortion map: phi(x, y) = (-x, i*y)
    f = _miller(curve, t1, (-t2.x) % p, t2.y)
    # final exponentiation (p^2-1)/q = (p-1) * (p+1)/q;
    # f^(p-1) = conj(f) / f via the Frobenius.
    f = fp2_mul(p, fp2_conj(p, f), fp2_inv(p, f))
    f = fp2_pow(p, f, (p + 1) // curve.q)
    return TargetElement(*f)


def gt_mul(curve: CurveParams, g1: TargetElement, g2: TargetElement) -> TargetElement:
    return TargetElement(*fp2_mul(curve.p, g1.value, g2.value))


def gt_inv(curve: CurveParams, g: TargetElement) -> TargetElement:
    return TargetElement(*fp2_inv(curve.p, g.value))


def gt_pow(
    curve: CurveParams,
    g: TargetElement,
    k: int,
    session: OpCounters | None = None,
) -> TargetElement:
    """g^k with the exponent reduced into [0, q-1]; counts one E."""
    if session is not None:
        session.exponentiations += 1
    return TargetElement(*fp2_pow(curve.p, g.value, k % curve.q))


def gt_order_divides_q(curve: CurveParams, g: TargetElement) -> bool:
    return fp2_pow(curve.p, g.value, curve.q) == FP2_ONE
