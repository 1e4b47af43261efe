"""Prime field and quadratic extension arithmetic.

Field elements are plain Python ints held in canonical form [0, p-1];
every operation reduces. The quadratic extension F_p2 = F_p(i) with
i^2 = -1 is represented as (a, b) tuples meaning a + b*i. This requires
p = 3 (mod 4) so that -1 is a non-residue and x^2 + 1 stays irreducible.

Not constant-time. Nothing here is hardened against side channels.
"""

from __future__ import annotations

Fp2 = tuple[int, int]

FP2_ONE: Fp2 = (1, 0)
FP2_ZERO: Fp2 = (0, 0)


class FieldError(Exception):
    """Arithmetic precondition violated (zero inverse, non-residue sqrt)."""


def fp_add(p: int, a: int, b: int) -> int:
    return (a + b) % p


def fp_sub(p: int, a: int, b: int) -> int:
    return (a - b) % p


def fp_mul(p: int, a: int, b: int) -> int:
    return (a * b) % p


def fp_neg(p: int, a: int) -> int:
    return (-a) % p


def fp_inv(p: int, a: int) -> int:
    if a % p == 0:
        raise FieldError("inverse of zero")
    return pow(a, -1, p)


def is_quadratic_residue(p: int, a: int) -> bool:
    """Euler criterion; zero counts as a residue."""
    a %= p
    if a == 0:
        return True
    return pow(a, (p - 1) // 2, p) == 1


def fp_sqrt(p: int, a: int) -> int:
    """Square root via the p = 3 (mod 4) shortcut r = a^((p+1)/4).

    Raises FieldError when a is not a residue; hash-to-curve uses that
    signal to retry with the next counter.
    """
    assert p % 4 == 3
    a %= p
    if a == 0:
        return 0
    r = pow(a, (p + 1) // 4, p)
    if (r * r) % p != a:
        raise FieldError("not a quadratic residue")
    return r


# --- F_p2 = F_p[i] / (i^2 + 1) ---


def fp2_add(p: int, u: Fp2, v: Fp2) -> Fp2:
    return ((u[0] + v[0]) % p, (u[1] + v[1]) % p)


def fp2_sub(p: int, u: Fp2, v: Fp2) -> Fp2:
    return ((u[0] - v[0]) % p, (u[1] - v[1]) % p)


def fp2_mul(p: int, u: Fp2, v: Fp2) -> Fp2:
    a, b = u
    c, d = v
    ac = a * c
    bd = b * d
    # (a+b)(c+d) - ac - bd = ad + bc
    return ((ac - bd) % p, ((a + b) * (c + d) - ac - bd) % p)


def fp2_sqr(p: int, u: Fp2) -> Fp2:
    a, b = u
    # (a+bi)^2 = (a+b)(a-b) + 2ab i
    return (((a + b) * (a - b)) % p, (2 * a * b) % p)


def fp2_neg(p: int, u: Fp2) -> Fp2:
    return ((-u[0]) % p, (-u[1]) % p)


def fp2_conj(p: int, u: Fp2) -> Fp2:
    """Conjugate a - bi; equals the Frobenius u^p when p = 3 (mod 4)."""
    return (u[0], (-u[1]) % p)


def fp2_inv(p: int, u: Fp2) -> Fp2:
    a, b = u
    norm = (a * a + b * b) % p
    if norm == 0:
        raise FieldError("inverse of zero")
    ninv = pow(norm, -1, p)
    return ((a * ninv) % p, (-b * ninv) % p)


def fp2_pow(p: int, u: Fp2, e: int) -> Fp2:
    if e < 0:
        u = fp2_inv(p, u)
        e = -e
    acc = FP2_ONE
    base = u
    while e:
        if e & 1:
            acc = fp2_mul(p, acc, base)
        base = fp2_sqr(p, base)
        e >>= 1
    return acc
