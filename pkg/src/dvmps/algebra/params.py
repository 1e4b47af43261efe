"""Built-in parameter sets and the search procedure that produced them.

Two sets ship pinned:

  TOY  -- p = 43, q = 11, cofactor 4. Small enough to enumerate the whole
          curve; every exhaustive oracle in the test suite runs here.
  DEMO -- ~512-bit p with a 160-bit q, for realistic timings.

NEITHER SET IS A PRODUCTION SECURITY LEVEL. The whole package is an
instrumented reference, not a hardened library.

A curve here is always y^2 = x^3 + x over F_p with p = 3 (mod 4), which
is supersingular with #E(F_p) = p + 1; the search finds prime q, then a
cofactor c = 0 (mod 4) making p = c*q - 1 prime (p = 3 mod 4 follows).
"""

from __future__ import annotations

import random

from .curve import INFINITY, CurveParams, GroupElement, clear_cofactor
from .field import FieldError, fp_sqrt

_SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71]


def is_probable_prime(n: int, rng: random.Random | None = None, rounds: int = 40) -> bool:
    if n < 2:
        return False
    for sp in _SMALL_PRIMES:
        if n % sp == 0:
            return n == sp
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    rng = rng or random.Random(0xC0FFEE)
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = (x * x) % n
            if x == n - 1:
                break
        else:
            return False
    return True


def find_generator(p: int, q: int, cofactor: int) -> GroupElement:
    """Deterministic: smallest x whose cofactor-cleared point is not infinity."""
    probe = CurveParams(p, q, cofactor, INFINITY)
    for x in range(1, p):
        try:
            y = fp_sqrt(p, (x * x * x + x) % p)
        except FieldError:
            continue
        pt = clear_cofactor(probe, GroupElement(x, y))
        if not pt.is_infinity:
            return pt
    raise ValueError("no generator found; q does not divide p+1?")


def generate_curve_params(q_bits: int, p_bits: int, seed: bytes) -> CurveParams:
    """Search for a parameter set of the given sizes, reproducibly from seed."""
    rng = random.Random(int.from_bytes(seed, "big") if seed else 0)
    # subgroup order q: random odd candidate, stepped to the next prime
    q = rng.getrandbits(q_bits) | (1 << (q_bits - 1)) | 1
    while not is_probable_prime(q, rng):
        q += 2
    # cofactor c = 0 (mod 4) so that p = c*q - 1 = 3 (mod 4)
    c_bits = p_bits - q.bit_length()
    c = (rng.getrandbits(c_bits) | (1 << (c_bits - 1))) & ~0x3
    while True:
        p = c * q - 1
        if p.bit_length() == p_bits and is_probable_prime(p, rng):
            break
        c += 4
    return CurveParams(p=p, q=q, cofactor=c, generator=find_generator(p, q, c))


_TOY_P = 43
_TOY_Q = 11

TOY = CurveParams(
    p=_TOY_P,
    q=_TOY_Q,
    cofactor=4,
    generator=find_generator(_TOY_P, _TOY_Q, 4),
)

# Pinned output of generate_curve_params(160, 512, b"dvmps-demo-v1");
# regenerate with scripts/gen_params.py.
DEMO = CurveParams(
    p=0x8A1CF46906EC4F8EAD900928B3882C5F60F5C2399587312DF303A305C58A5A64B6769CF662381980FA7B9C2A304494922C4679E42BBB7148CF821F980F860ED3,
    q=0xD6D4F0D965A321FD8ADF3AE769C3CF28560DEC8B,
    cofactor=0xA49467AEFAD405169B1E1F7E2DA787395EBDE807A6EFEFEAC30A1E75EB0B2B57512E0266085A40ECE44C62FC,
    generator=GroupElement(
        0x708BA4FDD9E606D3325F631053347215EE0BAADB27EC4F587E3A308F565F95EFC2A3713D213175AA3C5C22825D2E011591A928490C368F1479D65B8B13854141,
        0x4373E3CD9AF5F8A72A892F9D61051F66089EAD133F3A67E4BC140957B91B0A395CA3A177A34C27A828A22DBE31DE43BAED052391FF2D1327A1C841C85100A721,
    ),
)

PARAM_SETS: dict[str, CurveParams] = {"toy": TOY, "demo": DEMO}


def get_params(name: str) -> CurveParams:
    try:
        return PARAM_SETS[name]
    except KeyError:
        raise ValueError(f"unknown parameter set {name!r}; known: {sorted(PARAM_SETS)}") from None
