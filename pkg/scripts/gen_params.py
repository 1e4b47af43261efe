#!/usr/bin/env python3
"""Search for a fresh curve parameter set and print it as Python source.

    python scripts/gen_params.py --q-bits 160 --p-bits 512 --seed dvmps-demo-v1

The built-in DEMO set is the pinned output for seed "dvmps-demo-v1".
"""

import argparse
import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from dvmps.algebra import generate_curve_params, in_subgroup


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--q-bits", type=int, default=160)
    parser.add_argument("--p-bits", type=int, default=512)
    parser.add_argument("--seed", default="dvmps-demo-v1")
    args = parser.parse_args()

    t0 = time.perf_counter()
    params = generate_curve_params(args.q_bits, args.p_bits, args.seed.encode())
    elapsed = time.perf_counter() - t0

    assert params.p % 4 == 3
    assert in_subgroup(params, params.generator)
    print(f"# generated in {elapsed:.1f}s from seed {args.seed!r}")
    print("CurveParams(")
    print(f"    p={hex(params.p).upper().replace('0X', '0x')},")
    print(f"    q={hex(params.q).upper().replace('0X', '0x')},")
    print(f"    cofactor={hex(params.cofactor).upper().replace('0X', '0x')},")
    print("    generator=GroupElement(")
    print(f"        {hex(params.generator.x).upper().replace('0X', '0x')},")
    print(f"        {hex(params.generator.y).upper().replace('0X', '0x')},")
    print("    ),")
    print(")")


if __name__ == "__main__":
    main()
