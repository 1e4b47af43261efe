#!/usr/bin/env python3
"""Scripted end-to-end demo of the CLI lifecycle.

Creates a throwaway keystore, walks setup -> extract x5 -> delegate ->
sign (three proxy signers, clerk p2) -> verify, then shows two negative
verifications: a non-designated keystore and a byte-flipped signature.

    python scripts/run_demo.py [--params toy|demo]
"""

import argparse
import json
import pathlib
import sys
import tempfile

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from dvmps.cli import main as dvmps


def run(argv, expect=0):
    print(f"$ dvmps {' '.join(argv)}")
    code = dvmps(argv)
    print(f"  -> exit {code}")
    assert code == expect, f"expected exit {expect}, got {code}"
    return code


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--params", default="toy", choices=["toy", "demo"])
    args = parser.parse_args()

    with tempfile.TemporaryDirectory(prefix="dvmps-demo-") as tmp:
        tmp = pathlib.Path(tmp)
        ks = ["--keystore", str(tmp / "ks"), "--params", args.params,
              "--passphrase", "demo-passphrase"]

        run(["setup", "--seed", "0123456789abcdef", *ks])
        for identity in ("alice", "p1", "p2", "p3", "cindy", "eve"):
            run(["extract", identity, *ks])

        warrant = tmp / "warrant.json"
        warrant.write_text(json.dumps({
            "original_signer": "alice",
            "proxy_signers": ["p1", "p2", "p3"],
            "designated_verifier": "cindy",
            "message": "release the quarterly report",
        }))
        run(["delegate", str(warrant), "--seed", "1111", *ks])

        session = tmp / "session.json"
        session.write_text(json.dumps({"clerk": "p2", "seed": "2222"}))
        run(["sign", str(session), *ks])

        sig = tmp / "ks" / "signature.dvmps"
        print("\n-- designated verifier accepts --")
        run(["verify", str(sig), *ks])

        print("\n-- non-designated verifier's secret is rejected --")
        run(["verify", str(sig), "--verifier", "eve", *ks], expect=2)

        print("\n-- one flipped byte is rejected --")
        blob = bytearray(sig.read_bytes())
        blob[len(blob) // 2] ^= 0x01
        flipped = tmp / "flipped.dvmps"
        flipped.write_bytes(bytes(blob))
        run(["verify", str(flipped), *ks], expect=2)

        print("\n-- operation counts --")
        run(["bench", "--n-list", "1,3", *ks])

    print("\ndemo complete")


if __name__ == "__main__":
    main()
