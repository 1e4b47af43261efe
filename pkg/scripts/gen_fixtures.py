#!/usr/bin/env python3
"""Regenerate the golden fixture files under tests/fixtures/.

Run from the repository root after an intentional format change:

    python scripts/gen_fixtures.py

Anything this writes is release-gated: a diff here means every existing
signature and transcript just became invalid.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from dvmps import codec
from dvmps.algebra import scalar_hash_input
from dvmps.scheme import (
    commit,
    commitment_sum,
    delegate,
    delegation_challenge,
    derive_proxy_key,
    extract_key,
    message_digest,
    partial_sign,
    run_pipeline,
    setup,
    signing_challenge,
)
from dvmps.model import Warrant

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"

MASTER_SEED = b"conftest-master-seed"


def toy_delegation():
    params, master = setup("toy", MASTER_SEED)
    curve = params.curve
    alice = extract_key(params, master, "alice")
    cindy = extract_key(params, master, "cindy")
    warrant = Warrant(
        original_signer="alice",
        proxy_signers=("p1", "p2", "p3"),
        designated_verifier="cindy",
        message_digest=message_digest(b"pay the invoice"),
        not_before=0,
        not_after=1 << 40,
    )
    seed = b"golden-delegation-seed"
    d = delegate(params, alice, cindy.public, warrant, seed)
    chal = delegation_challenge(params, warrant, d.commitment)
    codec.write_fixture(
        FIXTURES / "toy" / "delegation.fix",
        {
            "warrant": codec.encode_warrant(warrant),
            "seed": seed,
            "commitment": codec.encode_point(curve, d.commitment),
            "challenge": codec.encode_scalar(curve, chal),
            "proof": codec.encode_point(curve, d.proof),
        },
    )


def toy_signing():
    params, master = setup("toy", MASTER_SEED)
    curve = params.curve
    keys = {n: extract_key(params, master, n) for n in ("alice", "p1", "p2", "cindy")}
    warrant = Warrant(
        original_signer="alice",
        proxy_signers=("p1", "p2"),
        designated_verifier="cindy",
        message_digest=message_digest(b"two signer fixture"),
        not_before=0,
        not_after=1 << 40,
    )
    d = delegate(params, keys["alice"], keys["cindy"].public, warrant, b"golden-sign-deleg")
    pkeys = [
        derive_proxy_key(params, d, keys[s], keys["alice"].public)
        for s in warrant.proxy_signers
    ]
    entries = {
        "warrant": codec.encode_warrant(warrant),
        "delegation": codec.encode_delegation(curve, d),
    }
    commitments, nonces = [], {}
    for pk in pkeys:
        seed = b"golden-commit-" + pk.holder.encode()
        entries[f"commit_seed_{pk.holder}"] = seed
        c, t = commit(params, pk, keys["cindy"].public, seed)
        commitments.append(c)
        nonces[pk.holder] = t
    z_sum = commitment_sum(params, commitments)
    entries["commitment_sum"] = codec.encode_point(curve, z_sum)
    entries["signing_challenge"] = codec.encode_scalar(
        curve, signing_challenge(params, warrant, z_sum)
    )
    for pk in pkeys:
        ps = partial_sign(params, pk, nonces[pk.holder], commitments, keys["cindy"].public)
        entries[f"partial_{pk.holder}"] = codec.encode_partial(curve, ps)
    codec.write_fixture(FIXTURES / "toy" / "signing.fix", entries)


def toy_h2_input():
    """The exact challenge-hash preimage for a fixed (warrant, point)."""
    params, master = setup("toy", MASTER_SEED)
    curve = params.curve
    warrant = Warrant(
        original_signer="alice",
        proxy_signers=("p1",),
        designated_verifier="cindy",
        message_digest=message_digest(b"hash input pin"),
        not_before=0,
        not_after=1 << 40,
    )
    point = curve.generator
    codec.write_fixture(
        FIXTURES / "toy" / "h2_input.fix",
        {
            "warrant": codec.encode_warrant(warrant),
            "point": codec.encode_point(curve, point),
            "preimage": scalar_hash_input(
                curve, codec.encode_warrant(warrant), point, params.h2_tag
            ),
        },
    )


def toy_transcript():
    """Honest n=3 protocol run, every delivered frame recorded."""
    from dvmps.protocol import SessionConfig, run_session

    cfg = SessionConfig(
        param_set="toy",
        master_seed=b"proto-master",
        session_seed=b"proto-session",
        original_signer="alice",
        proxy_signers=("p1", "p2", "p3"),
        clerk="p1",
        designated_verifier="cindy",
        message=b"protocol test message",
    )
    out = run_session(cfg)
    assert out.done
    curve = setup(cfg.param_set, cfg.master_seed)[0].curve
    entries = {"frame_count": len(out.transcript).to_bytes(4, "big")}
    for i, (to, frame) in enumerate(out.transcript):
        entries[f"to_{i}"] = to.encode("utf-8")
        entries[f"frame_{i}"] = frame
    entries["signature"] = codec.encode_signature(curve, out.signature)
    codec.write_fixture(FIXTURES / "toy" / "transcript.fix", entries)


def demo_pipeline():
    tr = run_pipeline(
        "demo",
        master_seed=MASTER_SEED,
        original_signer="alice",
        proxy_signers=["p1", "p2", "p3"],
        designated_verifier="cindy",
        message=b"golden demo pipeline",
        seed=b"golden-demo-seed",
    )
    codec.write_fixture(
        FIXTURES / "demo" / "pipeline.fix",
        {
            "signature": codec.encode_signature(tr.params.curve, tr.signature),
            "verdict": tr.verdict.value.encode(),
        },
    )


def main():
    (FIXTURES / "toy").mkdir(parents=True, exist_ok=True)
    (FIXTURES / "demo").mkdir(parents=True, exist_ok=True)
    toy_delegation()
    toy_signing()
    toy_h2_input()
    toy_transcript()
    demo_pipeline()
    for path in sorted(FIXTURES.rglob("*.fix")):
        print("wrote", path.relative_to(FIXTURES.parent.parent))


if __name__ == "__main__":
    main()
