"""Scheme operations: honest paths, golden toy fixtures, negative cases."""

import pytest

from dvmps import codec
from dvmps.algebra import (
    OpCounters,
    in_subgroup,
    pairing,
    point_add,
    scalar_mul,
)
from dvmps.model import (
    InvalidDelegationError,
    InvalidPartialError,
    PolicyError,
    Verdict,
    Warrant,
)
from dvmps.scheme import (
    aggregate,
    commit,
    correctness_trace,
    delegate,
    delegation_challenge,
    derive_proxy_key,
    extract_key,
    forge_without_proxy_secrets,
    message_digest,
    partial_sign,
    run_pipeline,
    setup,
    signing_challenge,
    verify_delegation,
    verify_mps,
    verify_partial,
)

from conftest import FIXTURE_DIR


def make_warrant(proxies=("p1", "p2", "p3"), message=b"pay the invoice", **kw):
    fields = dict(
        original_signer="alice",
        proxy_signers=tuple(proxies),
        designated_verifier="cindy",
        message_digest=message_digest(message),
        not_before=0,
        not_after=1 << 40,
    )
    fields.update(kw)
    return Warrant(**fields)


# --- setup / key extraction ---


def test_setup_deterministic():
    a = setup("toy", b"seed")
    b = setup("toy", b"seed")
    assert a == b
    assert a[1].value != 0


def test_setup_unknown_param_set():
    with pytest.raises(ValueError):
        setup("nope", b"seed")


def test_setup_empty_seed():
    with pytest.raises(PolicyError):
        setup("toy", b"")


def test_extracted_key_satisfies_pairing_identity(toy_setup):
    params, master = toy_setup
    curve = params.curve
    keys = extract_key(params, master, "alice")
    assert pairing(curve, keys.secret, curve.generator) == pairing(
        curve, keys.public, params.master_pub
    )


def test_extract_deterministic_and_distinct(toy_setup):
    params, master = toy_setup
    a1 = extract_key(params, master, "alice")
    a2 = extract_key(params, master, "alice")
    b = extract_key(params, master, "bob")
    assert a1 == a2
    assert a1.public != b.public
    assert in_subgroup(params.curve, a1.public)
    assert in_subgroup(params.curve, a1.secret)


def test_extract_empty_identity(toy_setup):
    params, master = toy_setup
    with pytest.raises(PolicyError):
        extract_key(params, master, "")


# --- warrant invariants ---


def test_warrant_rejects_bad_shapes():
    with pytest.raises(PolicyError):
        make_warrant(proxies=())
    with pytest.raises(PolicyError):
        make_warrant(proxies=("p1", "p1"))
    with pytest.raises(PolicyError):
        make_warrant(not_before=10, not_after=10)
    with pytest.raises(PolicyError):
        make_warrant(original_signer="")


# --- delegation ---


def test_delegation_verifies(toy_setup, toy_keys):
    params, _ = toy_setup
    w = make_warrant()
    d = delegate(params, toy_keys["alice"], toy_keys["cindy"].public, w, b"seed-1")
    assert verify_delegation(params, d, toy_keys["alice"].public)


def test_delegation_counts(toy_setup, toy_keys):
    params, _ = toy_setup
    w = make_warrant()
    d = delegate(params, toy_keys["alice"], toy_keys["cindy"].public, w, b"seed-1")
    session = OpCounters()
    verify_delegation(params, d, toy_keys["alice"].public, session)
    assert session.as_tuple() == (1, 0, 1, 3, 0)


def test_delegation_seed_changes_commitment(demo_setup, demo_keys):
    params, _ = demo_setup
    w = make_warrant()
    d1 = delegate(params, demo_keys["alice"], demo_keys["cindy"].public, w, b"seed-1")
    d2 = delegate(params, demo_keys["alice"], demo_keys["cindy"].public, w, b"seed-2")
    assert d1.commitment != d2.commitment


def test_delegation_wrong_signer(toy_setup, toy_keys):
    params, _ = toy_setup
    w = make_warrant()
    with pytest.raises(PolicyError):
        delegate(params, toy_keys["p1"], toy_keys["cindy"].public, w, b"s")


def test_delegation_tamper_proof_point(toy_setup, toy_keys):
    params, _ = toy_setup
    w = make_warrant()
    d = delegate(params, toy_keys["alice"], toy_keys["cindy"].public, w, b"seed-1")
    bad = type(d)(d.warrant, d.commitment, point_add(params.curve.p, d.proof, params.curve.generator))
    assert not verify_delegation(params, bad, toy_keys["alice"].public)


def test_delegation_tamper_warrant_byte(demo_setup, demo_keys):
    params, _ = demo_setup
    w = make_warrant()
    d = delegate(params, demo_keys["alice"], demo_keys["cindy"].public, w, b"seed-1")
    w2 = make_warrant(message=b"pay the invoicf")
    bad = type(d)(w2, d.commitment, d.proof)
    assert not verify_delegation(params, bad, demo_keys["alice"].public)


def test_delegation_golden_fixture(toy_setup, toy_keys):
    """Pinned (nonce, commitment, challenge, proof) for a fixed seed."""
    params, _ = toy_setup
    fx = codec.read_fixture(FIXTURE_DIR / "toy" / "delegation.fix")
    w = codec.decode_warrant(fx["warrant"])
    d = delegate(params, toy_keys["alice"], toy_keys["cindy"].public, w, fx["seed"])
    curve = params.curve
    assert codec.encode_point(curve, d.commitment) == fx["commitment"]
    assert codec.encode_point(curve, d.proof) == fx["proof"]
    chal = delegation_challenge(params, w, d.commitment)
    assert codec.encode_scalar(curve, chal) == fx["challenge"]


# --- proxy key derivation ---


def test_proxy_key_identity(toy_setup, toy_keys):
    # e(S_P, P) == e(Q_proxy + Q_alice, master_pub)^chal * e(U, P)
    params, _ = toy_setup
    curve = params.curve
    w = make_warrant()
    d = delegate(params, toy_keys["alice"], toy_keys["cindy"].public, w, b"seed-1")
    pk = derive_proxy_key(params, d, toy_keys["p1"], toy_keys["alice"].public)
    chal = delegation_challenge(params, w, d.commitment)
    lhs = pairing(curve, pk.key, curve.generator)
    joint = point_add(curve.p, toy_keys["p1"].public, toy_keys["alice"].public)
    from dvmps.algebra import gt_mul, gt_pow

    rhs = gt_mul(
        curve,
        gt_pow(curve, pairing(curve, joint, params.master_pub), chal),
        pairing(curve, d.commitment, curve.generator),
    )
    assert lhs == rhs


def test_derive_refuses_bad_delegation(toy_setup, toy_keys):
    params, _ = toy_setup
    w = make_warrant()
    d = delegate(params, toy_keys["alice"], toy_keys["cindy"].public, w, b"seed-1")
    bad = type(d)(d.warrant, d.commitment, point_add(params.curve.p, d.proof, params.curve.generator))
    with pytest.raises(InvalidDelegationError):
        derive_proxy_key(params, bad, toy_keys["p1"], toy_keys["alice"].public)


def test_derive_refuses_outsider(toy_setup, toy_keys):
    params, master = toy_setup
    w = make_warrant(proxies=("p1",))
    d = delegate(params, toy_keys["alice"], toy_keys["cindy"].public, w, b"seed-1")
    with pytest.raises(PolicyError):
        derive_proxy_key(params, d, toy_keys["p2"], toy_keys["alice"].public)


# --- commitments and partial signatures ---


def _delegated(params, keys, proxies=("p1", "p2")):
    w = make_warrant(proxies=proxies)
    d = delegate(params, keys["alice"], keys["cindy"].public, w, b"deleg-seed")
    pkeys = [derive_proxy_key(params, d, keys[s], keys["alice"].public) for s in proxies]
    return w, d, pkeys


def test_commitment_in_subgroup(toy_setup, toy_keys):
    params, _ = toy_setup
    _, _, pkeys = _delegated(params, toy_keys)
    c, t = commit(params, pkeys[0], toy_keys["cindy"].public, b"commit-seed")
    assert in_subgroup(params.curve, c.point)
    assert 1 <= t < params.curve.q


def test_commit_distinct_seeds_distinct_points(demo_setup, demo_keys):
    params, _ = demo_setup
    _, _, pkeys = _delegated(params, demo_keys)
    c1, _ = commit(params, pkeys[0], demo_keys["cindy"].public, b"s1")
    c2, _ = commit(params, pkeys[0], demo_keys["cindy"].public, b"s2")
    assert c1.point != c2.point


def test_partial_signs_and_verifies(toy_setup, toy_keys):
    params, _ = toy_setup
    w, d, pkeys = _delegated(params, toy_keys)
    vpub = toy_keys["cindy"].public
    commitments, nonces = [], {}
    for pk in pkeys:
        c, t = commit(params, pk, vpub, b"seed-" + pk.holder.encode())
        commitments.append(c)
        nonces[pk.holder] = t
    from dvmps.scheme import commitment_sum

    z_sum = commitment_sum(params, commitments)
    for pk in pkeys:
        ps = partial_sign(params, pk, nonces[pk.holder], commitments, vpub)
        assert verify_partial(
            params, ps, z_sum, d, toy_keys[pk.holder].public, toy_keys["alice"].public
        )


def test_partial_rejects_commitment_set_mismatch(toy_setup, toy_keys):
    params, _ = toy_setup
    w, d, pkeys = _delegated(params, toy_keys)
    vpub = toy_keys["cindy"].public
    c1, t1 = commit(params, pkeys[0], vpub, b"s1")
    with pytest.raises(PolicyError):
        partial_sign(params, pkeys[0], t1, [c1], vpub)  # p2 missing
    c2, _ = commit(params, pkeys[1], vpub, b"s2")
    with pytest.raises(PolicyError):
        partial_sign(params, pkeys[0], t1, [c1, c1, c2], vpub)  # duplicate


def test_partial_rejects_foreign_nonce(toy_setup, toy_keys):
    params, _ = toy_setup
    _, _, pkeys = _delegated(params, toy_keys)
    vpub = toy_keys["cindy"].public
    c1, t1 = commit(params, pkeys[0], vpub, b"s1")
    c2, t2 = commit(params, pkeys[1], vpub, b"s2")
    with pytest.raises(PolicyError):
        partial_sign(params, pkeys[0], t2, [c1, c2], vpub)


def test_verify_partial_tamper(toy_setup, toy_keys):
    params, _ = toy_setup
    w, d, pkeys = _delegated(params, toy_keys)
    vpub = toy_keys["cindy"].public
    commitments, nonces = [], {}
    for pk in pkeys:
        c, t = commit(params, pk, vpub, b"seed-" + pk.holder.encode())
        commitments.append(c)
        nonces[pk.holder] = t
    from dvmps.scheme import commitment_sum

    z_sum = commitment_sum(params, commitments)
    ps = partial_sign(params, pkeys[0], nonces["p1"], commitments, vpub)
    bad = type(ps)(
        ps.signer, ps.commitment, point_add(params.curve.p, ps.response, params.curve.generator)
    )
    assert not verify_partial(
        params, bad, z_sum, d, toy_keys["p1"].public, toy_keys["alice"].public
    )
    # different commitment sum -> different challenge -> reject
    other_sum = point_add(params.curve.p, z_sum, params.curve.generator)
    assert not verify_partial(
        params, ps, other_sum, d, toy_keys["p1"].public, toy_keys["alice"].public
    )


def test_signing_golden_fixture(toy_setup, toy_keys):
    """Pinned n=2 signing transcript values for fixed seeds."""
    params, _ = toy_setup
    curve = params.curve
    fx = codec.read_fixture(FIXTURE_DIR / "toy" / "signing.fix")
    w = codec.decode_warrant(fx["warrant"])
    d = codec.decode_delegation(curve, fx["delegation"])
    pkeys = [
        derive_proxy_key(params, d, toy_keys[s], toy_keys["alice"].public)
        for s in w.proxy_signers
    ]
    vpub = toy_keys["cindy"].public
    commitments, nonces = [], {}
    for pk in pkeys:
        c, t = commit(params, pk, vpub, fx[f"commit_seed_{pk.holder}"])
        commitments.append(c)
        nonces[pk.holder] = t
    from dvmps.scheme import commitment_sum

    z_sum = commitment_sum(params, commitments)
    assert codec.encode_point(curve, z_sum) == fx["commitment_sum"]
    chal = signing_challenge(params, w, z_sum)
    assert codec.encode_scalar(curve, chal) == fx["signing_challenge"]
    for pk in pkeys:
        ps = partial_sign(params, pk, nonces[pk.holder], commitments, vpub)
        assert codec.encode_partial(curve, ps) == fx[f"partial_{pk.holder}"]


# --- aggregation ---


def test_aggregate_names_offender(toy_setup, toy_keys):
    params, _ = toy_setup
    w, d, pkeys = _delegated(params, toy_keys)
    vpub = toy_keys["cindy"].public
    commitments, nonces = [], {}
    for pk in pkeys:
        c, t = commit(params, pk, vpub, b"seed-" + pk.holder.encode())
        commitments.append(c)
        nonces[pk.holder] = t
    partials = [
        partial_sign(params, pk, nonces[pk.holder], commitments, vpub) for pk in pkeys
    ]
    pubs = {s: toy_keys[s].public for s in w.proxy_signers}
    corrupted = list(partials)
    corrupted[1] = type(partials[1])(
        partials[1].signer,
        partials[1].commitment,
        point_add(params.curve.p, partials[1].response, params.curve.generator),
    )
    with pytest.raises(InvalidPartialError) as err:
        aggregate(params, corrupted, d, pubs, toy_keys["alice"].public)
    assert err.value.signer == "p2"


def test_aggregate_order_independent(toy_run):
    params = toy_run.params
    pubs = {kp.identity: kp.public for kp in toy_run.proxies}
    sig1 = aggregate(
        params, toy_run.partials, toy_run.delegation, pubs, toy_run.alice.public
    )
    sig2 = aggregate(
        params,
        list(reversed(toy_run.partials)),
        toy_run.delegation,
        pubs,
        toy_run.alice.public,
    )
    assert sig1.commitment_sum == sig2.commitment_sum
    assert sig1.response_sum == sig2.response_sum


# --- designated verification ---


def test_honest_n3_accepts(toy_run):
    assert toy_run.verdict is Verdict.ACCEPT


def test_single_proxy_degenerate_case(toy_setup):
    tr = run_pipeline(
        "toy",
        master_seed=b"conftest-master-seed",
        original_signer="alice",
        proxy_signers=["p1"],
        designated_verifier="cindy",
        message=b"single signer",
        seed=b"n1-seed",
    )
    assert tr.verdict is Verdict.ACCEPT


def test_verify_rejects_perturbed_components(demo_run):
    # on the demo curve a perturbation accepting by chance is ~2^-160
    params = demo_run.params
    curve = params.curve
    sig = demo_run.signature
    gen = curve.generator
    pubs = [kp.public for kp in demo_run.proxies]
    variants = [
        type(sig)(sig.warrant, point_add(curve.p, sig.commitment_sum, gen), sig.response_sum, sig.delegation_commitment),
        type(sig)(sig.warrant, sig.commitment_sum, point_add(curve.p, sig.response_sum, gen), sig.delegation_commitment),
        type(sig)(sig.warrant, sig.commitment_sum, sig.response_sum, point_add(curve.p, sig.delegation_commitment, gen)),
    ]
    for bad in variants:
        assert (
            verify_mps(params, bad, demo_run.verifier, demo_run.alice.public, pubs, now=1)
            is Verdict.REJECT_CRYPTO
        )
    # warrant perturbation: same crypto payload, different message binding
    w2 = make_warrant(message=b"shared honest run!")
    bad = type(sig)(w2, sig.commitment_sum, sig.response_sum, sig.delegation_commitment)
    assert (
        verify_mps(params, bad, demo_run.verifier, demo_run.alice.public, pubs, now=1)
        is Verdict.REJECT_CRYPTO
    )


def test_verify_requires_designated_verifier_secret(demo_setup, demo_run):
    """A non-designated user's secret key never validates an honest
    signature: under their own name it is a policy rejection, and swapping
    just their secret into the designated slot fails the equation."""
    params, master = demo_setup
    eve = extract_key(params, master, "eve")
    pubs = [kp.public for kp in demo_run.proxies]
    assert (
        verify_mps(params, demo_run.signature, eve, demo_run.alice.public, pubs, now=1)
        is Verdict.REJECT_POLICY
    )
    wrong_secret = type(eve)("cindy", demo_run.verifier.public, eve.secret)
    assert (
        verify_mps(params, demo_run.signature, wrong_secret, demo_run.alice.public, pubs, now=1)
        is Verdict.REJECT_CRYPTO
    )


def test_verify_policy_rejections(toy_run):
    params = toy_run.params
    pubs = [kp.public for kp in toy_run.proxies]
    # expired window is policy, not crypto
    assert (
        verify_mps(
            params,
            toy_run.signature,
            toy_run.verifier,
            toy_run.alice.public,
            pubs,
            now=float(1 << 41),
        )
        is Verdict.REJECT_POLICY
    )
    with pytest.raises(PolicyError):
        verify_mps(
            params, toy_run.signature, toy_run.verifier, toy_run.alice.public, pubs[:1], now=1
        )


def test_end_to_end_small_sweep():
    for n in (1, 2, 3, 5):
        for seed in range(3):
            tr = run_pipeline(
                "toy",
                master_seed=b"sweep-master",
                original_signer="alice",
                proxy_signers=[f"p{i}" for i in range(1, n + 1)],
                designated_verifier="cindy",
                message=b"sweep",
                seed=b"sweep-%d-%d" % (n, seed),
            )
            assert tr.verdict is Verdict.ACCEPT, (n, seed)


# --- correctness trace ---


def test_correctness_trace_toy(toy_run):
    trace = correctness_trace(toy_run.params, toy_run)
    assert len(trace) == 5
    assert all(v == trace[0] for v in trace)
    expected_final = pairing(
        toy_run.params.curve, toy_run.signature.commitment_sum, toy_run.verifier.public
    )
    assert trace[-1] == expected_final


def test_correctness_trace_demo(demo_run):
    trace = correctness_trace(demo_run.params, demo_run)
    assert all(v == trace[0] for v in trace)


# --- adversarial helpers ---


def test_forgery_without_proxy_secrets_rejected(toy_setup, toy_keys):
    params, master = toy_setup
    for proxies in (("p1",), ("p1", "p2", "p3")):
        w = make_warrant(proxies=proxies)
        forged = forge_without_proxy_secrets(
            params, toy_keys["alice"], w, toy_keys["cindy"].public, b"forge-seed"
        )
        pubs = [toy_keys[s].public for s in proxies]
        assert (
            verify_mps(params, forged, toy_keys["cindy"], toy_keys["alice"].public, pubs, now=1)
            is Verdict.REJECT_CRYPTO
        )


def test_forgery_rejected_by_every_verifier(toy_setup, toy_keys):
    params, master = toy_setup
    w = make_warrant(proxies=("p1", "p2"))
    forged = forge_without_proxy_secrets(
        params, toy_keys["alice"], w, toy_keys["cindy"].public, b"forge-seed"
    )
    pubs = [toy_keys[s].public for s in w.proxy_signers]
    for name in ("cindy", "alice", "p1", "p2", "p3"):
        keys = toy_keys[name]
        under_own_name = verify_mps(
            params, forged, keys, toy_keys["alice"].public, pubs, now=1
        )
        assert under_own_name is not Verdict.ACCEPT
        imposter = type(keys)("cindy", keys.public, keys.secret)
        assert (
            verify_mps(params, forged, imposter, toy_keys["alice"].public, pubs, now=1)
            is not Verdict.ACCEPT
        )


def test_zero_proxy_warrant_is_policy_error():
    with pytest.raises(PolicyError):
        make_warrant(proxies=())


def test_warrant_binding(demo_run):
    """A signature for one warrant never verifies under another."""
    params = demo_run.params
    sig = demo_run.signature
    pubs = [kp.public for kp in demo_run.proxies]
    for i in range(10):
        other = make_warrant(message=b"different message %d" % i)
        moved = type(sig)(other, sig.commitment_sum, sig.response_sum, sig.delegation_commitment)
        assert (
            verify_mps(params, moved, demo_run.verifier, demo_run.alice.public, pubs, now=1)
            is Verdict.REJECT_CRYPTO
        )


def test_clerk_commitment_swap_invalidates_partials(demo_setup, demo_keys):
    """Changing any round-1 commitment after the fact shifts the signing
    challenge, so every previously received partial fails the clerk check."""
    params, _ = demo_setup
    w, d, pkeys = _delegated(params, demo_keys)
    vpub = demo_keys["cindy"].public
    commitments, nonces = [], {}
    for pk in pkeys:
        c, t = commit(params, pk, vpub, b"seed-" + pk.holder.encode())
        commitments.append(c)
        nonces[pk.holder] = t
    partials = [
        partial_sign(params, pk, nonces[pk.holder], commitments, vpub) for pk in pkeys
    ]
    from dvmps.scheme import commitment_sum

    honest_sum = commitment_sum(params, commitments)
    swapped_sum = point_add(params.curve.p, honest_sum, params.curve.generator)
    for ps in partials:
        assert verify_partial(
            params, ps, honest_sum, d, demo_keys[ps.signer].public, demo_keys["alice"].public
        )
        assert not verify_partial(
            params, ps, swapped_sum, d, demo_keys[ps.signer].public, demo_keys["alice"].public
        )
