"""The five signing phases over the pairing backend.

Challenge scalars are always recomputed from public data: the delegation
challenge from (warrant, delegation commitment) and the signing challenge
from (warrant, summed round-1 commitments). Nothing secret is ever hashed.

Every randomized operation takes a seed and derives its nonce
deterministically, so whole runs replay byte-for-byte. Counting sessions
are optional everywhere; see algebra.counters for the convention.

WARNING: research code. Not constant-time, not hardened, and the built-in
parameter sets are far below production sizes.
"""

from __future__ import annotations

import hashlib
import time
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from . import codec
from .algebra import (
    GroupElement,
    OpCounters,
    TargetElement,
    counters_snapshot,
    get_params,
    gt_mul,
    gt_pow,
    hash_to_group,
    hash_to_scalar,
    pairing,
    point_add,
    point_neg,
    point_sub,
    scalar_from_seed,
    scalar_mul,
)
from .model import (
    Commitment,
    Delegation,
    InvalidDelegationError,
    InvalidPartialError,
    MasterSecret,
    MultiProxySignature,
    PartialSignature,
    PolicyError,
    ProxyKey,
    SystemParams,
    UserKeyPair,
    Verdict,
    Warrant,
)

_MASTER_LABEL = b"dvmps/master-secret"
_DELEGATE_LABEL = b"dvmps/delegation-nonce"
_COMMIT_LABEL = b"dvmps/commit-nonce"


def message_digest(message: bytes) -> bytes:
    """The digest bound into warrants for the delegated message."""
    return hashlib.sha256(message).digest()


def setup(
    param_set: str,
    master_seed: bytes,
    session: OpCounters | None = None,
) -> tuple[SystemParams, MasterSecret]:
    """Derive the authority keypair for a named parameter set.

    Deterministic in the seed; the master scalar is nonzero by
    construction (zero residues re-derive with a bumped counter).
    """
    if not master_seed:
        raise PolicyError("empty master seed")
    curve = get_params(param_set)
    s = scalar_from_seed(curve.q, master_seed, _MASTER_LABEL)
    master_pub = scalar_mul(curve, s, curve.generator, session)
    return SystemParams(curve, master_pub), MasterSecret(s)


def extract_key(
    params: SystemParams,
    master: MasterSecret,
    identity: str,
    session: OpCounters | None = None,
) -> UserKeyPair:
    if not identity:
        raise PolicyError("empty identity")
    curve = params.curve
    public = hash_to_group(curve, identity.encode("utf-8"), params.h1_tag, session)
    secret = scalar_mul(curve, master.value, public, session)
    return UserKeyPair(identity, public, secret)


def identity_point(
    params: SystemParams,
    identity: str,
    session: OpCounters | None = None,
) -> GroupElement:
    """Anyone can compute a user's public point from the identity alone."""
    return hash_to_group(params.curve, identity.encode("utf-8"), params.h1_tag, session)


def delegation_challenge(
    params: SystemParams,
    warrant: Warrant,
    commitment: GroupElement,
    session: OpCounters | None = None,
) -> int:
    return hash_to_scalar(
        params.curve, codec.encode_warrant(warrant), commitment, params.h2_tag, session
    )


def signing_challenge(
    params: SystemParams,
    warrant: Warrant,
    commitment_sum: GroupElement,
    session: OpCounters | None = None,
) -> int:
    return hash_to_scalar(
        params.curve, codec.encode_warrant(warrant), commitment_sum, params.h2_tag, session
    )


def delegate(
    params: SystemParams,
    alice: UserKeyPair,
    verifier_pub: GroupElement,
    warrant: Warrant,
    rng_seed: bytes,
    session: OpCounters | None = None,
) -> Delegation:
    """Original signer's warrant signature (commitment U, proof V)."""
    if warrant.original_signer != alice.identity:
        raise PolicyError(
            f"warrant names {warrant.original_signer!r}, keys belong to {alice.identity!r}"
        )
    curve = params.curve
    r = scalar_from_seed(curve.q, rng_seed, _DELEGATE_LABEL)
    commitment = scalar_mul(curve, r, verifier_pub, session)
    chal = delegation_challenge(params, warrant, commitment, session)
    proof = point_add(curve.p, scalar_mul(curve, chal, alice.secret, session), commitment)
    return Delegation(warrant, commitment, proof)


def _delegation_equation_holds(
    params: SystemParams,
    delegation: Delegation,
    alice_pub: GroupElement,
    chal: int,
    session: OpCounters | None,
) -> bool:
    # e(proof, P) == e(alice_pub, master_pub)^chal * e(commitment, P)
    curve = params.curve
    lhs = pairing(curve, delegation.proof, curve.generator, session)
    rhs = gt_mul(
        curve,
        gt_pow(curve, pairing(curve, alice_pub, params.master_pub, session), chal, session),
        pairing(curve, delegation.commitment, curve.generator, session),
    )
    return lhs == rhs


def verify_delegation(
    params: SystemParams,
    delegation: Delegation,
    alice_pub: GroupElement,
    session: OpCounters | None = None,
) -> bool:
    """Exactly 3 pairings, 1 exponentiation, 1 hash."""
    chal = delegation_challenge(params, delegation.warrant, delegation.commitment, session)
    return _delegation_equation_holds(params, delegation, alice_pub, chal, session)


def derive_proxy_key(
    params: SystemParams,
    delegation: Delegation,
    proxy: UserKeyPair,
    alice_pub: GroupElement,
    session: OpCounters | None = None,
) -> ProxyKey:
    """Check the delegation and derive this signer's proxy key in one pass
    (the challenge is hashed once and reused for both)."""
    if proxy.identity not in delegation.warrant.proxy_signers:
        raise PolicyError(f"{proxy.identity!r} is not a proxy signer of this warrant")
    chal = delegation_challenge(params, delegation.warrant, delegation.commitment, session)
    if not _delegation_equation_holds(params, delegation, alice_pub, chal, session):
        raise InvalidDelegationError("delegation fails its verification equation")
    curve = params.curve
    key = point_add(curve.p, scalar_mul(curve, chal, proxy.secret, session), delegation.proof)
    return ProxyKey(proxy.identity, key, delegation)


def commit(
    params: SystemParams,
    proxy: ProxyKey,
    verifier_pub: GroupElement,
    rng_seed: bytes,
    session: OpCounters | None = None,
) -> tuple[Commitment, int]:
    """Round 1: nonce times the verifier's public point. The returned
    nonce stays with the caller until round 2."""
    curve = params.curve
    t = scalar_from_seed(curve.q, rng_seed, _COMMIT_LABEL)
    return Commitment(proxy.holder, scalar_mul(curve, t, verifier_pub, session)), t


def _check_commitment_cover(warrant: Warrant, signers: Iterable[str]) -> None:
    seen: list[str] = list(signers)
    expected = set(warrant.proxy_signers)
    if len(seen) != len(set(seen)):
        raise PolicyError("duplicate signer in commitment set")
    missing = expected - set(seen)
    extra = set(seen) - expected
    if missing or extra:
        raise PolicyError(
            f"commitment set mismatch: missing={sorted(missing)} extra={sorted(extra)}"
        )


def commitment_sum(params: SystemParams, commitments: Sequence[Commitment]) -> GroupElement:
    total: GroupElement = commitments[0].point
    for c in commitments[1:]:
        total = point_add(params.curve.p, total, c.point)
    return total


def partial_sign(
    params: SystemParams,
    proxy: ProxyKey,
    nonce: int,
    commitments: Sequence[Commitment],
    verifier_pub: GroupElement,
    session: OpCounters | None = None,
) -> PartialSignature:
    """Round 2: challenge over the summed commitments, response from the
    proxy key. The commitment set must cover the warrant's signers exactly,
    and the caller's entry must match its retained nonce."""
    warrant = proxy.delegation.warrant
    _check_commitment_cover(warrant, (c.signer for c in commitments))
    curve = params.curve
    own = next(c for c in commitments if c.signer == proxy.holder)
    if scalar_mul(curve, nonce, verifier_pub, session) != own.point:
        raise PolicyError(f"own commitment for {proxy.holder!r} does not match the nonce")
    summed = commitment_sum(params, commitments)
    chal = signing_challenge(params, warrant, summed, session)
    response = point_add(curve.p, scalar_mul(curve, chal, proxy.key, session), own.point)
    return PartialSignature(proxy.holder, own.point, response)


def verify_partial(
    params: SystemParams,
    partial: PartialSignature,
    commitment_total: GroupElement,
    delegation: Delegation,
    proxy_pub: GroupElement,
    alice_pub: GroupElement,
    session: OpCounters | None = None,
) -> bool:
    """Clerk-side check of one partial signature against the clerk's own
    commitment sum. 3 pairings, 1 exponentiation per call; both challenges
    are recomputed here."""
    curve = params.curve
    chal_d = delegation_challenge(params, delegation.warrant, delegation.commitment, session)
    chal_s = signing_challenge(params, delegation.warrant, commitment_total, session)
    lhs = pairing(curve, partial.response, curve.generator, session)
    joint = point_add(curve.p, proxy_pub, alice_pub)
    shifted = point_add(
        curve.p,
        partial.commitment,
        scalar_mul(curve, chal_s, delegation.commitment, session),
    )
    rhs = gt_mul(
        curve,
        gt_pow(
            curve,
            pairing(curve, joint, params.master_pub, session),
            (chal_d * chal_s) % curve.q,
            session,
        ),
        pairing(curve, shifted, curve.generator, session),
    )
    return lhs == rhs


def aggregate(
    params: SystemParams,
    partials: Sequence[PartialSignature],
    delegation: Delegation,
    proxy_pubs: Mapping[str, GroupElement],
    alice_pub: GroupElement,
    session: OpCounters | None = None,
) -> MultiProxySignature:
    """Clerk: verify every partial (its own included) and sum them.

    A failing partial aborts aggregation and names the signer.
    """
    warrant = delegation.warrant
    _check_commitment_cover(warrant, (ps.signer for ps in partials))
    curve = params.curve
    z_sum = partials[0].commitment
    for ps in partials[1:]:
        z_sum = point_add(curve.p, z_sum, ps.commitment)
    for ps in partials:
        try:
            proxy_pub = proxy_pubs[ps.signer]
        except KeyError:
            raise PolicyError(f"no public key supplied for {ps.signer!r}") from None
        if not verify_partial(params, ps, z_sum, delegation, proxy_pub, alice_pub, session):
            raise InvalidPartialError(ps.signer)
    x_sum = partials[0].response
    for ps in partials[1:]:
        x_sum = point_add(curve.p, x_sum, ps.response)
    return MultiProxySignature(warrant, z_sum, x_sum, delegation.commitment)


def verify_mps(
    params: SystemParams,
    sig: MultiProxySignature,
    verifier: UserKeyPair,
    alice_pub: GroupElement,
    proxy_pubs: Sequence[GroupElement],
    now: float | None = None,
    session: OpCounters | None = None,
) -> Verdict:
    """Designated verification; needs the verifier's secret key.

    Policy failures (wrong verifier, expired warrant) are reported apart
    from equation failures. 3 pairings, 1 exponentiation, 2 hashes.

    The verifier argument is trusted to be an authority-issued keypair:
    the equation pairs against its public point and its secret. A secret
    that does not match the public point fails the equation; a complete
    foreign keypair smuggled in under the designated name would satisfy
    it (the authority secret cancels for any issued pair), which is why
    the identity policy check above is not optional.
    """
    warrant = sig.warrant
    if len(proxy_pubs) != warrant.signer_count:
        raise PolicyError(
            f"need {warrant.signer_count} proxy public keys, got {len(proxy_pubs)}"
        )
    if verifier.identity != warrant.designated_verifier:
        return Verdict.REJECT_POLICY
    moment = time.time() if now is None else now
    if not warrant.not_before <= moment <= warrant.not_after:
        return Verdict.REJECT_POLICY

    curve = params.curve
    chal_d = delegation_challenge(params, warrant, sig.delegation_commitment, session)
    chal_s = signing_challenge(params, warrant, sig.commitment_sum, session)
    n = warrant.signer_count

    shifted = point_sub(
        curve.p,
        sig.response_sum,
        scalar_mul(curve, (n * chal_s) % curve.q, sig.delegation_commitment, session),
    )
    joint_sum: GroupElement | None = None
    for pub in proxy_pubs:
        term = point_add(curve.p, pub, alice_pub)
        joint_sum = term if joint_sum is None else point_add(curve.p, joint_sum, term)
    assert joint_sum is not None
    lhs = gt_mul(
        curve,
        pairing(curve, shifted, verifier.public, session),
        gt_pow(
            curve,
            pairing(curve, joint_sum, verifier.secret, session),
            (-(chal_d * chal_s)) % curve.q,
            session,
        ),
    )
    rhs = pairing(curve, sig.commitment_sum, verifier.public, session)
    return Verdict.ACCEPT if lhs == rhs else Verdict.REJECT_CRYPTO


# --- honest pipeline, trace, and adversarial helpers ---


@dataclass
class PipelineTranscript:
    """Everything an honest run produced, secrets included (test/bench aid)."""

    param_set: str
    params: SystemParams
    master: MasterSecret
    alice: UserKeyPair
    proxies: list[UserKeyPair]
    verifier: UserKeyPair
    warrant: Warrant
    delegation: Delegation
    proxy_keys: list[ProxyKey]
    nonces: dict[str, int]
    commitments: list[Commitment]
    partials: list[PartialSignature]
    signature: MultiProxySignature
    verdict: Verdict
    clerk: str
    phase_counts: dict[str, OpCounters] = field(default_factory=dict)


def _party_seed(seed: bytes, label: str) -> bytes:
    return hashlib.sha256(b"dvmps/party-seed" + seed + label.encode()).digest()


def run_pipeline(
    param_set: str,
    *,
    master_seed: bytes,
    original_signer: str,
    proxy_signers: Sequence[str],
    designated_verifier: str,
    message: bytes,
    seed: bytes,
    clerk: str | None = None,
    not_before: int = 0,
    not_after: int = 1 << 40,
    now: float | None = 1,
    keys: Mapping[str, UserKeyPair] | None = None,
    params: SystemParams | None = None,
    master: MasterSecret | None = None,
    session: OpCounters | None = None,
) -> PipelineTranscript:
    """Sequential honest run of all five phases, recording per-phase counts.

    Pass `params`/`master`/`keys` to reuse material across runs; whatever
    is missing is derived from the seeds.
    """
    track = session if session is not None else OpCounters()
    phases: dict[str, OpCounters] = {}

    def mark(name: str, start: OpCounters) -> OpCounters:
        snap = counters_snapshot(track)
        phases[name] = snap - start
        return snap

    at = counters_snapshot(track)
    if params is None or master is None:
        params, master = setup(param_set, master_seed, track)
    at = mark("setup", at)

    everyone = [original_signer, *proxy_signers, designated_verifier]
    key_map = dict(keys) if keys else {}
    for identity in everyone:
        if identity not in key_map:
            key_map[identity] = extract_key(params, master, identity, track)
    at = mark("key_generation", at)

    alice = key_map[original_signer]
    proxies = [key_map[s] for s in proxy_signers]
    verifier = key_map[designated_verifier]
    clerk = clerk or proxy_signers[0]
    if clerk not in proxy_signers:
        raise PolicyError(f"clerk {clerk!r} must be one of the proxy signers")

    warrant = Warrant(
        original_signer=original_signer,
        proxy_signers=tuple(proxy_signers),
        designated_verifier=designated_verifier,
        message_digest=message_digest(message),
        not_before=not_before,
        not_after=not_after,
    )

    delegation = delegate(
        params, alice, verifier.public, warrant, _party_seed(seed, original_signer), track
    )
    proxy_keys = [
        derive_proxy_key(params, delegation, pk, alice.public, track) for pk in proxies
    ]
    at = mark("proxy_key_generation", at)

    nonces: dict[str, int] = {}
    commitments: list[Commitment] = []
    for pkey in proxy_keys:
        c, t = commit(params, pkey, verifier.public, _party_seed(seed, pkey.holder), track)
        nonces[pkey.holder] = t
        commitments.append(c)
    partials = [
        partial_sign(params, pkey, nonces[pkey.holder], commitments, verifier.public, track)
        for pkey in proxy_keys
    ]
    pub_map = {kp.identity: kp.public for kp in proxies}
    signature = aggregate(params, partials, delegation, pub_map, alice.public, track)
    at = mark("generation", at)

    verdict = verify_mps(
        params,
        signature,
        verifier,
        alice.public,
        [kp.public for kp in proxies],
        now=now,
        session=track,
    )
    mark("verification", at)

    return PipelineTranscript(
        param_set=param_set,
        params=params,
        master=master,
        alice=alice,
        proxies=proxies,
        verifier=verifier,
        warrant=warrant,
        delegation=delegation,
        proxy_keys=proxy_keys,
        nonces=nonces,
        commitments=commitments,
        partials=partials,
        signature=signature,
        verdict=verdict,
        clerk=clerk,
        phase_counts=phases,
    )


def correctness_trace(
    params: SystemParams, transcript: PipelineTranscript
) -> list[TargetElement]:
    """The verification identity unfolded step by step over an honest run.

    Five target-group values, rewriting the left side of the verification
    equation down to the pairing of the commitment sum with the verifier's
    public point; all five must be equal.
    """
    curve = params.curve
    sig = transcript.signature
    warrant = sig.warrant
    verifier = transcript.verifier
    alice = transcript.alice
    proxies = transcript.proxies
    n = warrant.signer_count

    chal_d = delegation_challenge(params, warrant, sig.delegation_commitment)
    chal_s = signing_challenge(params, warrant, sig.commitment_sum)
    hh = (chal_d * chal_s) % curve.q
    n_chal = (n * chal_s) % curve.q
    shift = scalar_mul(curve, n_chal, sig.delegation_commitment)

    def psum(points: Iterable[GroupElement]) -> GroupElement:
        total: GroupElement | None = None
        for pt in points:
            total = pt if total is None else point_add(curve.p, total, pt)
        assert total is not None
        return total

    joint_pub = psum(point_add(curve.p, kp.public, alice.public) for kp in proxies)
    joint_sec = psum(point_add(curve.p, kp.secret, alice.secret) for kp in proxies)

    # 1: the verification equation's left side, exactly as checked
    v1 = gt_mul(
        curve,
        pairing(curve, point_sub(curve.p, sig.response_sum, shift), verifier.public),
        gt_pow(curve, pairing(curve, joint_pub, verifier.secret), -hh % curve.q),
    )
    # 2: response sum expanded to the sum of partials; the master secret
    # moved from the verifier key onto the signer keys
    x_sum = psum(ps.response for ps in transcript.partials)
    v2 = gt_mul(
        curve,
        pairing(curve, point_sub(curve.p, x_sum, shift), verifier.public),
        gt_pow(curve, pairing(curve, joint_sec, verifier.public), -hh % curve.q),
    )
    # 3: each partial opened as challenge * proxy_key + commitment
    opened = psum(
        point_add(
            curve.p,
            scalar_mul(curve, chal_s, pk.key),
            transcript.commitments[i].point,
        )
        for i, pk in enumerate(transcript.proxy_keys)
    )
    v3 = gt_mul(
        curve,
        pairing(curve, point_sub(curve.p, opened, shift), verifier.public),
        gt_pow(curve, pairing(curve, joint_sec, verifier.public), -hh % curve.q),
    )
    # 4: proxy keys opened down to the delegation commitment and the
    # signer secrets; the exponent folded into the pairing argument
    per_signer = psum(
        scalar_mul(
            curve,
            chal_s,
            point_add(
                curve.p,
                sig.delegation_commitment,
                point_add(
                    curve.p,
                    scalar_mul(curve, chal_d, alice.secret),
                    scalar_mul(curve, chal_d, kp.secret),
                ),
            ),
        )
        for kp in proxies
    )
    lead = point_sub(
        curve.p, point_add(curve.p, per_signer, sig.commitment_sum), shift
    )
    v4 = gt_mul(
        curve,
        pairing(curve, lead, verifier.public),
        pairing(curve, point_neg(curve.p, scalar_mul(curve, hh, joint_sec)), verifier.public),
    )
    # 5: everything cancelled
    v5 = pairing(curve, sig.commitment_sum, verifier.public)
    return [v1, v2, v3, v4, v5]


def forge_without_proxy_secrets(
    params: SystemParams,
    alice: UserKeyPair,
    warrant: Warrant,
    verifier_pub: GroupElement,
    rng_seed: bytes,
    session: OpCounters | None = None,
) -> MultiProxySignature:
    """Best-effort forgery by the original signer alone: runs the honest
    generation equations but stands the delegation proof in for every
    proxy key (the only key material the original signer holds). Exists
    for negative tests; designated verification must reject it.
    """
    curve = params.curve
    delegation = delegate(params, alice, verifier_pub, warrant, rng_seed, session)
    fake_partials: list[PartialSignature] = []
    for i, signer in enumerate(warrant.proxy_signers):
        t = scalar_from_seed(curve.q, rng_seed + i.to_bytes(4, "big"), _COMMIT_LABEL)
        z_i = scalar_mul(curve, t, verifier_pub, session)
        fake_partials.append(PartialSignature(signer, z_i, z_i))
    z_sum = fake_partials[0].commitment
    for ps in fake_partials[1:]:
        z_sum = point_add(curve.p, z_sum, ps.commitment)
    chal_s = signing_challenge(params, warrant, z_sum, session)
    x_sum: GroupElement | None = None
    for ps in fake_partials:
        x_i = point_add(
            curve.p, scalar_mul(curve, chal_s, delegation.proof, session), ps.commitment
        )
        x_sum = x_i if x_sum is None else point_add(curve.p, x_sum, x_i)
    assert x_sum is not None
    return MultiProxySignature(warrant, z_sum, x_sum, delegation.commitment)
