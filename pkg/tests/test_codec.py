"""Round-trip, canonicality, and keystore behavior of the byte formats."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from dvmps import codec
from dvmps.algebra import INFINITY, scalar_mul
from dvmps.model import (
    Commitment,
    Delegation,
    MultiProxySignature,
    PartialSignature,
    Warrant,
)
from dvmps.algebra.params import DEMO, TOY
from dvmps.scheme import message_digest

from conftest import FIXTURE_DIR

identities = st.text(
    alphabet=st.characters(min_codepoint=33, max_codepoint=0x2FF),
    min_size=1,
    max_size=24,
)


@st.composite
def warrants(draw):
    proxies = draw(st.lists(identities, min_size=1, max_size=8, unique=True))
    nb = draw(st.integers(0, 2**40))
    return Warrant(
        original_signer=draw(identities),
        proxy_signers=tuple(proxies),
        designated_verifier=draw(identities),
        message_digest=draw(st.binary(min_size=1, max_size=64)),
        not_before=nb,
        not_after=nb + 1 + draw(st.integers(0, 2**40)),
        policy=draw(st.binary(max_size=64)),
    )


@given(warrants())
def test_warrant_roundtrip(w):
    data = codec.encode_warrant(w)
    assert codec.decode_warrant(data) == w
    # canonicality: re-encoding is byte-identical
    assert codec.encode_warrant(codec.decode_warrant(data)) == data


def test_warrant_roundtrip_bulk():
    """Seeded fuzz over 10_000 random warrants."""
    rnd = random.Random(0xF00D)

    def rand_id():
        return "".join(chr(rnd.randrange(33, 500)) for _ in range(rnd.randrange(1, 12)))

    for _ in range(10_000):
        n = rnd.randrange(1, 6)
        proxies = []
        while len(proxies) < n:
            s = rand_id()
            if s not in proxies:
                proxies.append(s)
        nb = rnd.randrange(2**32)
        w = Warrant(
            original_signer=rand_id(),
            proxy_signers=tuple(proxies),
            designated_verifier=rand_id(),
            message_digest=rnd.randbytes(rnd.randrange(1, 48)),
            not_before=nb,
            not_after=nb + 1 + rnd.randrange(2**20),
            policy=rnd.randbytes(rnd.randrange(0, 32)),
        )
        data = codec.encode_warrant(w)
        assert codec.decode_warrant(data) == w


@given(warrants(), warrants())
def test_warrant_injective(w1, w2):
    if w1 != w2:
        assert codec.encode_warrant(w1) != codec.encode_warrant(w2)


def test_warrants_differing_only_in_window_encode_apart():
    w1 = Warrant("a", ("p",), "c", b"d", 0, 100)
    w2 = Warrant("a", ("p",), "c", b"d", 0, 101)
    assert codec.encode_warrant(w1) != codec.encode_warrant(w2)


def test_warrant_truncation_error():
    data = codec.encode_warrant(Warrant("a", ("p",), "c", b"d", 0, 100))
    for cut in (1, 5, len(data) // 2, len(data) - 1):
        with pytest.raises(codec.TruncationError):
            codec.decode_warrant(data[:cut])


def test_warrant_trailing_bytes_error():
    data = codec.encode_warrant(Warrant("a", ("p",), "c", b"d", 0, 100))
    with pytest.raises(codec.CodecError):
        codec.decode_warrant(data + b"\x00")


def test_warrant_decode_rejects_duplicates():
    w = Warrant("a", ("p", "q"), "c", b"d", 0, 100)
    data = codec.encode_warrant(w)
    # splice q's bytes into a copy of p's entry
    mangled = data.replace(b"\x00\x00\x00\x01q", b"\x00\x00\x00\x01p")
    with pytest.raises(codec.CodecError):
        codec.decode_warrant(mangled)


def _sample_points(params, count, seed):
    rnd = random.Random(seed)
    pts = [INFINITY, params.generator]
    for _ in range(count):
        pts.append(scalar_mul(params, rnd.randrange(1, params.q), params.generator))
    return pts


@pytest.mark.parametrize("params", [TOY, DEMO], ids=["toy", "demo"])
def test_point_roundtrip_both_sets(params):
    for pt in _sample_points(params, 25, 0xBEEF):
        data = codec.encode_point(params, pt)
        assert codec.decode_point(params, data) == pt
        assert codec.encode_point(params, codec.decode_point(params, data)) == data


def test_scalar_roundtrip():
    rnd = random.Random(3)
    for params in (TOY, DEMO):
        for _ in range(200):
            k = rnd.randrange(params.q)
            assert codec.decode_scalar(params, codec.encode_scalar(params, k)) == k
    with pytest.raises(codec.CodecError):
        codec.decode_scalar(TOY, bytes([TOY.q]))


def test_structured_roundtrips(toy_run):
    curve = toy_run.params.curve
    d = toy_run.delegation
    assert codec.decode_delegation(curve, codec.encode_delegation(curve, d)) == d
    for c in toy_run.commitments:
        assert codec.decode_commitment(curve, codec.encode_commitment(curve, c)) == c
    for ps in toy_run.partials:
        assert codec.decode_partial(curve, codec.encode_partial(curve, ps)) == ps
    sig = toy_run.signature
    blob = codec.encode_signature(curve, sig)
    assert codec.decode_signature(curve, blob) == sig
    assert codec.encode_signature(curve, codec.decode_signature(curve, blob)) == blob


def test_public_params_roundtrip(toy_setup):
    params, _ = toy_setup
    blob = codec.encode_public_params("toy", params)
    name, decoded = codec.decode_public_params(blob)
    assert name == "toy"
    assert decoded.master_pub == params.master_pub


def test_pinned_toy_point_fixture():
    # generator (31, 18): even y -> tag 0x02, single-byte x
    assert codec.encode_point(TOY, TOY.generator) == b"\x02\x1f"


def test_pinned_h2_input_fixture():
    """Hash preimage layout is frozen; changing it invalidates signatures."""
    from dvmps.algebra import scalar_hash_input
    from dvmps.model import SystemParams

    fx = codec.read_fixture(FIXTURE_DIR / "toy" / "h2_input.fix")
    w = codec.decode_warrant(fx["warrant"])
    point = codec.decode_point(TOY, fx["point"])
    tag = SystemParams(TOY, TOY.generator).h2_tag
    assert scalar_hash_input(TOY, codec.encode_warrant(w), point, tag) == fx["preimage"]


# --- keystore ---


def test_keystore_roundtrip(tmp_path):
    path = tmp_path / "alice.ks"
    codec.keystore_save(str(path), "toy", "signer", b"secret material", "hunter2")
    role, material = codec.keystore_load(str(path), "toy", "hunter2")
    assert role == "signer"
    assert material == b"secret material"


def test_keystore_wrong_passphrase(tmp_path):
    path = tmp_path / "alice.ks"
    codec.keystore_save(str(path), "toy", "signer", b"secret material", "hunter2")
    with pytest.raises(codec.KeystoreAuthError):
        codec.keystore_load(str(path), "toy", "wrong")


def test_keystore_param_set_mismatch(tmp_path):
    path = tmp_path / "alice.ks"
    codec.keystore_save(str(path), "toy", "signer", b"secret material", "hunter2")
    with pytest.raises(codec.ParamSetMismatchError):
        codec.keystore_load(str(path), "demo", "hunter2")


def test_keystore_bad_magic(tmp_path):
    path = tmp_path / "alice.ks"
    codec.keystore_save(str(path), "toy", "signer", b"secret material", "hunter2")
    blob = bytearray(path.read_bytes())
    blob[0] ^= 0xFF
    path.write_bytes(bytes(blob))
    with pytest.raises(codec.KeystoreError):
        codec.keystore_load(str(path), "toy", "hunter2")


def test_keystore_tamper_detected(tmp_path):
    path = tmp_path / "alice.ks"
    codec.keystore_save(str(path), "toy", "signer", b"secret material", "hunter2")
    blob = bytearray(path.read_bytes())
    blob[-1] ^= 0x01
    path.write_bytes(bytes(blob))
    with pytest.raises(codec.KeystoreAuthError):
        codec.keystore_load(str(path), "toy", "hunter2")


def test_user_keys_roundtrip(toy_keys):
    keys = toy_keys["alice"]
    blob = codec.encode_user_keys(TOY, keys)
    assert codec.decode_user_keys(TOY, blob) == keys


def test_fixture_file_roundtrip(tmp_path):
    path = tmp_path / "x.fix"
    entries = {"alpha": b"\x00\x01", "beta": b"", "gamma": bytes(range(32))}
    codec.write_fixture(str(path), entries)
    assert codec.read_fixture(str(path)) == entries
