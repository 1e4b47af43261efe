"""Canonical byte encodings, keystore files, and fixture files.

Conventions, fixed for all time because hash inputs depend on them:
  * SHA-256 is the digest primitive package-wide.
  * integers are big-endian fixed width; variable bytes carry a 4-byte
    big-endian length prefix; identity lists carry a 2-byte count.
  * points use the compressed form from the algebra layer (tag byte +
    x-coordinate; infinity is the single byte 0x00).

decode(encode(x)) == x for every valid value, encodings are injective per
type, and a decoder never reads past a declared length.
"""

from __future__ import annotations

import os

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
import hashlib

from .algebra import (
    CurveError,
    CurveParams,
    GroupElement,
    get_params,
    point_from_bytes,
    point_to_bytes,
)
from .model import (
    Commitment,
    Delegation,
    MultiProxySignature,
    PartialSignature,
    PolicyError,
    SystemParams,
    UserKeyPair,
    Warrant,
)

KEYSTORE_MAGIC = b"DVMPS1"
KDF_NAME = b"scrypt-16384-8-1+aes256gcm"


class CodecError(Exception):
    """Malformed or non-canonical bytes."""


class TruncationError(CodecError):
    """Buffer ended before the declared length."""


class KeystoreError(CodecError):
    pass


class KeystoreAuthError(KeystoreError):
    """Wrong passphrase or tampered file."""


class ParamSetMismatchError(KeystoreError):
    """File was written under a different parameter set."""


def _lp(data: bytes) -> bytes:
    return len(data).to_bytes(4, "big") + data


class _Reader:
    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise TruncationError(f"need {n} bytes, have {len(self._data) - self._pos}")
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out

    def u16(self) -> int:
        return int.from_bytes(self.take(2), "big")

    def lp_bytes(self) -> bytes:
        return self.take(int.from_bytes(self.take(4), "big"))

    def done(self) -> None:
        if self._pos != len(self._data):
            raise CodecError(f"{len(self._data) - self._pos} trailing bytes")


# --- points and scalars ---


def encode_point(curve: CurveParams, pt: GroupElement) -> bytes:
    return point_to_bytes(curve, pt)


def decode_point(curve: CurveParams, data: bytes) -> GroupElement:
    try:
        return point_from_bytes(curve, data)
    except CurveError as exc:
        raise CodecError(str(exc)) from exc


def _read_point(curve: CurveParams, r: _Reader) -> GroupElement:
    tag = r.take(1)
    if tag == b"\x00":
        return decode_point(curve, tag)
    return decode_point(curve, tag + r.take(curve.field_width))


def encode_scalar(curve: CurveParams, k: int) -> bytes:
    return (k % curve.q).to_bytes(curve.scalar_width, "big")


def decode_scalar(curve: CurveParams, data: bytes) -> int:
    if len(data) != curve.scalar_width:
        raise CodecError("wrong scalar width")
    k = int.from_bytes(data, "big")
    if k >= curve.q:
        raise CodecError("scalar out of range")
    return k


# --- warrant ---


def _encode_identity(name: str) -> bytes:
    return _lp(name.encode("utf-8"))


def _read_identity(r: _Reader) -> str:
    raw = r.lp_bytes()
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CodecError("identity is not valid UTF-8") from exc


def _encode_u64(v: int) -> bytes:
    if not 0 <= v < 1 << 64:
        raise CodecError(f"timestamp out of u64 range: {v}")
    return v.to_bytes(8, "big")


def encode_warrant(w: Warrant) -> bytes:
    parts = [
        _encode_identity(w.original_signer),
        len(w.proxy_signers).to_bytes(2, "big"),
    ]
    parts.extend(_encode_identity(s) for s in w.proxy_signers)
    parts.append(_encode_identity(w.designated_verifier))
    parts.append(_lp(w.message_digest))
    parts.append(_encode_u64(w.not_before))
    parts.append(_encode_u64(w.not_after))
    parts.append(_lp(w.policy))
    return b"".join(parts)


def _read_warrant(r: _Reader) -> Warrant:
    original = _read_identity(r)
    count = r.u16()
    proxies = tuple(_read_identity(r) for _ in range(count))
    verifier = _read_identity(r)
    digest = r.lp_bytes()
    not_before = int.from_bytes(r.take(8), "big")
    not_after = int.from_bytes(r.take(8), "big")
    policy = r.lp_bytes()
    try:
        return Warrant(original, proxies, verifier, digest, not_before, not_after, policy)
    except PolicyError as exc:
        raise CodecError(f"decoded warrant is invalid: {exc}") from exc


def decode_warrant(data: bytes) -> Warrant:
    r = _Reader(data)
    w = _read_warrant(r)
    r.done()
    return w


# --- protocol values ---


def encode_delegation(curve: CurveParams, d: Delegation) -> bytes:
    return (
        encode_warrant(d.warrant)
        + encode_point(curve, d.commitment)
        + encode_point(curve, d.proof)
    )


def decode_delegation(curve: CurveParams, data: bytes) -> Delegation:
    r = _Reader(data)
    w = _read_warrant(r)
    commitment = _read_point(curve, r)
    proof = _read_point(curve, r)
    r.done()
    return Delegation(w, commitment, proof)


def encode_commitment(curve: CurveParams, c: Commitment) -> bytes:
    return _encode_identity(c.signer) + encode_point(curve, c.point)


def decode_commitment(curve: CurveParams, data: bytes) -> Commitment:
    r = _Reader(data)
    signer = _read_identity(r)
    point = _read_point(curve, r)
    r.done()
    return Commitment(signer, point)


def encode_partial(curve: CurveParams, ps: PartialSignature) -> bytes:
    return (
        _encode_identity(ps.signer)
        + encode_point(curve, ps.commitment)
        + encode_point(curve, ps.response)
    )


def decode_partial(curve: CurveParams, data: bytes) -> PartialSignature:
    r = _Reader(data)
    signer = _read_identity(r)
    commitment = _read_point(curve, r)
    response = _read_point(curve, r)
    r.done()
    return PartialSignature(signer, commitment, response)


def encode_signature(curve: CurveParams, sig: MultiProxySignature) -> bytes:
    return (
        encode_warrant(sig.warrant)
        + encode_point(curve, sig.commitment_sum)
        + encode_point(curve, sig.response_sum)
        + encode_point(curve, sig.delegation_commitment)
    )


def decode_signature(curve: CurveParams, data: bytes) -> MultiProxySignature:
    r = _Reader(data)
    w = _read_warrant(r)
    commitment_sum = _read_point(curve, r)
    response_sum = _read_point(curve, r)
    delegation_commitment = _read_point(curve, r)
    r.done()
    return MultiProxySignature(w, commitment_sum, response_sum, delegation_commitment)


# --- public parameter file ---


def encode_public_params(param_set: str, params: SystemParams) -> bytes:
    return (
        KEYSTORE_MAGIC
        + _lp(param_set.encode())
        + encode_point(params.curve, params.master_pub)
    )


def decode_public_params(data: bytes) -> tuple[str, SystemParams]:
    r = _Reader(data)
    if r.take(len(KEYSTORE_MAGIC)) != KEYSTORE_MAGIC:
        raise KeystoreError("bad magic")
    name = r.lp_bytes().decode()
    curve = get_params(name)
    master_pub = _read_point(curve, r)
    r.done()
    return name, SystemParams(curve, master_pub)


# --- keystore (secret material at rest) ---


def _derive_key(passphrase: str, salt: bytes) -> bytes:
    return hashlib.scrypt(
        passphrase.encode("utf-8"), salt=salt, n=16384, r=8, p=1, dklen=32
    )


def keystore_save(
    path: str,
    param_set: str,
    role: str,
    material: bytes,
    passphrase: str,
) -> None:
    salt = os.urandom(16)
    nonce = os.urandom(12)
    header = KEYSTORE_MAGIC + _lp(param_set.encode()) + _lp(role.encode()) + _lp(KDF_NAME)
    sealed = AESGCM(_derive_key(passphrase, salt)).encrypt(nonce, material, header)
    with open(path, "wb") as fh:
        fh.write(header + _lp(salt) + _lp(nonce) + _lp(sealed))


def keystore_load(
    path: str,
    expected_param_set: str,
    passphrase: str,
) -> tuple[str, bytes]:
    """Returns (role, material). Authentication failure never yields bytes."""
    with open(path, "rb") as fh:
        blob = fh.read()
    r = _Reader(blob)
    if r.take(len(KEYSTORE_MAGIC)) != KEYSTORE_MAGIC:
        raise KeystoreError(f"{path}: bad magic")
    param_set = r.lp_bytes().decode()
    role = r.lp_bytes().decode()
    kdf = r.lp_bytes()
    if kdf != KDF_NAME:
        raise KeystoreError(f"{path}: unsupported kdf {kdf!r}")
    if param_set != expected_param_set:
        raise ParamSetMismatchError(
            f"{path}: keystore is for parameter set {param_set!r}, expected {expected_param_set!r}"
        )
    salt = r.lp_bytes()
    nonce = r.lp_bytes()
    sealed = r.lp_bytes()
    r.done()
    header = KEYSTORE_MAGIC + _lp(param_set.encode()) + _lp(role.encode()) + _lp(KDF_NAME)
    try:
        material = AESGCM(_derive_key(passphrase, salt)).decrypt(nonce, sealed, header)
    except InvalidTag as exc:
        raise KeystoreAuthError(f"{path}: wrong passphrase or corrupted file") from exc
    return role, material


def encode_user_keys(curve: CurveParams, keys: UserKeyPair) -> bytes:
    return (
        _encode_identity(keys.identity)
        + encode_point(curve, keys.public)
        + encode_point(curve, keys.secret)
    )


def decode_user_keys(curve: CurveParams, data: bytes) -> UserKeyPair:
    r = _Reader(data)
    identity = _read_identity(r)
    public = _read_point(curve, r)
    secret = _read_point(curve, r)
    r.done()
    return UserKeyPair(identity, public, secret)


# --- golden fixture files: one `name=hex` per line ---


def write_fixture(path: str, entries: dict[str, bytes]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for name, value in entries.items():
            fh.write(f"{name}={value.hex()}\n")


def read_fixture(path: str) -> dict[str, bytes]:
    entries: dict[str, bytes] = {}
    with open(path, encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            name, _, value = line.partition("=")
            entries[name] = bytes.fromhex(value)
    return entries
