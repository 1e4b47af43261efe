"""Domain types for the designated-verifier multi-proxy signature scheme.

Identities are UTF-8 strings. Scalars are plain ints reduced mod q.
Everything here is an immutable value; serialization lives in codec.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .algebra import CurveParams, GroupElement


class SchemeError(Exception):
    """Base for scheme-level failures."""


class PolicyError(SchemeError):
    """Input violates warrant policy or call structure (not a crypto failure)."""


class InvalidDelegationError(SchemeError):
    """Delegation failed its pairing-equation check."""


class InvalidPartialError(SchemeError):
    """A partial signature failed the clerk check; names the signer."""

    def __init__(self, signer: str, message: str | None = None):
        super().__init__(message or f"partial signature from {signer!r} failed verification")
        self.signer = signer


class Verdict(enum.Enum):
    """Verification outcome; policy and crypto rejections stay distinct."""

    ACCEPT = "accept"
    REJECT_CRYPTO = "reject-crypto"
    REJECT_POLICY = "reject-policy"

    @property
    def accepted(self) -> bool:
        return self is Verdict.ACCEPT


@dataclass(frozen=True)
class SystemParams:
    """Public system parameters: curve plus the authority's public point."""

    curve: CurveParams
    master_pub: GroupElement
    h1_tag: bytes = b"DVMPS1/H1"
    h2_tag: bytes = b"DVMPS1/H2"


@dataclass(frozen=True)
class MasterSecret:
    """Key-generation authority secret; master_pub = value * generator."""

    value: int


@dataclass(frozen=True)
class UserKeyPair:
    identity: str
    public: GroupElement  # hash of the identity onto the curve
    secret: GroupElement  # master secret times the public point


@dataclass(frozen=True)
class Warrant:
    """Delegation policy binding the message, signer group, and verifier.

    The delegated message enters signatures only through message_digest,
    so the digest is the message binding.
    """

    original_signer: str
    proxy_signers: tuple[str, ...]
    designated_verifier: str
    message_digest: bytes
    not_before: int
    not_after: int
    policy: bytes = b""

    def __post_init__(self) -> None:
        object.__setattr__(self, "proxy_signers", tuple(self.proxy_signers))
        if not self.original_signer:
            raise PolicyError("empty original signer identity")
        if not self.designated_verifier:
            raise PolicyError("empty designated verifier identity")
        if len(self.proxy_signers) < 1:
            raise PolicyError("warrant needs at least one proxy signer")
        if any(not s for s in self.proxy_signers):
            raise PolicyError("empty proxy signer identity")
        if len(set(self.proxy_signers)) != len(self.proxy_signers):
            raise PolicyError("duplicate proxy signer in warrant")
        if not self.message_digest:
            raise PolicyError("empty message digest")
        if not self.not_before < self.not_after:
            raise PolicyError("warrant validity window is empty")

    @property
    def signer_count(self) -> int:
        return len(self.proxy_signers)


@dataclass(frozen=True)
class Delegation:
    """Signed warrant from the original signer: (warrant, U, V) with
    commitment U hashed into the challenge and proof V opening it."""

    warrant: Warrant
    commitment: GroupElement
    proof: GroupElement


@dataclass(frozen=True)
class ProxyKey:
    holder: str
    key: GroupElement  # challenge * holder_secret + delegation proof
    delegation: Delegation


@dataclass(frozen=True)
class Commitment:
    """Round-1 broadcast value of one proxy signer."""

    signer: str
    point: GroupElement


@dataclass(frozen=True)
class PartialSignature:
    signer: str
    commitment: GroupElement  # the signer's round-1 point, repeated
    response: GroupElement


@dataclass(frozen=True)
class MultiProxySignature:
    """Aggregate signature: sums of commitments and responses plus the
    delegation commitment needed to rebuild the challenges."""

    warrant: Warrant
    commitment_sum: GroupElement
    response_sum: GroupElement
    delegation_commitment: GroupElement
