"""Identity-based strong designated verifier parallel multi-proxy
signatures over a symmetric pairing, with a multi-party signing harness.

Research code: pure-Python arithmetic, toy/demo parameter sizes, no
side-channel hardening. Do not use for anything that matters.
"""

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
    SchemeError,
    SystemParams,
    UserKeyPair,
    Verdict,
    Warrant,
)
from .scheme import (
    aggregate,
    commit,
    correctness_trace,
    delegate,
    derive_proxy_key,
    extract_key,
    forge_without_proxy_secrets,
    message_digest,
    partial_sign,
    run_pipeline,
    setup,
    verify_delegation,
    verify_mps,
    verify_partial,
)

__all__ = [
    "Commitment",
    "Delegation",
    "InvalidDelegationError",
    "InvalidPartialError",
    "MasterSecret",
    "MultiProxySignature",
    "PartialSignature",
    "PolicyError",
    "ProxyKey",
    "SchemeError",
    "SystemParams",
    "UserKeyPair",
    "Verdict",
    "Warrant",
    "aggregate",
    "commit",
    "correctness_trace",
    "delegate",
    "derive_proxy_key",
    "extract_key",
    "forge_without_proxy_secrets",
    "message_digest",
    "partial_sign",
    "run_pipeline",
    "setup",
    "verify_delegation",
    "verify_mps",
    "verify_partial",
]
