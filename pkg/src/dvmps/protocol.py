"""Multi-party runtime: role state machines over pluggable transports.

Five roles exchange framed messages: the key authority, the original
signer, n proxy signers (one of whom is the clerk), and the designated
verifier. The round structure is enforced by phase guards: nobody
computes the signing challenge before holding round-1 commitments from
every warrant signer.

Wire framing (identical in memory and on the loopback socket transport):

    4-byte big-endian length of the rest
    1 kind byte
    16-byte session id
    4-byte big-endian sender length + sender identity (UTF-8)
    payload (codec-encoded body for the kind)

State machines are sans-io: they consume one decoded message at a time
and return outgoing messages. They mutate their own state only; all
interaction goes through a Transport. Key issuance travels as a plain
message, which is insecure by construction — this harness is a
simulator, not a deployment.

Timeouts are logical: a session aborts when no delivery can make
progress, attributing the stall to the first silent party.
"""

from __future__ import annotations

import enum
import hashlib
import queue as queue_mod
import socket
import threading
from collections import deque
from dataclasses import dataclass, replace

from . import codec, scheme
from .algebra import point_add
from .model import (
    Commitment,
    Delegation,
    InvalidDelegationError,
    MultiProxySignature,
    PartialSignature,
    PolicyError,
    SystemParams,
    UserKeyPair,
    Verdict,
    Warrant,
)

PKG_ID = "pkg"


class MessageKind(enum.IntEnum):
    EXTRACT_REQUEST = 1
    KEY_ISSUE = 2
    DELEGATION_BROADCAST = 3
    COMMITMENT_BROADCAST = 4
    PARTIAL_SUBMIT = 5
    SIGNATURE_ANNOUNCE = 6
    ABORT = 7


class Phase(enum.Enum):
    INIT = "init"
    KEYED = "keyed"
    DELEGATED = "delegated"
    COMMITTED = "committed"
    PARTIALED = "partialed"
    DONE = "done"
    ABORTED = "aborted"


@dataclass(frozen=True)
class ProtocolMessage:
    kind: MessageKind
    session_id: bytes
    sender: str
    payload: bytes


@dataclass(frozen=True)
class Outgoing:
    to: str | None  # None = broadcast to everyone else
    message: ProtocolMessage


@dataclass(frozen=True)
class AbortReport:
    offender: str
    reason: str  # timeout | equivocation | invalid-partial | invalid-delegation
    #             | phase-violation | decode-error | rejected
    detail: str = ""


@dataclass
class SessionOutcome:
    done: bool
    signature: MultiProxySignature | None
    verifier_verdict: Verdict | None
    abort: AbortReport | None
    transcript: list[tuple[str, bytes]]  # (recipient, frame) in delivery order


class ProtocolError(Exception):
    pass


# --- framing ---


def encode_frame(msg: ProtocolMessage) -> bytes:
    if len(msg.session_id) != 16:
        raise ProtocolError("session id must be 16 bytes")
    sender = msg.sender.encode("utf-8")
    body = (
        bytes([msg.kind])
        + msg.session_id
        + len(sender).to_bytes(4, "big")
        + sender
        + msg.payload
    )
    return len(body).to_bytes(4, "big") + body


def decode_frame(frame: bytes) -> ProtocolMessage:
    if len(frame) < 4:
        raise ProtocolError("short frame")
    length = int.from_bytes(frame[:4], "big")
    body = frame[4:]
    if len(body) != length:
        raise ProtocolError("frame length mismatch")
    if len(body) < 1 + 16 + 4:
        raise ProtocolError("frame too short for header")
    try:
        kind = MessageKind(body[0])
    except ValueError as exc:
        raise ProtocolError(f"unknown kind byte {body[0]}") from exc
    session_id = body[1:17]
    sender_len = int.from_bytes(body[17:21], "big")
    if 21 + sender_len > len(body):
        raise ProtocolError("sender length overruns frame")
    try:
        sender = body[21 : 21 + sender_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ProtocolError("sender is not valid UTF-8") from exc
    payload = body[21 + sender_len :]
    return ProtocolMessage(kind, session_id, sender, payload)


def _encode_abort(report: AbortReport) -> bytes:
    out = b""
    for part in (report.reason, report.offender, report.detail):
        raw = part.encode("utf-8")
        out += len(raw).to_bytes(4, "big") + raw
    return out


def _decode_abort(payload: bytes) -> AbortReport:
    fields = []
    pos = 0
    for _ in range(3):
        n = int.from_bytes(payload[pos : pos + 4], "big")
        pos += 4
        fields.append(payload[pos : pos + n].decode("utf-8"))
        pos += n
    reason, offender, detail = fields
    return AbortReport(offender, reason, detail)


# --- session config ---


@dataclass(frozen=True)
class SessionConfig:
    param_set: str
    master_seed: bytes
    session_seed: bytes
    original_signer: str
    proxy_signers: tuple[str, ...]
    clerk: str
    designated_verifier: str
    message: bytes
    not_before: int = 0
    not_after: int = 1 << 40
    now: float = 1.0
    max_steps: int = 10_000

    def __post_init__(self) -> None:
        object.__setattr__(self, "proxy_signers", tuple(self.proxy_signers))
        names = [self.original_signer, *self.proxy_signers, self.designated_verifier]
        if PKG_ID in names:
            raise PolicyError(f"{PKG_ID!r} is a reserved identity")
        if len(set(names)) != len(names):
            raise PolicyError("duplicate identity across roles")
        if self.clerk not in self.proxy_signers:
            raise PolicyError("clerk must be one of the proxy signers")

    @property
    def session_id(self) -> bytes:
        return hashlib.sha256(b"dvmps/session-id" + self.session_seed).digest()[:16]

    @property
    def party_ids(self) -> tuple[str, ...]:
        return (
            PKG_ID,
            self.original_signer,
            *self.proxy_signers,
            self.designated_verifier,
        )

    def warrant(self) -> Warrant:
        return Warrant(
            original_signer=self.original_signer,
            proxy_signers=self.proxy_signers,
            designated_verifier=self.designated_verifier,
            message_digest=scheme.message_digest(self.message),
            not_before=self.not_before,
            not_after=self.not_after,
        )

    def party_seed(self, identity: str) -> bytes:
        return hashlib.sha256(
            b"dvmps/party-seed" + self.session_seed + identity.encode()
        ).digest()


# --- state machines ---


class Party:
    """Shared sans-io machinery: dedup ledger, equivocation detection,
    phase tracking, abort emission."""

    #: kinds this role reacts to; everything else is ignored traffic
    relevant: frozenset[MessageKind] = frozenset()

    def __init__(self, config: SessionConfig, identity: str, params: SystemParams):
        self.config = config
        self.identity = identity
        self.params = params
        self.phase = Phase.INIT
        self.abort_report: AbortReport | None = None
        self.received: dict[tuple[MessageKind, str], bytes] = {}

    # -- emission helpers --

    def _msg(self, kind: MessageKind, payload: bytes = b"") -> ProtocolMessage:
        return ProtocolMessage(kind, self.config.session_id, self.identity, payload)

    def _abort(self, offender: str, reason: str, detail: str = "") -> list[Outgoing]:
        self.abort_report = AbortReport(offender, reason, detail)
        self.phase = Phase.ABORTED
        payload = _encode_abort(self.abort_report)
        return [Outgoing(None, self._msg(MessageKind.ABORT, payload))]

    def start(self) -> list[Outgoing]:
        return []

    # -- the generic step --

    def step(self, msg: ProtocolMessage) -> list[Outgoing]:
        if self.phase in (Phase.DONE, Phase.ABORTED):
            return []
        if msg.session_id != self.config.session_id:
            return self._abort(msg.sender, "decode-error", "session id mismatch")
        if msg.kind is MessageKind.ABORT:
            try:
                self.abort_report = _decode_abort(msg.payload)
            except Exception:
                self.abort_report = AbortReport(msg.sender, "decode-error", "bad abort")
            self.phase = Phase.ABORTED
            return []
        if msg.kind not in self.relevant:
            return []
        key = (msg.kind, msg.sender)
        if key in self.received:
            if self.received[key] == msg.payload:
                return []  # duplicate delivery: first wins
            return self._abort(
                msg.sender, "equivocation", f"two different {msg.kind.name} payloads"
            )
        self.received[key] = msg.payload
        try:
            return self._handle(msg)
        except codec.CodecError as exc:
            return self._abort(msg.sender, "decode-error", str(exc))

    def _handle(self, msg: ProtocolMessage) -> list[Outgoing]:
        raise NotImplementedError


class AuthorityParty(Party):
    """Issues identity keys on request. Stateless beyond its secret."""

    relevant = frozenset({MessageKind.EXTRACT_REQUEST})

    def __init__(self, config, params, master):
        super().__init__(config, PKG_ID, params)
        self.master = master
        self.phase = Phase.KEYED

    def _handle(self, msg: ProtocolMessage) -> list[Outgoing]:
        keys = scheme.extract_key(self.params, self.master, msg.sender)
        payload = codec.encode_user_keys(self.params.curve, keys)
        return [Outgoing(msg.sender, self._msg(MessageKind.KEY_ISSUE, payload))]


class OriginalSignerParty(Party):
    relevant = frozenset({MessageKind.KEY_ISSUE, MessageKind.SIGNATURE_ANNOUNCE})

    def __init__(self, config, params, keys=None, delegation=None):
        super().__init__(config, config.original_signer, params)
        self.keys = keys
        self.delegation = delegation
        if keys is not None or delegation is not None:
            self.phase = Phase.KEYED

    def start(self) -> list[Outgoing]:
        if self.keys is None and self.delegation is None:
            return [Outgoing(PKG_ID, self._msg(MessageKind.EXTRACT_REQUEST))]
        return self._broadcast_delegation()

    def _broadcast_delegation(self) -> list[Outgoing]:
        if self.delegation is None:
            verifier_pub = scheme.identity_point(self.params, self.config.designated_verifier)
            self.delegation = scheme.delegate(
                self.params,
                self.keys,
                verifier_pub,
                self.config.warrant(),
                self.config.party_seed(self.identity),
            )
        payload = codec.encode_delegation(self.params.curve, self.delegation)
        self.phase = Phase.DELEGATED
        return [Outgoing(None, self._msg(MessageKind.DELEGATION_BROADCAST, payload))]

    def _handle(self, msg: ProtocolMessage) -> list[Outgoing]:
        if msg.kind is MessageKind.KEY_ISSUE:
            if self.phase is not Phase.INIT:
                return self._abort(msg.sender, "phase-violation", "keys while keyed")
            keys = codec.decode_user_keys(self.params.curve, msg.payload)
            if keys.identity != self.identity:
                return self._abort(msg.sender, "decode-error", "keys for someone else")
            self.keys = keys
            self.phase = Phase.KEYED
            return self._broadcast_delegation()
        if msg.kind is MessageKind.SIGNATURE_ANNOUNCE:
            self.phase = Phase.DONE
            return []
        return []


class ProxySignerParty(Party):
    relevant = frozenset(
        {
            MessageKind.KEY_ISSUE,
            MessageKind.DELEGATION_BROADCAST,
            MessageKind.COMMITMENT_BROADCAST,
            MessageKind.PARTIAL_SUBMIT,
            MessageKind.SIGNATURE_ANNOUNCE,
        }
    )

    def __init__(self, config, params, identity, keys=None):
        super().__init__(config, identity, params)
        self.is_clerk = identity == config.clerk
        self.keys = keys
        self.proxy_key = None
        self.nonce: int | None = None
        self.commitments: dict[str, Commitment] = {}
        self.partials: dict[str, PartialSignature] = {}
        self.signature: MultiProxySignature | None = None
        self.verifier_pub = None
        self.alice_pub = None
        if keys is not None:
            self.phase = Phase.KEYED

    def start(self) -> list[Outgoing]:
        if self.keys is None:
            return [Outgoing(PKG_ID, self._msg(MessageKind.EXTRACT_REQUEST))]
        return []

    def _handle(self, msg: ProtocolMessage) -> list[Outgoing]:
        kind = msg.kind
        if kind is MessageKind.KEY_ISSUE:
            if self.phase is not Phase.INIT:
                return self._abort(msg.sender, "phase-violation", "keys while keyed")
            keys = codec.decode_user_keys(self.params.curve, msg.payload)
            if keys.identity != self.identity:
                return self._abort(msg.sender, "decode-error", "keys for someone else")
            self.keys = keys
            self.phase = Phase.KEYED
            return []
        if kind is MessageKind.DELEGATION_BROADCAST:
            if self.phase is not Phase.KEYED:
                return self._abort(msg.sender, "phase-violation", f"delegation in {self.phase.value}")
            return self._on_delegation(msg)
        if kind is MessageKind.COMMITMENT_BROADCAST:
            if self.phase is not Phase.DELEGATED:
                return self._abort(msg.sender, "phase-violation", f"commitment in {self.phase.value}")
            return self._on_commitment(msg)
        if kind is MessageKind.PARTIAL_SUBMIT:
            if not self.is_clerk:
                return self._abort(msg.sender, "phase-violation", "partial sent to non-clerk")
            if self.phase not in (Phase.COMMITTED, Phase.DELEGATED):
                return self._abort(msg.sender, "phase-violation", f"partial in {self.phase.value}")
            return self._on_partial(msg)
        if kind is MessageKind.SIGNATURE_ANNOUNCE:
            self.phase = Phase.DONE
            return []
        return []

    def _on_delegation(self, msg: ProtocolMessage) -> list[Outgoing]:
        delegation = codec.decode_delegation(self.params.curve, msg.payload)
        if msg.sender != delegation.warrant.original_signer:
            return self._abort(msg.sender, "decode-error", "delegation not from its signer")
        self.alice_pub = scheme.identity_point(self.params, delegation.warrant.original_signer)
        self.verifier_pub = scheme.identity_point(
            self.params, delegation.warrant.designated_verifier
        )
        try:
            self.proxy_key = scheme.derive_proxy_key(
                self.params, delegation, self.keys, self.alice_pub
            )
        except InvalidDelegationError as exc:
            return self._abort(msg.sender, "invalid-delegation", str(exc))
        except PolicyError as exc:
            return self._abort(msg.sender, "phase-violation", str(exc))
        commitment, self.nonce = scheme.commit(
            self.params, self.proxy_key, self.verifier_pub, self.config.party_seed(self.identity)
        )
        self.commitments[self.identity] = commitment
        self.phase = Phase.DELEGATED
        payload = codec.encode_commitment(self.params.curve, commitment)
        outs = [Outgoing(None, self._msg(MessageKind.COMMITMENT_BROADCAST, payload))]
        outs.extend(self._maybe_committed())
        return outs

    def _on_commitment(self, msg: ProtocolMessage) -> list[Outgoing]:
        c = codec.decode_commitment(self.params.curve, msg.payload)
        if c.signer != msg.sender:
            return self._abort(msg.sender, "decode-error", "commitment signer != sender")
        if c.signer not in self.proxy_key.delegation.warrant.proxy_signers:
            return self._abort(msg.sender, "phase-violation", "commitment from non-signer")
        if c.signer in self.commitments and self.commitments[c.signer] != c:
            return self._abort(msg.sender, "equivocation", "conflicting commitment")
        self.commitments[c.signer] = c
        return self._maybe_committed()

    def _maybe_committed(self) -> list[Outgoing]:
        warrant = self.proxy_key.delegation.warrant
        if set(self.commitments) != set(warrant.proxy_signers):
            return []
        # round barrier passed: all warrant signers have committed
        ordered = [self.commitments[s] for s in warrant.proxy_signers]
        partial = scheme.partial_sign(
            self.params, self.proxy_key, self.nonce, ordered, self.verifier_pub
        )
        self.phase = Phase.COMMITTED
        payload = codec.encode_partial(self.params.curve, partial)
        if self.is_clerk:
            self.partials[self.identity] = partial
            return self._maybe_partialed()
        self.phase = Phase.PARTIALED
        return [Outgoing(self.config.clerk, self._msg(MessageKind.PARTIAL_SUBMIT, payload))]

    def _on_partial(self, msg: ProtocolMessage) -> list[Outgoing]:
        ps = codec.decode_partial(self.params.curve, msg.payload)
        if ps.signer != msg.sender:
            return self._abort(msg.sender, "decode-error", "partial signer != sender")
        warrant = self.proxy_key.delegation.warrant
        if ps.signer not in warrant.proxy_signers:
            return self._abort(msg.sender, "phase-violation", "partial from non-signer")
        if ps.signer in self.partials and self.partials[ps.signer] != ps:
            return self._abort(msg.sender, "equivocation", "conflicting partial")
        self.partials[ps.signer] = ps
        return self._maybe_partialed()

    def _maybe_partialed(self) -> list[Outgoing]:
        warrant = self.proxy_key.delegation.warrant
        if self.phase is not Phase.COMMITTED or set(self.partials) != set(warrant.proxy_signers):
            return []
        ordered = [self.partials[s] for s in warrant.proxy_signers]
        proxy_pubs = {
            s: scheme.identity_point(self.params, s) for s in warrant.proxy_signers
        }
        try:
            self.signature = scheme.aggregate(
                self.params, ordered, self.proxy_key.delegation, proxy_pubs, self.alice_pub
            )
        except scheme.InvalidPartialError as exc:
            return self._abort(exc.signer, "invalid-partial", str(exc))
        self.phase = Phase.DONE
        payload = codec.encode_signature(self.params.curve, self.signature)
        return [Outgoing(None, self._msg(MessageKind.SIGNATURE_ANNOUNCE, payload))]


class VerifierParty(Party):
    relevant = frozenset({MessageKind.KEY_ISSUE, MessageKind.SIGNATURE_ANNOUNCE})

    def __init__(self, config, params, keys=None):
        super().__init__(config, config.designated_verifier, params)
        self.keys = keys
        self.verdict: Verdict | None = None
        self.signature: MultiProxySignature | None = None
        if keys is not None:
            self.phase = Phase.KEYED

    def start(self) -> list[Outgoing]:
        if self.keys is None:
            return [Outgoing(PKG_ID, self._msg(MessageKind.EXTRACT_REQUEST))]
        return []

    def _handle(self, msg: ProtocolMessage) -> list[Outgoing]:
        if msg.kind is MessageKind.KEY_ISSUE:
            if self.phase is not Phase.INIT:
                return self._abort(msg.sender, "phase-violation", "keys while keyed")
            keys = codec.decode_user_keys(self.params.curve, msg.payload)
            if keys.identity != self.identity:
                return self._abort(msg.sender, "decode-error", "keys for someone else")
            self.keys = keys
            self.phase = Phase.KEYED
            return []
        if msg.kind is MessageKind.SIGNATURE_ANNOUNCE:
            if self.phase is not Phase.KEYED:
                return self._abort(msg.sender, "phase-violation", f"announce in {self.phase.value}")
            sig = codec.decode_signature(self.params.curve, msg.payload)
            warrant = sig.warrant
            alice_pub = scheme.identity_point(self.params, warrant.original_signer)
            proxy_pubs = [
                scheme.identity_point(self.params, s) for s in warrant.proxy_signers
            ]
            self.signature = sig
            self.verdict = scheme.verify_mps(
                self.params, sig, self.keys, alice_pub, proxy_pubs, now=self.config.now
            )
            self.phase = Phase.DONE
            return []
        return []


def step_party(party: Party, msg: ProtocolMessage) -> tuple[Party, list[Outgoing]]:
    """Single transition; the party instance is mutated and returned."""
    return party, party.step(msg)


# --- transports ---


@dataclass(frozen=True)
class FaultRule:
    """Applied when a frame of `kind` from `sender` is enqueued.

    action: drop | duplicate | delay | equivocate | corrupt. Delay pushes
    the frame behind the next `delay` deliveries; equivocate delivers the
    original plus a mutated copy (a different commitment/partial point)
    so the receiver sees the sender contradict itself; corrupt replaces
    the frame with the mutated copy (a byzantine sender).
    """

    action: str
    kind: MessageKind | None = None
    sender: str | None = None
    delay: int = 2

    def matches(self, msg: ProtocolMessage) -> bool:
        return (self.kind is None or msg.kind == self.kind) and (
            self.sender is None or msg.sender == self.sender
        )


class InMemTransport:
    """Deterministic FIFO hub. Faults are applied at enqueue time."""

    def __init__(self, party_ids, fault_plan=(), curve=None):
        self.party_ids = list(party_ids)
        self.fault_plan = list(fault_plan)
        self.curve = curve
        self.queue: deque[tuple[str, bytes]] = deque()
        self._delayed: list[list] = []  # [countdown, recipient, frame]

    def send(self, sender: str, to: str, msg: ProtocolMessage) -> None:
        self._enqueue(to, msg)

    def broadcast(self, sender: str, msg: ProtocolMessage) -> None:
        for pid in self.party_ids:
            if pid != sender:
                self._enqueue(pid, msg)

    def _mutated(self, msg: ProtocolMessage) -> ProtocolMessage:
        if self.curve is None:
            raise ProtocolError("equivocate fault needs curve params")
        if msg.kind is MessageKind.COMMITMENT_BROADCAST:
            c = codec.decode_commitment(self.curve, msg.payload)
            other = Commitment(c.signer, point_add(self.curve.p, c.point, self.curve.generator))
            return replace(msg, payload=codec.encode_commitment(self.curve, other))
        if msg.kind is MessageKind.PARTIAL_SUBMIT:
            ps = codec.decode_partial(self.curve, msg.payload)
            other = PartialSignature(
                ps.signer,
                ps.commitment,
                point_add(self.curve.p, ps.response, self.curve.generator),
            )
            return replace(msg, payload=codec.encode_partial(self.curve, other))
        return msg

    def _enqueue(self, to: str, msg: ProtocolMessage) -> None:
        actions = [rule for rule in self.fault_plan if rule.matches(msg)]
        if any(rule.action == "drop" for rule in actions):
            return
        if any(rule.action == "corrupt" for rule in actions):
            msg = self._mutated(msg)
        frame = encode_frame(msg)
        delay = next((rule.delay for rule in actions if rule.action == "delay"), None)
        if delay is not None:
            self._delayed.append([delay, to, frame])
            return
        self.queue.append((to, frame))
        if any(rule.action == "duplicate" for rule in actions):
            self.queue.append((to, frame))
        if any(rule.action == "equivocate" for rule in actions):
            self.queue.append((to, encode_frame(self._mutated(msg))))

    def receive(self, timeout: float | None = None) -> tuple[str, bytes] | None:
        for item in self._delayed:
            item[0] -= 1
        ready = [item for item in self._delayed if item[0] <= 0]
        for item in ready:
            self._delayed.remove(item)
            self.queue.append((item[1], item[2]))
        if not self.queue:
            if self._delayed:
                # nothing deliverable yet but delayed frames remain
                item = min(self._delayed, key=lambda it: it[0])
                self._delayed.remove(item)
                return item[1], item[2]
            return None
        return self.queue.popleft()

    def close(self) -> None:
        pass


def inmem_transport(topology, fault_plan=(), curve=None) -> InMemTransport:
    """Deterministic in-memory transport for the given party ids."""
    return InMemTransport(topology, fault_plan, curve)


class SocketTransport:
    """Full mesh over loopback TCP; frames travel with the standard
    framing and nothing else. Reader threads funnel into one queue, so
    arrival interleaving is not deterministic — the protocol result is."""

    def __init__(self, party_ids):
        self.party_ids = list(party_ids)
        self.queue: queue_mod.Queue = queue_mod.Queue()
        self._listeners: dict[str, socket.socket] = {}
        self._ports: dict[str, int] = {}
        self._out: dict[tuple[str, str], socket.socket] = {}
        self._threads: list[threading.Thread] = []
        self._closing = False
        for pid in self.party_ids:
            srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            srv.bind(("127.0.0.1", 0))
            srv.listen(len(self.party_ids))
            self._listeners[pid] = srv
            self._ports[pid] = srv.getsockname()[1]
            th = threading.Thread(target=self._accept_loop, args=(pid, srv), daemon=True)
            th.start()
            self._threads.append(th)

    def _accept_loop(self, owner: str, srv: socket.socket) -> None:
        while not self._closing:
            try:
                conn, _ = srv.accept()
            except OSError:
                return
            th = threading.Thread(
                target=self._reader_loop, args=(owner, conn), daemon=True
            )
            th.start()
            self._threads.append(th)

    def _reader_loop(self, owner: str, conn: socket.socket) -> None:
        try:
            while True:
                header = self._read_exact(conn, 4)
                if header is None:
                    return
                length = int.from_bytes(header, "big")
                body = self._read_exact(conn, length)
                if body is None:
                    return
                self.queue.put((owner, header + body))
        except OSError:
            return

    @staticmethod
    def _read_exact(conn: socket.socket, n: int) -> bytes | None:
        buf = b""
        while len(buf) < n:
            chunk = conn.recv(n - len(buf))
            if not chunk:
                return None
            buf += chunk
        return buf

    def _conn(self, sender: str, to: str) -> socket.socket:
        key = (sender, to)
        if key not in self._out:
            sock = socket.create_connection(("127.0.0.1", self._ports[to]))
            self._out[key] = sock
        return self._out[key]

    def send(self, sender: str, to: str, msg: ProtocolMessage) -> None:
        self._conn(sender, to).sendall(encode_frame(msg))

    def broadcast(self, sender: str, msg: ProtocolMessage) -> None:
        for pid in self.party_ids:
            if pid != sender:
                self.send(sender, pid, msg)

    def receive(self, timeout: float | None = None) -> tuple[str, bytes] | None:
        try:
            return self.queue.get(timeout=timeout if timeout is not None else 2.0)
        except queue_mod.Empty:
            return None

    def close(self) -> None:
        self._closing = True
        for sock in self._out.values():
            sock.close()
        for srv in self._listeners.values():
            srv.close()


# --- session driver ---


def build_parties(
    config: SessionConfig,
    params: SystemParams | None = None,
    master=None,
    keys: dict[str, UserKeyPair] | None = None,
    delegation: Delegation | None = None,
) -> dict[str, Party]:
    """Full-lifecycle parties (with authority) when keys are absent;
    pre-keyed parties (no authority role) when keys are supplied.

    In pre-keyed mode the original signer may be a keyless stub replaying
    a stored delegation, and the verifier role is present only when its
    keys are supplied (a signing-only session ends at the clerk).
    """
    if keys is None:
        if params is None or master is None:
            params, master = scheme.setup(config.param_set, config.master_seed)
        parties: dict[str, Party] = {PKG_ID: AuthorityParty(config, params, master)}
        parties[config.original_signer] = OriginalSignerParty(config, params)
        for pid in config.proxy_signers:
            parties[pid] = ProxySignerParty(config, params, pid)
        parties[config.designated_verifier] = VerifierParty(config, params)
        return parties
    if params is None:
        raise ProtocolError("pre-keyed sessions need explicit system params")
    alice_keys = keys.get(config.original_signer)
    if alice_keys is None and delegation is None:
        raise ProtocolError("need the original signer's keys or a stored delegation")
    parties = {
        config.original_signer: OriginalSignerParty(
            config, params, keys=alice_keys, delegation=delegation
        )
    }
    for pid in config.proxy_signers:
        parties[pid] = ProxySignerParty(config, params, pid, keys=keys[pid])
    if config.designated_verifier in keys:
        parties[config.designated_verifier] = VerifierParty(
            config, params, keys=keys[config.designated_verifier]
        )
    return parties


def _attribute_stall(config: SessionConfig, parties: dict[str, Party]) -> AbortReport:
    """Name the first party whose expected message never arrived."""
    signers = [parties[s] for s in config.proxy_signers]
    waiting_for_keys = [
        p.identity
        for p in parties.values()
        if p.phase is Phase.INIT and not isinstance(p, AuthorityParty)
    ]
    if waiting_for_keys:
        return AbortReport(PKG_ID, "timeout", f"keys never issued to {waiting_for_keys[0]}")
    if any(p.phase is Phase.KEYED for p in signers):
        return AbortReport(config.original_signer, "timeout", "delegation never arrived")
    for s in signers:
        if s.phase is Phase.DELEGATED:
            missing = [x for x in config.proxy_signers if x not in s.commitments]
            if missing:
                return AbortReport(missing[0], "timeout", "commitment never arrived")
    clerk = parties[config.clerk]
    if isinstance(clerk, ProxySignerParty) and clerk.phase is Phase.COMMITTED:
        missing = [x for x in config.proxy_signers if x not in clerk.partials]
        if missing:
            return AbortReport(missing[0], "timeout", "partial never arrived")
    verifier = parties.get(config.designated_verifier)
    if verifier is not None and verifier.phase is not Phase.DONE:
        return AbortReport(config.clerk, "timeout", "signature never announced")
    return AbortReport(config.clerk, "timeout", "stalled in an unexpected state")


def run_session(
    config: SessionConfig,
    transport=None,
    *,
    params: SystemParams | None = None,
    master=None,
    keys: dict[str, UserKeyPair] | None = None,
    delegation: Delegation | None = None,
) -> SessionOutcome:
    """Drive all parties to completion over the transport.

    Deterministic given config and a deterministic transport: the
    delivered-frame transcript is byte-identical across runs.
    """
    parties = build_parties(config, params, master, keys, delegation)
    own_transport = transport is None
    if transport is None:
        transport = inmem_transport(list(parties))

    transcript: list[tuple[str, bytes]] = []
    abort: AbortReport | None = None

    def flush(sender: str, outs: list[Outgoing]) -> None:
        for out in outs:
            if out.to is None:
                transport.broadcast(sender, out.message)
            else:
                transport.send(sender, out.to, out.message)

    try:
        for pid, party in parties.items():
            flush(pid, party.start())

        steps = 0
        while steps < config.max_steps:
            item = transport.receive()
            if item is None:
                break
            to, frame = item
            if to not in parties:
                continue
            steps += 1
            transcript.append((to, frame))
            party = parties[to]
            try:
                msg = decode_frame(frame)
            except ProtocolError as exc:
                abort = AbortReport(to, "decode-error", str(exc))
                break
            outs = party.step(msg)
            flush(to, outs)
            if party.abort_report is not None:
                abort = party.abort_report
                break

        verifier = parties.get(config.designated_verifier)
        clerk = parties[config.clerk]
        terminal = verifier if verifier is not None else clerk
        if abort is None and terminal.phase is not Phase.DONE:
            abort = _attribute_stall(config, parties)
        if abort is not None:
            return SessionOutcome(False, None, None, abort, transcript)
        signature = clerk.signature if isinstance(clerk, ProxySignerParty) else None
        verdict = None
        if verifier is not None:
            verdict = verifier.verdict
            if signature is None:
                signature = verifier.signature
        return SessionOutcome(True, signature, verdict, None, transcript)
    finally:
        if own_transport:
            transport.close()


def replay_transcript(
    config: SessionConfig,
    transcript: list[tuple[str, bytes]],
    *,
    params: SystemParams | None = None,
    master=None,
    keys: dict[str, UserKeyPair] | None = None,
    delegation: Delegation | None = None,
) -> MultiProxySignature | None:
    """Feed a recorded transcript into fresh machines; outputs are
    discarded. Returns the clerk's reproduced signature."""
    parties = build_parties(config, params, master, keys, delegation)
    for pid, party in parties.items():
        party.start()
    for to, frame in transcript:
        if to in parties:
            parties[to].step(decode_frame(frame))
    clerk = parties[config.clerk]
    return clerk.signature if isinstance(clerk, ProxySignerParty) else None
