"""Operation counters: H (hashes), M (scalar mults), E (target-group
exponentiations), P (pairings), I (inversions surfaced to callers).

A counting session is just a mutable OpCounters instance threaded through
the operations that count. Internal arithmetic (point additions, field
mults inside Miller's loop, cofactor clearing inside hash-to-curve) is
deliberately uncounted. Sessions are not thread-safe; share nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass
class OpCounters:
    hashes: int = 0
    scalar_mults: int = 0
    exponentiations: int = 0
    pairings: int = 0
    inversions: int = 0

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        """(H, M, E, P, I) in table column order."""
        return (
            self.hashes,
            self.scalar_mults,
            self.exponentiations,
            self.pairings,
            self.inversions,
        )

    def __sub__(self, other: "OpCounters") -> "OpCounters":
        return OpCounters(
            self.hashes - other.hashes,
            self.scalar_mults - other.scalar_mults,
            self.exponentiations - other.exponentiations,
            self.pairings - other.pairings,
            self.inversions - other.inversions,
        )


def counters_snapshot(session: OpCounters) -> OpCounters:
    """Pure read; a detached copy of the current counts."""
    return replace(session)


def counters_reset(session: OpCounters) -> None:
    session.hashes = 0
    session.scalar_mults = 0
    session.exponentiations = 0
    session.pairings = 0
    session.inversions = 0
