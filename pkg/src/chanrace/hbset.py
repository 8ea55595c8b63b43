"""Happens-before sets and the three set-based race detectors.

A happens-before set is a frozenset of :class:`Access` events.  Three
memory-record shapes exist, one per detector:

* ``aw``  -- after-write only.  The record keeps every write label; reads
  leave no trace, so write-after-read conflicts go unnoticed.
* ``war`` -- full detector.  The record keeps every read and write label.
* ``gc``  -- keeps only the most recent write plus the reads issued since
  then, and evicts subsumed entries from the accessing thread's set.

All functions here are pure.  A conflicting access raises :class:`Race`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

__all__ = [
    "READ",
    "WRITE",
    "RAW",
    "WAW",
    "WAR",
    "Access",
    "HbSet",
    "EMPTY",
    "Race",
    "GcRecord",
    "project_var",
    "reads",
    "writes",
    "read_aw",
    "write_aw",
    "read_war",
    "write_war",
    "read_gc",
    "write_gc",
    "offline_gc",
    "cap_reads",
]

READ = "read"
WRITE = "write"

RAW = "RaW"
WAW = "WaW"
WAR = "WaR"


class Access(NamedTuple):
    label: str
    kind: str
    var: str

    def __str__(self) -> str:
        return f"{'r' if self.kind == READ else 'w'}({self.label},{self.var})"


HbSet = frozenset  # frozenset[Access]
EMPTY: frozenset[Access] = frozenset()


class Race(Exception):
    """A conflicting, unsynchronized access was attempted."""

    def __init__(self, kind: str, var: str, conflicting: Iterable[Access]) -> None:
        self.kind = kind
        self.var = var
        self.conflicting = frozenset(conflicting)
        super().__init__(f"{kind} on {var}: {sorted(map(str, self.conflicting))}")


# ---------------------------------------------------------------------------
# Projections
# ---------------------------------------------------------------------------


def project_var(hb: frozenset[Access], var: str) -> frozenset[Access]:
    return frozenset(a for a in hb if a.var == var)


def reads(hb: frozenset[Access]) -> frozenset[Access]:
    return frozenset(a for a in hb if a.kind == READ)


def writes(hb: frozenset[Access]) -> frozenset[Access]:
    return frozenset(a for a in hb if a.kind == WRITE)


def _without_var(hb: frozenset[Access], var: str) -> frozenset[Access]:
    return frozenset(a for a in hb if a.var != var)


def cap_reads(recorded: frozenset[Access], limit: int | None, keep: Access) -> frozenset[Access]:
    """Drop read entries beyond ``limit``, never dropping ``keep``.

    Evicted entries are chosen by label order, so verdicts stay
    deterministic.  Any eviction can hide a later write-after-read race.
    """
    if limit is None:
        return recorded
    rs = reads(recorded)
    if len(rs) <= limit:
        return recorded
    others = sorted((a for a in rs if a != keep), key=lambda a: a.label)
    evicted = frozenset(others[: len(rs) - limit])
    return recorded - evicted


# ---------------------------------------------------------------------------
# After-write detector: record = frozenset of write accesses on the variable
# ---------------------------------------------------------------------------


def read_aw(hb: frozenset[Access], record: frozenset[Access], var: str) -> None:
    missing = record - hb
    if missing:
        raise Race(RAW, var, missing)


def write_aw(
    hb: frozenset[Access], record: frozenset[Access], var: str, label: str
) -> tuple[frozenset[Access], frozenset[Access]]:
    missing = record - hb
    if missing:
        raise Race(WAW, var, missing)
    event = Access(label, WRITE, var)
    return hb | {event}, record | {event}


# ---------------------------------------------------------------------------
# Full detector: record = frozenset of read and write accesses
# ---------------------------------------------------------------------------


def read_war(
    hb: frozenset[Access],
    record: frozenset[Access],
    var: str,
    label: str,
    max_reads: int | None = None,
) -> tuple[frozenset[Access], frozenset[Access]]:
    missing = writes(record) - hb
    if missing:
        raise Race(RAW, var, missing)
    event = Access(label, READ, var)
    return hb | {event}, cap_reads(record | {event}, max_reads, event)


def write_war(
    hb: frozenset[Access], record: frozenset[Access], var: str, label: str
) -> tuple[frozenset[Access], frozenset[Access]]:
    # Both conflicts may hold at once; the unseen read is the more recent one.
    missing_reads = reads(record) - hb
    if missing_reads:
        raise Race(WAR, var, missing_reads)
    missing_writes = writes(record) - hb
    if missing_writes:
        raise Race(WAW, var, missing_writes)
    event = Access(label, WRITE, var)
    return hb | {event}, record | {event}


# ---------------------------------------------------------------------------
# Garbage-collecting detector
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GcRecord:
    last_write: Access
    reads_since: frozenset[Access] = EMPTY

    def size(self) -> int:
        return 1 + len(self.reads_since)


def read_gc(
    hb: frozenset[Access],
    record: GcRecord,
    var: str,
    label: str,
    max_reads: int | None = None,
) -> tuple[frozenset[Access], GcRecord]:
    if record.last_write not in hb:
        raise Race(RAW, var, {record.last_write})
    event = Access(label, READ, var)
    seen = project_var(hb, var)
    reads_since = frozenset({event}) | (record.reads_since - seen)
    new_hb = frozenset({event}) | _without_var(hb, var) | {record.last_write}
    return new_hb, GcRecord(record.last_write, cap_reads(reads_since, max_reads, event))


def write_gc(
    hb: frozenset[Access], record: GcRecord, var: str, label: str
) -> tuple[frozenset[Access], GcRecord]:
    missing_reads = record.reads_since - hb
    if missing_reads:
        raise Race(WAR, var, missing_reads)
    if record.last_write not in hb:
        raise Race(WAW, var, {record.last_write})
    event = Access(label, WRITE, var)
    return frozenset({event}) | _without_var(hb, var), GcRecord(event)


def offline_gc(hb: frozenset[Access], memory: Mapping[str, GcRecord]) -> frozenset[Access]:
    """Drop writes that are not the latest and reads no longer recorded."""
    keep = []
    for a in hb:
        record = memory.get(a.var)
        if record is None:
            keep.append(a)
        elif a.kind == WRITE:
            if a == record.last_write:
                keep.append(a)
        elif a in record.reads_since:
            keep.append(a)
    if len(keep) == len(hb):
        return hb
    return frozenset(keep)
