"""Vector clocks and epochs for the Djit+ / FastTrack style baseline.

Clocks map thread ids to naturals; absent entries are 0.  Each thread's own
component starts at 1 so that its very first access is distinguishable
from "never happened".  See ``docs/vector_clocks.md`` for how the lock
rules carry over to channels.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping, NamedTuple, Union

from .hbset import RAW, READ, WAR, WAW, WRITE, Access, Race

__all__ = [
    "VectorClock",
    "BOTTOM",
    "Epoch",
    "epoch_leq",
    "DjitRecord",
    "FastTrackRecord",
    "vc_read_djit",
    "vc_write_djit",
    "vc_read_fasttrack",
    "vc_write_fasttrack",
]


class VectorClock(Mapping[str, int]):
    """Immutable vector clock; zero entries are never stored."""

    __slots__ = ("_c", "_hash")

    def __init__(self, entries: Mapping[str, int] | Iterable[tuple[str, int]] = ()) -> None:
        items = entries.items() if isinstance(entries, Mapping) else entries
        self._c = {t: n for t, n in items if n}
        self._hash: int | None = None

    def __getitem__(self, tid: str) -> int:
        return self._c.get(tid, 0)

    def __iter__(self) -> Iterator[str]:
        return iter(self._c)

    def __len__(self) -> int:
        return len(self._c)

    def __contains__(self, tid: object) -> bool:
        return tid in self._c

    def __eq__(self, other: object) -> bool:
        if isinstance(other, VectorClock):
            return self._c == other._c
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._c.items()))
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{t}:{n}" for t, n in sorted(self._c.items()))
        return f"VC[{inner}]"

    def leq(self, other: VectorClock) -> bool:
        return all(n <= other[t] for t, n in self._c.items())

    def join(self, other: VectorClock) -> VectorClock:
        if not other._c:
            return self
        merged = dict(self._c)
        for t, n in other._c.items():
            if n > merged.get(t, 0):
                merged[t] = n
        return VectorClock(merged)

    def inc(self, tid: str) -> VectorClock:
        merged = dict(self._c)
        merged[tid] = merged.get(tid, 0) + 1
        return VectorClock(merged)

    def set(self, tid: str, value: int) -> VectorClock:
        merged = dict(self._c)
        merged[tid] = value
        return VectorClock(merged)

    def nonzero(self) -> int:
        return len(self._c)

    def as_dict(self) -> dict[str, int]:
        return dict(sorted(self._c.items()))

    __le__ = leq
    __or__ = join


BOTTOM = VectorClock()


class Epoch(NamedTuple):
    clock: int
    tid: str

    def __repr__(self) -> str:
        return f"{self.clock}@{self.tid}"


def epoch_leq(e: Epoch | None, vc: VectorClock) -> bool:
    return e is None or e.clock <= vc[e.tid]


def _conflicts(vc: VectorClock, known: VectorClock, kind: str, var: str) -> list[Access]:
    return [Access(f"{n}@{t}", kind, var) for t, n in vc.items() if n > known[t]]


# ---------------------------------------------------------------------------
# Djit+: full vector clocks for reads and writes
# ---------------------------------------------------------------------------


class DjitRecord(NamedTuple):
    writes: VectorClock = BOTTOM
    reads: VectorClock = BOTTOM

    def size(self) -> int:
        return self.writes.nonzero() + self.reads.nonzero()


def vc_read_djit(tid: str, clock: VectorClock, rec: DjitRecord, var: str) -> DjitRecord:
    if not rec.writes.leq(clock):
        raise Race(RAW, var, _conflicts(rec.writes, clock, WRITE, var))
    return DjitRecord(rec.writes, rec.reads.set(tid, clock[tid]))


def vc_write_djit(tid: str, clock: VectorClock, rec: DjitRecord, var: str) -> DjitRecord:
    if not rec.reads.leq(clock):
        raise Race(WAR, var, _conflicts(rec.reads, clock, READ, var))
    if not rec.writes.leq(clock):
        raise Race(WAW, var, _conflicts(rec.writes, clock, WRITE, var))
    return DjitRecord(rec.writes.set(tid, clock[tid]), rec.reads)


# ---------------------------------------------------------------------------
# FastTrack: write epoch, read epoch inflating to a vector clock
# ---------------------------------------------------------------------------

ReadState = Union[Epoch, VectorClock, None]


class FastTrackRecord(NamedTuple):
    write: Epoch | None = None
    read: ReadState = None

    def size(self) -> int:
        n = 0 if self.write is None else 1
        if isinstance(self.read, VectorClock):
            return n + self.read.nonzero()
        return n + (0 if self.read is None else 1)


def vc_read_fasttrack(tid: str, clock: VectorClock, rec: FastTrackRecord, var: str) -> FastTrackRecord:
    w = rec.write
    if not epoch_leq(w, clock):
        raise Race(RAW, var, [Access(repr(w), WRITE, var)])
    now = Epoch(clock[tid], tid)
    r = rec.read
    if r is None or (isinstance(r, Epoch) and (r.tid == tid or epoch_leq(r, clock))):
        new_read: ReadState = now
    elif isinstance(r, Epoch):
        new_read = VectorClock({r.tid: r.clock, tid: now.clock})
    else:
        new_read = r.set(tid, now.clock)
    return FastTrackRecord(w, new_read)


def vc_write_fasttrack(tid: str, clock: VectorClock, rec: FastTrackRecord, var: str) -> FastTrackRecord:
    r = rec.read
    if isinstance(r, VectorClock):
        if not r.leq(clock):
            raise Race(WAR, var, _conflicts(r, clock, READ, var))
    elif not epoch_leq(r, clock):
        raise Race(WAR, var, [Access(repr(r), READ, var)])
    if not epoch_leq(rec.write, clock):
        raise Race(WAW, var, [Access(repr(rec.write), WRITE, var)])
    return FastTrackRecord(Epoch(clock[tid], tid), r)
