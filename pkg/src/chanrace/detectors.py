"""Detector plug-ins used by the interpreter.

A detector owns two kinds of metadata: one value per thread (a
happens-before set or a vector clock) and one record per shared variable.
The runtime calls the hooks below at every memory access and
synchronization step; the detector decides how metadata flows.
"""

from __future__ import annotations

import enum
from typing import Any, Mapping

from . import hbset, vc
from .hbset import EMPTY, WRITE, Access, GcRecord
from .vc import BOTTOM, DjitRecord, FastTrackRecord, VectorClock

__all__ = [
    "DetectorKind",
    "Detector",
    "NullDetector",
    "HbSetDetector",
    "VcDetector",
    "make_detector",
    "parse_gc_mode",
]


class DetectorKind(str, enum.Enum):
    NONE = "none"
    AW = "aw"
    WAR = "war"
    GC = "gc"
    VC_DJIT = "vc-djit"
    VC_FASTTRACK = "vc-fasttrack"

    def __str__(self) -> str:
        return self.value


def parse_gc_mode(mode: str) -> tuple[str, int]:
    """``off`` | ``eager`` | ``every:N`` (``offline-every-N`` also accepted)."""
    if mode in ("off", "eager"):
        return mode, 0
    for prefix in ("every:", "offline-every-"):
        if mode.startswith(prefix):
            n = int(mode[len(prefix):])
            if n <= 0:
                raise ValueError("GC period must be positive")
            return "every", n
    raise ValueError(f"unknown gc mode {mode!r}")


class Detector:
    """Base class: the uninstrumented semantics (no metadata, no races)."""

    kind = DetectorKind.NONE
    gc_mode = "off"
    gc_period = 0
    message_hb = "pre"

    def init(self, pid: str, initial: list[tuple[str, str]]) -> tuple[Any, dict[str, Any]]:
        """Metadata for the root thread and one record per (var, init label)."""
        return None, {var: None for var, _ in initial}

    def read(self, pid: str, meta: Any, record: Any, var: str, label: str) -> tuple[Any, Any, str | None]:
        return meta, record, None

    def write(self, pid: str, meta: Any, record: Any, var: str, label: str) -> tuple[Any, Any, str | None]:
        return meta, record, None

    def dummy_ticket(self) -> Any:
        return None

    def initial_lock(self) -> Any:
        return None

    def send(self, pid: str, meta: Any, ticket: Any) -> tuple[Any, Any]:
        return None, meta

    def recv(self, pid: str, meta: Any, message: Any) -> tuple[Any, Any]:
        return None, meta

    def rendezvous(self, p1: str, m1: Any, p2: str, m2: Any) -> tuple[Any, Any]:
        return m1, m2

    def close(self, pid: str, meta: Any) -> tuple[Any, Any]:
        return None, meta

    def recv_eot(self, pid: str, meta: Any, eot: Any) -> Any:
        return meta

    def spawn(self, pid: str, meta: Any, child: str) -> tuple[Any, Any]:
        return meta, meta

    def acquire(self, pid: str, meta: Any, lock: Any) -> Any:
        return meta

    def release(self, pid: str, meta: Any) -> tuple[Any, Any]:
        return None, meta

    def collect(self, meta: Any, records: Mapping[str, Any]) -> Any:
        return meta

    def meta_size(self, meta: Any) -> int:
        return 0

    def record_size(self, record: Any) -> int:
        return 0

    @property
    def garbage_collects(self) -> bool:
        return False

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.kind.value})"


class NullDetector(Detector):
    pass


class HbSetDetector(Detector):
    """Happens-before-set detectors: ``aw``, ``war`` and ``gc``."""

    def __init__(
        self,
        kind: DetectorKind,
        gc_mode: str = "eager",
        max_reads: int | None = None,
        message_hb: str = "pre",
    ) -> None:
        if kind not in (DetectorKind.AW, DetectorKind.WAR, DetectorKind.GC):
            raise ValueError(f"not a happens-before-set detector: {kind}")
        if message_hb not in ("pre", "post"):
            raise ValueError("message_hb must be 'pre' or 'post'")
        self.kind = kind
        self.gc_mode, self.gc_period = parse_gc_mode(gc_mode) if kind is DetectorKind.GC else ("off", 0)
        self.max_reads = max_reads
        self.message_hb = message_hb

    @property
    def garbage_collects(self) -> bool:
        return self.kind is DetectorKind.GC and self.gc_mode != "off"

    def init(self, pid, initial):
        hb = frozenset(Access(label, WRITE, var) for var, label in initial)
        records: dict[str, Any] = {}
        for var, label in initial:
            event = Access(label, WRITE, var)
            records[var] = GcRecord(event) if self.kind is DetectorKind.GC else frozenset({event})
        return hb, records

    def read(self, pid, meta, record, var, label):
        if self.kind is DetectorKind.AW:
            hbset.read_aw(meta, record, var)
            return meta, record, None
        if self.kind is DetectorKind.WAR:
            hb, rec = hbset.read_war(meta, record, var, label, self.max_reads)
        else:
            hb, rec = hbset.read_gc(meta, record, var, label, self.max_reads)
        return hb, rec, label

    def write(self, pid, meta, record, var, label):
        if self.kind is DetectorKind.AW:
            hb, rec = hbset.write_aw(meta, record, var, label)
        elif self.kind is DetectorKind.WAR:
            hb, rec = hbset.write_war(meta, record, var, label)
        else:
            hb, rec = hbset.write_gc(meta, record, var, label)
        return hb, rec, label

    def dummy_ticket(self):
        return EMPTY

    def initial_lock(self):
        return EMPTY

    def send(self, pid, meta, ticket):
        learned = meta | ticket
        return (meta if self.message_hb == "pre" else learned), learned

    def recv(self, pid, meta, message):
        return meta, meta | message

    def rendezvous(self, p1, m1, p2, m2):
        merged = m1 | m2
        return merged, merged

    def close(self, pid, meta):
        return meta, meta

    def recv_eot(self, pid, meta, eot):
        return meta | eot

    def spawn(self, pid, meta, child):
        return meta, meta

    def acquire(self, pid, meta, lock):
        return meta | lock

    def release(self, pid, meta):
        return meta, meta

    def collect(self, meta, records):
        if self.kind is not DetectorKind.GC:
            return meta
        return hbset.offline_gc(meta, records)

    def meta_size(self, meta):
        return len(meta)

    def record_size(self, record):
        return record.size() if isinstance(record, GcRecord) else len(record)


class VcDetector(Detector):
    """Vector-clock baseline; channels are treated as generalized locks."""

    def __init__(self, kind: DetectorKind, message_hb: str = "pre") -> None:
        if kind not in (DetectorKind.VC_DJIT, DetectorKind.VC_FASTTRACK):
            raise ValueError(f"not a vector-clock detector: {kind}")
        if message_hb not in ("pre", "post"):
            raise ValueError("message_hb must be 'pre' or 'post'")
        self.kind = kind
        self.message_hb = message_hb

    @property
    def fasttrack(self) -> bool:
        return self.kind is DetectorKind.VC_FASTTRACK

    def init(self, pid, initial):
        empty = FastTrackRecord() if self.fasttrack else DjitRecord()
        return VectorClock({pid: 1}), {var: empty for var, _ in initial}

    def read(self, pid, meta, record, var, label):
        if self.fasttrack:
            return meta, vc.vc_read_fasttrack(pid, meta, record, var), None
        return meta, vc.vc_read_djit(pid, meta, record, var), None

    def write(self, pid, meta, record, var, label):
        if self.fasttrack:
            return meta, vc.vc_write_fasttrack(pid, meta, record, var), None
        return meta, vc.vc_write_djit(pid, meta, record, var), None

    def dummy_ticket(self):
        return BOTTOM

    def initial_lock(self):
        return BOTTOM

    # Every operation that deposits the thread's clock somewhere is a
    # release-analogue and must be followed by an increment.

    def send(self, pid, meta, ticket):
        learned = meta.join(ticket)
        return (meta if self.message_hb == "pre" else learned), learned.inc(pid)

    def recv(self, pid, meta, message):
        return meta, meta.join(message).inc(pid)

    def rendezvous(self, p1, m1, p2, m2):
        merged = m1.join(m2)
        return merged.inc(p1), merged.inc(p2)

    def close(self, pid, meta):
        return meta, meta.inc(pid)

    def recv_eot(self, pid, meta, eot):
        return meta.join(eot)

    def spawn(self, pid, meta, child):
        return meta.inc(pid), meta.set(child, 1)

    def acquire(self, pid, meta, lock):
        return meta.join(lock)

    def release(self, pid, meta):
        return meta, meta.inc(pid)

    def meta_size(self, meta):
        return meta.nonzero()

    def record_size(self, record):
        return record.size()


def make_detector(
    kind: DetectorKind | str,
    gc_mode: str = "eager",
    max_reads: int | None = None,
    message_hb: str = "pre",
) -> Detector:
    kind = DetectorKind(kind)
    if kind is DetectorKind.NONE:
        return NullDetector()
    if kind in (DetectorKind.VC_DJIT, DetectorKind.VC_FASTTRACK):
        return VcDetector(kind, message_hb=message_hb)
    return HbSetDetector(kind, gc_mode=gc_mode, max_reads=max_reads, message_hb=message_hb)
