"""Append-only, hash-chained audit trail.

Each entry hashes (sequence, recorded_at, kind, canonical payload, prev_hash)
with SHA-256; the genesis prev_hash is 64 zeros. The store is a JSONL file
with canonical key ordering so hashes are platform-stable. Appends take an
advisory file lock (single writer) and replace the file atomically; readers
are unrestricted. Verification walks the whole chain and reports the first
broken sequence, which makes any byte-level alteration, reordering, or
removal detectable.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from filelock import FileLock, Timeout

from .errors import ChainBroken, LockHeld
from .ingest import canonical_json

__all__ = ["AUDIT_KINDS", "GENESIS_HASH", "AuditEntry", "AuditStore"]

AUDIT_KINDS = (
    "rfi_record",
    "drift_report",
    "fairness_screen",
    "sar_batch",
    "certification",
    "config_change",
)

GENESIS_HASH = "0" * 64


@dataclass(frozen=True)
class AuditEntry:
    sequence: int
    recorded_at: str  # RFC 3339 UTC
    kind: str
    payload: dict
    prev_hash: str
    entry_hash: str

    def to_json(self) -> str:
        return canonical_json(
            {
                "sequence": self.sequence,
                "recorded_at": self.recorded_at,
                "kind": self.kind,
                "payload": self.payload,
                "prev_hash": self.prev_hash,
                "entry_hash": self.entry_hash,
            }
        )


def _entry_hash(sequence: int, recorded_at: str, kind: str, payload: dict, prev_hash: str) -> str:
    material = "\n".join(
        [str(sequence), recorded_at, kind, canonical_json(payload), prev_hash]
    )
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds").replace("+00:00", "Z")


class AuditStore:
    """File-backed audit chain at <directory>/audit.jsonl."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.path = self.directory / "audit.jsonl"
        self._lock = FileLock(str(self.directory / "audit.lock"))

    def entries(self) -> list[AuditEntry]:
        """Parsed entries in file order. Raises ChainBroken on unparseable lines."""
        if not self.path.exists():
            return []
        out: list[AuditEntry] = []
        with self.path.open() as fh:
            for index, line in enumerate(fh):
                try:
                    obj = json.loads(line)
                    out.append(
                        AuditEntry(
                            sequence=int(obj["sequence"]),
                            recorded_at=str(obj["recorded_at"]),
                            kind=str(obj["kind"]),
                            payload=obj["payload"],
                            prev_hash=str(obj["prev_hash"]),
                            entry_hash=str(obj["entry_hash"]),
                        )
                    )
                except (ValueError, KeyError, TypeError):
                    raise ChainBroken(index) from None
        return out

    def append(self, kind: str, payload: dict, recorded_at: str | None = None) -> AuditEntry:
        """Append one entry under the writer lock; all-or-nothing on disk.

        The existing chain is verified before extending it, so a corrupted
        store is never silently continued.
        """
        if kind not in AUDIT_KINDS:
            raise ValueError(f"unknown audit kind {kind!r}")
        try:
            lock = self._lock.acquire(timeout=0)
        except Timeout:
            raise LockHeld(f"audit store {self.directory} is locked by another writer") from None
        with lock:
            broken = self.verify()
            if broken is not None:
                raise ChainBroken(broken)
            existing = self.entries()
            sequence = len(existing)
            prev_hash = existing[-1].entry_hash if existing else GENESIS_HASH
            stamped = recorded_at or _utc_now()
            entry = AuditEntry(
                sequence=sequence,
                recorded_at=stamped,
                kind=kind,
                payload=payload,
                prev_hash=prev_hash,
                entry_hash=_entry_hash(sequence, stamped, kind, payload, prev_hash),
            )
            self._rewrite(existing + [entry])
        return entry

    def _rewrite(self, entries: list[AuditEntry]) -> None:
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".audit-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                for e in entries:
                    fh.write(e.to_json() + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    def verify(self) -> int | None:
        """None when the chain is intact, else the first broken sequence."""
        if not self.path.exists():
            return None
        prev_hash = GENESIS_HASH
        with self.path.open() as fh:
            for index, line in enumerate(fh):
                try:
                    obj = json.loads(line)
                    sequence = obj["sequence"]
                    recorded_at = obj["recorded_at"]
                    kind = obj["kind"]
                    payload = obj["payload"]
                    claimed_prev = obj["prev_hash"]
                    claimed_hash = obj["entry_hash"]
                except (ValueError, KeyError, TypeError):
                    return index
                if sequence != index or claimed_prev != prev_hash:
                    return index
                if kind not in AUDIT_KINDS:
                    return index
                expected = _entry_hash(sequence, recorded_at, kind, payload, claimed_prev)
                if expected != claimed_hash:
                    return index
                prev_hash = claimed_hash
        return None

    def records_of_kind(self, kind: str) -> list[AuditEntry]:
        return [e for e in self.entries() if e.kind == kind]
