"""Validated file ingestion and canonical serialization.

Formats:
    predictions.csv    transaction_id,timestamp,score[,score_b],label,amount
    shap.csv           transaction_id,<feature_1>,...,<feature_k>
    proxies.csv        transaction_id,p_white_nh,p_black_nh,p_hispanic,p_asian
    certifications.jsonl   one JSON object per line

Every reader validates rows against the domain invariants and collects
rejects with 1-based line numbers (header is line 1); accepted + rejected
always equals the input row count. Writers emit the same formats so
serialization round-trips are identity.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import SchemaMismatch
from .fairness import PROXY_CATEGORIES, ProxyProfile, ShapPanel
from .metrics import ScoredSample
from .sar import CertificationRecord

__all__ = [
    "RowReject",
    "PredictionsFile",
    "ingest_predictions",
    "write_predictions",
    "ingest_shap",
    "write_shap",
    "ingest_proxies",
    "write_proxies",
    "ingest_certifications",
    "write_certifications",
    "append_certification",
    "canonical_json",
]

_PRED_HEADER = ["transaction_id", "timestamp", "score", "label", "amount"]
_PRED_HEADER_B = ["transaction_id", "timestamp", "score", "score_b", "label", "amount"]
_PROXY_HEADER = ["transaction_id"] + [f"p_{c}" for c in PROXY_CATEGORIES]


@dataclass(frozen=True)
class RowReject:
    """One rejected input row with its 1-based line number."""

    line: int
    reason: str


@dataclass(frozen=True)
class PredictionsFile:
    """Parsed predictions: samples, optional second-model scores, rejects."""

    samples: tuple[ScoredSample, ...]
    scores_b: tuple[float, ...] | None
    rejects: tuple[RowReject, ...]

    @property
    def row_count(self) -> int:
        return len(self.samples) + len(self.rejects)


def canonical_json(payload: object) -> str:
    """Canonical JSON: sorted keys, no insignificant whitespace, ASCII-safe."""
    return json.dumps(
        payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True, default=str
    )


def _parse_probability(raw: str, field: str) -> float:
    value = float(raw)
    if not 0.0 <= value <= 1.0 or value != value:
        raise ValueError(f"{field} {raw} outside [0, 1]")
    return value


def ingest_predictions(path: str | Path) -> PredictionsFile:
    """Read and validate a predictions file.

    Raises SchemaMismatch for a bad header; invalid rows (range violations,
    malformed numbers, duplicate ids) are rejected individually with line
    numbers, never silently dropped.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file") from None
        if header == _PRED_HEADER_B:
            has_b = True
        elif header == _PRED_HEADER:
            has_b = False
        else:
            raise SchemaMismatch(
                f"{path}: header {header} matches neither {_PRED_HEADER} nor {_PRED_HEADER_B}"
            )

        samples: list[ScoredSample] = []
        scores_b: list[float] = []
        rejects: list[RowReject] = []
        seen_ids: set[str] = set()
        for line_no, row in enumerate(reader, start=2):
            try:
                if len(row) != len(header):
                    raise ValueError(f"expected {len(header)} columns, got {len(row)}")
                txn_id = row[0]
                if txn_id in seen_ids:
                    raise ValueError(f"duplicate transaction_id {txn_id!r}")
                timestamp = int(row[1])
                score = _parse_probability(row[2], "score")
                if has_b:
                    score_b = _parse_probability(row[3], "score_b")
                    label_raw, amount_raw = row[4], row[5]
                else:
                    score_b = None
                    label_raw, amount_raw = row[3], row[4]
                label = int(label_raw)
                if label not in (0, 1):
                    raise ValueError(f"label {label_raw} not in {{0, 1}}")
                amount = Decimal(amount_raw).quantize(Decimal("0.01"))
                if amount < 0:
                    raise ValueError(f"amount {amount_raw} negative")
                sample = ScoredSample(
                    transaction_id=txn_id,
                    score=score,
                    label=label,
                    timestamp=timestamp,
                    amount=amount,
                )
            except (ValueError, InvalidOperation) as exc:
                rejects.append(RowReject(line=line_no, reason=str(exc)))
                continue
            seen_ids.add(txn_id)
            samples.append(sample)
            if has_b:
                scores_b.append(score_b)

    return PredictionsFile(
        samples=tuple(samples),
        scores_b=tuple(scores_b) if has_b else None,
        rejects=tuple(rejects),
    )


def write_predictions(
    path: str | Path,
    samples: Sequence[ScoredSample],
    scores_b: Sequence[float] | None = None,
) -> None:
    if scores_b is not None and len(scores_b) != len(samples):
        raise ValueError("scores_b must align 1:1 with samples")
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_PRED_HEADER_B if scores_b is not None else _PRED_HEADER)
        for i, s in enumerate(samples):
            row = [s.transaction_id, s.timestamp, repr(s.score)]
            if scores_b is not None:
                row.append(repr(scores_b[i]))
            row += [s.label, str(s.amount)]
            writer.writerow(row)


def ingest_shap(path: str | Path) -> tuple[ShapPanel, tuple[RowReject, ...]]:
    """Read a rectangular attribution matrix; ragged or non-numeric rows reject."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file") from None
        if not header or header[0] != "transaction_id" or len(header) < 2:
            raise SchemaMismatch(
                f"{path}: header must be transaction_id,<feature_1>,...,<feature_k>"
            )
        features = tuple(header[1:])
        if len(set(features)) != len(features):
            raise SchemaMismatch(f"{path}: duplicate feature columns")

        ids: list[str] = []
        rows: list[list[float]] = []
        rejects: list[RowReject] = []
        seen: set[str] = set()
        for line_no, row in enumerate(reader, start=2):
            try:
                if len(row) != len(header):
                    raise ValueError(f"expected {len(header)} columns, got {len(row)}")
                txn_id = row[0]
                if not txn_id:
                    raise ValueError("empty transaction_id")
                if txn_id in seen:
                    raise ValueError(f"duplicate transaction_id {txn_id!r}")
                values = [float(v) for v in row[1:]]
                if any(v != v for v in values):
                    raise ValueError("NaN attribution value")
            except ValueError as exc:
                rejects.append(RowReject(line=line_no, reason=str(exc)))
                continue
            seen.add(txn_id)
            ids.append(txn_id)
            rows.append(values)

    matrix = np.asarray(rows, dtype=float) if rows else np.empty((0, len(features)))
    panel = ShapPanel(transaction_ids=tuple(ids), features=features, values=matrix)
    return panel, tuple(rejects)


def write_shap(path: str | Path, panel: ShapPanel) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["transaction_id", *panel.features])
        for txn_id, row in zip(panel.transaction_ids, panel.values):
            writer.writerow([txn_id, *(repr(float(v)) for v in row)])


def ingest_proxies(path: str | Path) -> tuple[tuple[ProxyProfile, ...], tuple[RowReject, ...]]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file") from None
        if header != _PROXY_HEADER:
            raise SchemaMismatch(f"{path}: header {header} != {_PROXY_HEADER}")

        profiles: list[ProxyProfile] = []
        rejects: list[RowReject] = []
        seen: set[str] = set()
        for line_no, row in enumerate(reader, start=2):
            try:
                if len(row) != len(header):
                    raise ValueError(f"expected {len(header)} columns, got {len(row)}")
                txn_id = row[0]
                if not txn_id:
                    raise ValueError("empty transaction_id")
                if txn_id in seen:
                    raise ValueError(f"duplicate transaction_id {txn_id!r}")
                probabilities = {
                    category: _parse_probability(raw, f"p_{category}")
                    for category, raw in zip(PROXY_CATEGORIES, row[1:])
                }
                profile = ProxyProfile(transaction_id=txn_id, proxy_probabilities=probabilities)
            except ValueError as exc:
                rejects.append(RowReject(line=line_no, reason=str(exc)))
                continue
            seen.add(txn_id)
            profiles.append(profile)
    return tuple(profiles), tuple(rejects)


def write_proxies(path: str | Path, profiles: Sequence[ProxyProfile]) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_PROXY_HEADER)
        for p in profiles:
            writer.writerow(
                [p.transaction_id]
                + [repr(float(p.proxy_probabilities[c])) for c in PROXY_CATEGORIES]
            )


def ingest_certifications(
    path: str | Path,
) -> tuple[tuple[CertificationRecord, ...], tuple[RowReject, ...]]:
    """Read a certification ledger (JSONL); malformed lines reject individually."""
    path = Path(path)
    records: list[CertificationRecord] = []
    rejects: list[RowReject] = []
    with path.open() as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("line is not a JSON object")
                unknown = set(obj) - {
                    "alert_id",
                    "analyst_id",
                    "certified_at",
                    "disposition",
                    "amended_text",
                }
                if unknown:
                    raise ValueError(f"unknown keys {sorted(unknown)}")
                record = CertificationRecord(
                    alert_id=str(obj["alert_id"]),
                    analyst_id=str(obj["analyst_id"]),
                    certified_at=int(obj["certified_at"]),
                    disposition=str(obj["disposition"]),
                    amended_text=obj.get("amended_text"),
                )
            except (ValueError, KeyError, TypeError) as exc:
                rejects.append(RowReject(line=line_no, reason=str(exc)))
                continue
            records.append(record)
    return tuple(records), tuple(rejects)


def write_certifications(path: str | Path, records: Iterable[CertificationRecord]) -> None:
    path = Path(path)
    with path.open("w") as fh:
        for r in records:
            payload: dict[str, object] = {
                "alert_id": r.alert_id,
                "analyst_id": r.analyst_id,
                "certified_at": r.certified_at,
                "disposition": r.disposition,
            }
            if r.amended_text is not None:
                payload["amended_text"] = r.amended_text
            fh.write(canonical_json(payload) + "\n")


def append_certification(path: str | Path, record: CertificationRecord) -> None:
    """Single-writer append to the certification ledger."""
    path = Path(path)
    payload: dict[str, object] = {
        "alert_id": record.alert_id,
        "analyst_id": record.analyst_id,
        "certified_at": record.certified_at,
        "disposition": record.disposition,
    }
    if record.amended_text is not None:
        payload["amended_text"] = record.amended_text
    with path.open("a") as fh:
        fh.write(canonical_json(payload) + "\n")
