"""Temporal prediction streams: data model, parsing, serialization and validation.

A stream is a sequence of monthly batches of prediction records. Two text
formats are supported:

- CSV with header ``sample_id,month_index,y_true,y_pred,prob_positive`` followed
  by an optional ``embedding_id`` column and any number of ``score:<name>``
  columns. Leading ``# key=value`` lines carry stream metadata.
- JSON-lines, one record object per line; an optional leading
  ``{"metadata": {...}}`` object carries stream metadata.

Missing optional values are empty cells (CSV) or absent keys (JSON-lines).
Floats are written with ``repr`` so parse/serialize round-trips are exact.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from types import MappingProxyType
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np
import pandas as pd

from .errors import (
    ConfigError,
    DimensionMismatch,
    DriftGridError,
    DuplicateSampleId,
    EmptyStream,
    MalformedRecord,
    MissingEmbedding,
    MissingScore,
    MonthGap,
    NonFiniteValue,
    NonMonotoneMonths,
    OutOfRange,
)


STREAM_FORMATS = ("csv", "jsonl")
BASE_COLUMNS = ("sample_id", "month_index", "y_true", "y_pred", "prob_positive")
EMBEDDING_COLUMN = "embedding_id"
SCORE_PREFIX = "score:"

# Metadata keys consumed by the codec rather than stored in TemporalStream.metadata
_DATASET_KEY = "dataset"
_MONTHS_KEY = "months"

_JSON_KEYS = {"sample_id", "month_index", "y_true", "y_pred", "prob_positive", "scores", EMBEDDING_COLUMN}


@dataclass(frozen=True)
class SampleRecord:
    """One prediction event.

    Attributes:
        sample_id: Opaque identifier
        month_index: Test month, 0 = first test month
        y_true: Ground-truth label (1 = malware)
        y_pred: Predicted label
        prob_positive: Classifier's malware probability, if recorded
        scores: Named real-valued scores (e.g. "msp_u", "cade_ood")
        embedding_id: Row key into an EmbeddingTable (defaults to sample_id)
    """
    sample_id: str
    month_index: int
    y_true: int
    y_pred: int
    prob_positive: Optional[float] = None
    scores: Mapping[str, float] = field(default_factory=dict)
    embedding_id: Optional[str] = None

    def __post_init__(self):
        if self.month_index < 0:
            raise OutOfRange(f"month_index must be non-negative, got {self.month_index}")
        for name in ("y_true", "y_pred"):
            if getattr(self, name) not in (0, 1):
                raise OutOfRange(f"{name} must be 0 or 1, got {getattr(self, name)!r}")
        if self.prob_positive is not None:
            if not math.isfinite(self.prob_positive) or not 0.0 <= self.prob_positive <= 1.0:
                raise OutOfRange(f"prob_positive must be in [0, 1], got {self.prob_positive!r}")
        for name, value in self.scores.items():
            if not math.isfinite(value):
                raise NonFiniteValue(self.sample_id, f"{name}={value}")
        object.__setattr__(self, "scores", MappingProxyType({str(k): float(v) for k, v in self.scores.items()}))

    @property
    def correct(self) -> bool:
        return self.y_true == self.y_pred

    @property
    def embedding_key(self) -> str:
        return self.embedding_id if self.embedding_id is not None else self.sample_id

    def score(self, name: str) -> float:
        """Get a named score.

        Raises:
            MissingScore: If the record does not carry it
        """
        try:
            return self.scores[name]
        except KeyError:
            raise MissingScore(self.sample_id, name) from None

    def with_scores(self, **scores: float) -> "SampleRecord":
        """Return a copy with the given scores added or replaced."""
        merged = dict(self.scores)
        merged.update(scores)
        return replace(self, scores=merged)


@dataclass(frozen=True)
class MonthBatch:
    """All records that arrived in one test month, in file order."""
    month_index: int
    records: Tuple[SampleRecord, ...] = ()

    def __post_init__(self):
        records = tuple(self.records)
        seen: Set[str] = set()
        for record in records:
            if record.month_index != self.month_index:
                raise DriftGridError(
                    f"record '{record.sample_id}' has month {record.month_index}, batch is month {self.month_index}"
                )
            if record.sample_id in seen:
                raise DuplicateSampleId(record.sample_id, self.month_index)
            seen.add(record.sample_id)
        object.__setattr__(self, "records", records)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[SampleRecord]:
        return iter(self.records)

    @property
    def sample_ids(self) -> List[str]:
        return [r.sample_id for r in self.records]


@dataclass(frozen=True)
class TemporalStream:
    """Consecutive monthly batches plus dataset metadata.

    A month without arrivals is an empty batch, never a skipped index.
    Immutable after construction, so one instance can be shared by concurrent
    simulation runs.
    """
    dataset_name: str
    batches: Tuple[MonthBatch, ...]
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        batches = tuple(self.batches)
        if not batches:
            raise EmptyStream("stream has no months")
        for prev, cur in zip(batches, batches[1:]):
            if cur.month_index <= prev.month_index:
                raise NonMonotoneMonths(cur.month_index, prev.month_index)
            if cur.month_index != prev.month_index + 1:
                raise MonthGap(cur.month_index, prev.month_index)
        object.__setattr__(self, "batches", batches)
        object.__setattr__(self, "metadata", MappingProxyType({str(k): str(v) for k, v in self.metadata.items()}))

    def __len__(self) -> int:
        return len(self.batches)

    @property
    def records(self) -> List[SampleRecord]:
        return [r for batch in self.batches for r in batch.records]

    @property
    def n_records(self) -> int:
        return sum(len(b) for b in self.batches)

    @property
    def month_indices(self) -> List[int]:
        return [b.month_index for b in self.batches]

    @property
    def score_names(self) -> List[str]:
        names: Set[str] = set()
        for record in self.records:
            names.update(record.scores)
        return sorted(names)

    @property
    def method_name(self) -> Optional[str]:
        return self.metadata.get("method")

    @property
    def seed(self) -> Optional[int]:
        return self._int_metadata("seed")

    @property
    def monthly_budget(self) -> Optional[int]:
        return self._int_metadata("monthly_budget")

    @property
    def initial_budget(self) -> Optional[int]:
        return self._int_metadata("initial_budget")

    def _int_metadata(self, key: str) -> Optional[int]:
        value = self.metadata.get(key)
        if value is None or value == "":
            return None
        try:
            return int(value)
        except ValueError as e:
            raise DriftGridError(f"metadata '{key}' is not an integer: {value!r}") from e

    def map_records(self, fn: Callable[[SampleRecord], SampleRecord]) -> "TemporalStream":
        """Return a new stream with ``fn`` applied to every record."""
        batches = tuple(MonthBatch(b.month_index, tuple(fn(r) for r in b.records)) for b in self.batches)
        return TemporalStream(self.dataset_name, batches, dict(self.metadata))


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    """Latent vectors keyed by sample_id, all of one dimension."""
    dimension: int
    rows: Mapping[str, np.ndarray]

    def __post_init__(self):
        if self.dimension < 1:
            raise DriftGridError(f"dimension must be positive, got {self.dimension}")
        frozen = {}
        for key, vector in self.rows.items():
            arr = np.array(vector, dtype=float)
            if arr.shape != (self.dimension,):
                raise DimensionMismatch(self.dimension, arr.size, row=key)
            if not np.all(np.isfinite(arr)):
                raise NonFiniteValue(key, str(arr.tolist()))
            arr.flags.writeable = False
            frozen[key] = arr
        object.__setattr__(self, "rows", MappingProxyType(frozen))

    def __len__(self) -> int:
        return len(self.rows)

    def __contains__(self, key: str) -> bool:
        return key in self.rows

    def vector(self, key: str) -> np.ndarray:
        try:
            return self.rows[key]
        except KeyError:
            raise MissingEmbedding(key) from None


@dataclass(frozen=True)
class ValidationReport:
    """Result of validate_stream.

    Attributes:
        missing: (sample_id, month_index, score_name) for every absent required score
    """
    required: Tuple[str, ...]
    missing: Tuple[Tuple[str, int, str], ...] = ()

    @property
    def passed(self) -> bool:
        return not self.missing

    @property
    def missing_ids(self) -> List[str]:
        return sorted({sample_id for sample_id, _, _ in self.missing})

    def summary(self) -> str:
        if self.passed:
            return f"all records carry {', '.join(self.required) or 'no required scores'}"
        lines = [f"{len(self.missing)} missing score value(s):"]
        lines += [f"  {sid} (month {month}): {name}" for sid, month, name in self.missing]
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def parse_stream(
    source: str,
    format: str = "csv",
    dataset_name: Optional[str] = None,
    metadata: Optional[Mapping[str, str]] = None,
) -> TemporalStream:
    """Parse a stream from line-oriented text.

    Args:
        source: Full text of the stream file
        format: "csv" or "jsonl"
        dataset_name: Overrides the ``dataset`` metadata key
        metadata: Extra metadata merged over what the file declares

    Returns:
        Validated TemporalStream; interior month gaps become empty batches

    Raises:
        MalformedRecord: First malformed record, with its line number
        DuplicateSampleId: A sample_id repeats within a month
        NonMonotoneMonths: Months are not grouped in increasing order
        EmptyStream: No records
    """
    if format == "csv":
        declared, records = _parse_csv(source)
    elif format in ("jsonl", "json-lines"):
        declared, records = _parse_jsonl(source)
    else:
        raise DriftGridError(f"unknown stream format '{format}', expected one of {STREAM_FORMATS}")

    if not records:
        raise EmptyStream("stream contains no records")

    if metadata:
        declared.update({str(k): str(v) for k, v in metadata.items()})
    name = dataset_name or declared.pop(_DATASET_KEY, None) or "stream"
    declared.pop(_DATASET_KEY, None)
    month_range = _parse_month_range(declared.pop(_MONTHS_KEY, None))

    return TemporalStream(name, _group_months(records, month_range), declared)


def _parse_month_range(text: Optional[str]) -> Optional[Tuple[int, int]]:
    if not text:
        return None
    try:
        first, last = (int(part) for part in text.split(":"))
    except ValueError as e:
        raise DriftGridError(f"invalid months metadata '{text}', expected 'first:last'") from e
    return first, last


def _group_months(
    records: Sequence[Tuple[int, SampleRecord]],
    month_range: Optional[Tuple[int, int]],
) -> Tuple[MonthBatch, ...]:
    grouped: Dict[int, List[SampleRecord]] = {}
    seen: Dict[int, Set[str]] = {}
    previous = None
    for line, record in records:
        month = record.month_index
        if previous is not None and month < previous:
            raise NonMonotoneMonths(month, previous, line=line)
        previous = month
        ids = seen.setdefault(month, set())
        if record.sample_id in ids:
            raise DuplicateSampleId(record.sample_id, month, line=line)
        ids.add(record.sample_id)
        grouped.setdefault(month, []).append(record)

    first, last = min(grouped), max(grouped)
    if month_range is not None:
        first, last = min(first, month_range[0]), max(last, month_range[1])
    return tuple(MonthBatch(m, tuple(grouped.get(m, ()))) for m in range(first, last + 1))


def _metadata_line(text: str, line: int) -> Tuple[str, str]:
    body = text.lstrip("#").strip()
    if "=" not in body:
        raise MalformedRecord(line, f"metadata line must be '# key=value', got {text!r}")
    key, value = body.split("=", 1)
    return key.strip(), value.strip()


def _parse_binary(text: str, name: str) -> int:
    text = text.strip()
    if text not in ("0", "1"):
        raise ValueError(f"{name} must be 0 or 1, got {text!r}")
    return int(text)


def _parse_month(text: str) -> int:
    try:
        month = int(text.strip())
    except ValueError:
        raise ValueError(f"month_index must be an integer, got {text!r}") from None
    if month < 0:
        raise ValueError(f"month_index must be non-negative, got {month}")
    return month


def _parse_float(text: str, name: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"{name} is not a number: {text!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"{name} is not finite: {text!r}")
    return value


def _parse_csv(source: str) -> Tuple[Dict[str, str], List[Tuple[int, SampleRecord]]]:
    lines = source.splitlines()
    metadata: Dict[str, str] = {}
    header_line = None
    for idx, text in enumerate(lines, 1):
        if text.startswith("#"):
            key, value = _metadata_line(text, idx)
            metadata[key] = value
        elif text.strip():
            header_line = idx
            break
    if header_line is None:
        raise EmptyStream("stream has no header")

    header = next(csv.reader([lines[header_line - 1]]))
    header = [h.strip() for h in header]
    if tuple(header[:len(BASE_COLUMNS)]) != BASE_COLUMNS:
        raise MalformedRecord(header_line, f"header must start with {','.join(BASE_COLUMNS)}")
    extra = header[len(BASE_COLUMNS):]
    score_columns: Dict[int, str] = {}
    embedding_col = None
    for offset, column in enumerate(extra, len(BASE_COLUMNS)):
        if column == EMBEDDING_COLUMN and embedding_col is None:
            embedding_col = offset
        elif column.startswith(SCORE_PREFIX) and len(column) > len(SCORE_PREFIX):
            name = column[len(SCORE_PREFIX):]
            if name in score_columns.values():
                raise MalformedRecord(header_line, f"duplicate score column '{column}'")
            score_columns[offset] = name
        else:
            raise MalformedRecord(header_line, f"unexpected column '{column}'")

    records = []
    for idx in range(header_line, len(lines)):
        line_no = idx + 1
        text = lines[idx]
        if not text.strip():
            continue
        row = next(csv.reader([text]))
        if len(row) != len(header):
            raise MalformedRecord(line_no, f"expected {len(header)} fields, got {len(row)}")
        try:
            sample_id = row[0].strip()
            if not sample_id:
                raise ValueError("sample_id is empty")
            prob = _parse_float(row[4], "prob_positive") if row[4].strip() else None
            scores = {
                name: _parse_float(row[col], f"score:{name}")
                for col, name in score_columns.items()
                if row[col].strip()
            }
            embedding_id = None
            if embedding_col is not None and row[embedding_col].strip():
                embedding_id = row[embedding_col].strip()
            record = SampleRecord(
                sample_id=sample_id,
                month_index=_parse_month(row[1]),
                y_true=_parse_binary(row[2], "y_true"),
                y_pred=_parse_binary(row[3], "y_pred"),
                prob_positive=prob,
                scores=scores,
                embedding_id=embedding_id,
            )
        except (ValueError, DriftGridError) as e:
            raise MalformedRecord(line_no, str(e)) from e
        records.append((line_no, record))
    return metadata, records


def _json_int(obj: dict, key: str) -> int:
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{key} must be an integer, got {value!r}")
    return value


def _json_number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{name} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} is not finite")
    return value


def _parse_jsonl(source: str) -> Tuple[Dict[str, str], List[Tuple[int, SampleRecord]]]:
    metadata: Dict[str, str] = {}
    records = []
    for line_no, text in enumerate(source.splitlines(), 1):
        if not text.strip():
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise MalformedRecord(line_no, f"invalid JSON: {e.msg}") from e
        if not isinstance(obj, dict):
            raise MalformedRecord(line_no, "expected a JSON object")
        if not records and "metadata" in obj and "sample_id" not in obj:
            if not isinstance(obj["metadata"], dict):
                raise MalformedRecord(line_no, "metadata must be an object")
            metadata.update({str(k): str(v) for k, v in obj["metadata"].items()})
            continue
        try:
            unknown = set(obj) - _JSON_KEYS
            if unknown:
                raise ValueError(f"unexpected key(s) {sorted(unknown)}")
            sample_id = obj.get("sample_id")
            if not isinstance(sample_id, str) or not sample_id:
                raise ValueError("sample_id must be a non-empty string")
            month = _json_int(obj, "month_index")
            if month < 0:
                raise ValueError(f"month_index must be non-negative, got {month}")
            y_true = _json_int(obj, "y_true")
            y_pred = _json_int(obj, "y_pred")
            for name, value in (("y_true", y_true), ("y_pred", y_pred)):
                if value not in (0, 1):
                    raise ValueError(f"{name} must be 0 or 1, got {value}")
            prob = obj.get("prob_positive")
            prob = None if prob is None else _json_number(prob, "prob_positive")
            raw_scores = obj.get("scores", {})
            if not isinstance(raw_scores, dict):
                raise ValueError("scores must be an object")
            scores = {str(k): _json_number(v, f"scores.{k}") for k, v in raw_scores.items()}
            embedding_id = obj.get(EMBEDDING_COLUMN)
            if embedding_id is not None and not isinstance(embedding_id, str):
                raise ValueError("embedding_id must be a string")
            record = SampleRecord(sample_id, month, y_true, y_pred, prob, scores, embedding_id)
        except (ValueError, DriftGridError) as e:
            raise MalformedRecord(line_no, str(e)) from e
        records.append((line_no, record))
    return metadata, records


def parse_embeddings(source: str) -> EmbeddingTable:
    """Parse an embedding file: ``dim=<d>`` then ``sample_id,v1,...,vd`` rows.

    Raises:
        MalformedRecord: Bad header, unparseable float or duplicate id
        DimensionMismatch: Row with the wrong number of values
        NonFiniteValue: inf or nan in a row
    """
    lines = source.splitlines()
    if not lines or not lines[0].strip().startswith("dim="):
        raise MalformedRecord(1, "first line must be 'dim=<d>'")
    try:
        dimension = int(lines[0].strip()[4:])
    except ValueError as e:
        raise MalformedRecord(1, f"invalid dimension {lines[0].strip()[4:]!r}") from e
    if dimension < 1:
        raise MalformedRecord(1, f"dimension must be positive, got {dimension}")

    rows: Dict[str, np.ndarray] = {}
    for line_no, text in enumerate(lines[1:], 2):
        if not text.strip():
            continue
        row = next(csv.reader([text]))
        sample_id = row[0].strip()
        values = row[1:]
        if len(values) != dimension:
            raise DimensionMismatch(dimension, len(values), row=line_no)
        try:
            vector = np.array([float(v) for v in values], dtype=float)
        except ValueError as e:
            raise MalformedRecord(line_no, f"non-numeric value: {e}") from e
        if not np.all(np.isfinite(vector)):
            bad = values[int(np.flatnonzero(~np.isfinite(vector))[0])]
            raise NonFiniteValue(line_no, bad.strip())
        if sample_id in rows:
            raise MalformedRecord(line_no, f"duplicate sample_id '{sample_id}'")
        rows[sample_id] = vector
    return EmbeddingTable(dimension, rows)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _fmt_float(value: float) -> str:
    return repr(float(value))


def _stream_metadata(stream: TemporalStream) -> Dict[str, str]:
    meta = {_DATASET_KEY: stream.dataset_name}
    meta.update({k: v for k, v in sorted(stream.metadata.items()) if k not in (_DATASET_KEY, _MONTHS_KEY)})
    meta[_MONTHS_KEY] = f"{stream.batches[0].month_index}:{stream.batches[-1].month_index}"
    return meta


def serialize_stream(stream: TemporalStream, format: str = "csv") -> str:
    """Serialize a stream; ``parse_stream`` of the result reproduces it exactly."""
    if format == "csv":
        return _serialize_csv(stream)
    if format in ("jsonl", "json-lines"):
        return _serialize_jsonl(stream)
    raise DriftGridError(f"unknown stream format '{format}', expected one of {STREAM_FORMATS}")


def _serialize_csv(stream: TemporalStream) -> str:
    buffer = io.StringIO()
    for key, value in _stream_metadata(stream).items():
        buffer.write(f"# {key}={value}\n")
    records = stream.records
    with_embedding = any(r.embedding_id is not None for r in records)
    score_names = stream.score_names
    header = list(BASE_COLUMNS)
    if with_embedding:
        header.append(EMBEDDING_COLUMN)
    header += [SCORE_PREFIX + name for name in score_names]

    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for r in records:
        row = [
            r.sample_id,
            str(r.month_index),
            str(r.y_true),
            str(r.y_pred),
            "" if r.prob_positive is None else _fmt_float(r.prob_positive),
        ]
        if with_embedding:
            row.append(r.embedding_id or "")
        row += [_fmt_float(r.scores[n]) if n in r.scores else "" for n in score_names]
        writer.writerow(row)
    return buffer.getvalue()


def _serialize_jsonl(stream: TemporalStream) -> str:
    lines = [json.dumps({"metadata": _stream_metadata(stream)})]
    for r in stream.records:
        obj = {"sample_id": r.sample_id, "month_index": r.month_index, "y_true": r.y_true, "y_pred": r.y_pred}
        if r.prob_positive is not None:
            obj["prob_positive"] = r.prob_positive
        if r.scores:
            obj["scores"] = dict(r.scores)
        if r.embedding_id is not None:
            obj[EMBEDDING_COLUMN] = r.embedding_id
        lines.append(json.dumps(obj))
    return "\n".join(lines) + "\n"


def serialize_embeddings(table: EmbeddingTable) -> str:
    lines = [f"dim={table.dimension}"]
    for key, vector in table.rows.items():
        lines.append(",".join([key] + [_fmt_float(v) for v in vector]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Validation and file helpers
# ---------------------------------------------------------------------------

def validate_stream(stream: TemporalStream, required_scores: Sequence[str]) -> ValidationReport:
    """List every record missing a required score; never raises."""
    required = tuple(sorted(set(required_scores)))
    missing = tuple(
        (r.sample_id, r.month_index, name)
        for r in stream.records
        for name in required
        if name not in r.scores
    )
    return ValidationReport(required, missing)


def format_from_path(path: Union[str, Path]) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix in (".jsonl", ".json", ".ndjson"):
        return "jsonl"
    raise DriftGridError(f"cannot infer stream format from '{path}', use .csv or .jsonl")


def read_stream(path: Union[str, Path], format: Optional[str] = None, **kwargs) -> TemporalStream:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DriftGridError(f"cannot read stream {path}: {e}") from e
    return parse_stream(text, format or format_from_path(path), **kwargs)


def write_stream(stream: TemporalStream, path: Union[str, Path], format: Optional[str] = None) -> Path:
    path = Path(path)
    path.write_text(serialize_stream(stream, format or format_from_path(path)), encoding="utf-8")
    return path


def read_embeddings(path: Union[str, Path]) -> EmbeddingTable:
    path = Path(path)
    try:
        return parse_embeddings(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise DriftGridError(f"cannot read embeddings {path}: {e}") from e


def read_id_table(
    path: Union[str, Path],
    required: Sequence[str],
    what: str = "table",
    int_columns: Sequence[str] = (),
    float_columns: Sequence[str] = (),
) -> pd.DataFrame:
    """Read a CSV keyed by sample_id, checking columns and numeric cells.

    Args:
        path: CSV file with a header row
        required: Columns that must be present (sample_id is always required)
        what: Name used in error messages ("pool", "training labels", ...)
        int_columns: Columns converted to int when present
        float_columns: Columns converted to float when present

    Raises:
        ConfigError: Unreadable file, missing column or non-numeric cell
    """
    try:
        frame = pd.read_csv(path, dtype={"sample_id": str}, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ConfigError(f"cannot read {what} {path}: {e}") from e
    missing = [c for c in ("sample_id", *required) if c not in frame.columns]
    if missing:
        raise ConfigError(f"{what} {path} has no column(s) {', '.join(missing)}; found {', '.join(frame.columns)}")
    if (frame["sample_id"].str.strip() == "").any():
        row = int(np.flatnonzero(frame["sample_id"].str.strip() == "")[0])
        raise ConfigError(f"{what} {path}, line {row + 2}: sample_id is empty")

    for column in [c for c in (*int_columns, *float_columns) if c in frame.columns]:
        values = pd.to_numeric(frame[column], errors="coerce")
        bad = values.isna() | ~np.isfinite(values)
        if column in int_columns:
            bad |= values.notna() & (values % 1 != 0)
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise ConfigError(f"{what} {path}, line {row + 2}: column '{column}' "
                              f"needs a {'whole ' if column in int_columns else ''}number, "
                              f"got {frame[column].iloc[row]!r}")
        frame[column] = values.astype(int if column in int_columns else float)
    return frame
