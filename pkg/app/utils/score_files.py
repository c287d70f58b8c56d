"""
Score file readers and writers.

Pre-sampled logits come either as a binary file

    header  <5sBIQdI  magic b"LVMS1", version, classes c, samples n,
                      sigma (NaN when absent), input count
    body    count blocks of n x c little-endian float64

or as CSV with an optional ``# sigma=<value>`` first line and columns
input_id, sample_id, logit_0 .. logit_{c-1}. Errors name the byte offset
(binary) or line number (CSV) of the problem.
"""

import csv
import io
import logging
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from ..errors import DataFormatError, DimensionMismatchError
from ..runner.smoothing_engine import ScoreMatrix

logger = logging.getLogger(__name__)

MAGIC = b"LVMS1"
FORMAT_VERSION = 1
HEADER = struct.Struct("<5sBIQdI")
SIGMA_PREFIX = "# sigma="

PathLike = Union[str, Path]


@dataclass
class ScoreFile:
    """Per-input blocks of n x c pre-sampled logits."""

    num_classes: int
    samples: int
    sigma: Optional[float] = None
    input_ids: List[int] = field(default_factory=list)
    blocks: List[np.ndarray] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.blocks)

    def score_matrix(self, index: int) -> ScoreMatrix:
        return ScoreMatrix(self.blocks[index])


def _first_nonfinite(values: np.ndarray) -> Optional[int]:
    bad = np.flatnonzero(~np.isfinite(values.ravel()))
    return int(bad[0]) if bad.size else None


def parse_binary(data: bytes) -> ScoreFile:
    if len(data) < HEADER.size:
        raise DataFormatError(f"Truncated header: need {HEADER.size} bytes, got {len(data)}", offset=len(data))
    magic, version, classes, samples, sigma, count = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise DataFormatError(f"Bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    if version != FORMAT_VERSION:
        raise DataFormatError(f"Unsupported format version {version}", offset=5)
    if classes < 1:
        raise DataFormatError("Class count must be positive", offset=6)
    if samples < 2:
        raise DataFormatError(f"Need at least 2 samples per input, got {samples}", offset=10)
    if not (math.isnan(sigma) or (math.isfinite(sigma) and sigma > 0)):
        raise DataFormatError(f"Invalid sigma {sigma}", offset=18)
    if count < 1:
        raise DataFormatError("Score file holds no inputs", offset=26)

    expected = count * samples * classes * 8
    found = len(data) - HEADER.size
    if found != expected:
        raise DimensionMismatchError(
            f"body length in bytes for {count} x {samples} x {classes} scores", expected, found,
            offset=HEADER.size,
        )

    values = np.frombuffer(data, dtype="<f8", offset=HEADER.size).astype(np.float64)
    bad = _first_nonfinite(values)
    if bad is not None:
        raise DataFormatError("Non-finite score", offset=HEADER.size + 8 * bad)
    values = values.reshape(count, samples, classes)
    return ScoreFile(
        num_classes=classes,
        samples=samples,
        sigma=None if math.isnan(sigma) else sigma,
        input_ids=list(range(count)),
        blocks=[values[i] for i in range(count)],
    )


def encode_binary(scores: ScoreFile) -> bytes:
    sigma = math.nan if scores.sigma is None else float(scores.sigma)
    header = HEADER.pack(MAGIC, FORMAT_VERSION, scores.num_classes, scores.samples, sigma, len(scores))
    body = b"".join(np.ascontiguousarray(block, dtype="<f8").tobytes() for block in scores.blocks)
    return header + body


def _parse_int(text: str, what: str, line: int) -> int:
    try:
        return int(text)
    except ValueError as e:
        raise DataFormatError(f"Invalid {what} {text!r}", line=line) from e


def _parse_logit(text: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError as e:
        raise DataFormatError(f"Invalid logit {text!r}", line=line) from e
    if not math.isfinite(value):
        raise DataFormatError(f"Non-finite logit {text!r}", line=line)
    return value


def parse_csv(text: str) -> ScoreFile:
    lines = text.splitlines()
    sigma = None
    first = 0
    if lines and lines[0].startswith(SIGMA_PREFIX):
        raw = lines[0][len(SIGMA_PREFIX):].strip()
        try:
            sigma = float(raw)
        except ValueError as e:
            raise DataFormatError(f"Invalid sigma {raw!r}", line=1) from e
        if not (math.isfinite(sigma) and sigma > 0):
            raise DataFormatError(f"Invalid sigma {raw!r}", line=1)
        first = 1

    reader = csv.reader(lines[first:])
    try:
        header = next(reader)
    except StopIteration:
        raise DataFormatError("Missing CSV header", line=first + 1) from None
    header = [name.strip() for name in header]
    classes = len(header) - 2
    expected_header = ["input_id", "sample_id"] + [f"logit_{k}" for k in range(max(classes, 0))]
    if classes < 1 or header != expected_header:
        raise DataFormatError(
            "CSV header must be input_id,sample_id,logit_0,...,logit_{c-1}", line=first + 1
        )

    input_ids: List[int] = []
    block_rows: List[List[List[float]]] = []
    block_lines: List[int] = []
    for line_number, row in enumerate(reader, start=first + 2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != classes + 2:
            raise DimensionMismatchError("CSV columns", classes + 2, len(row), line=line_number)
        input_id = _parse_int(row[0], "input_id", line_number)
        sample_id = _parse_int(row[1], "sample_id", line_number)
        if not input_ids or input_ids[-1] != input_id:
            if input_id in input_ids:
                raise DataFormatError(f"Rows of input {input_id} are not contiguous", line=line_number)
            input_ids.append(input_id)
            block_rows.append([])
            block_lines.append(line_number)
        if sample_id != len(block_rows[-1]):
            raise DimensionMismatchError(f"sample_id of input {input_id}", len(block_rows[-1]), sample_id,
                                         line=line_number)
        block_rows[-1].append([_parse_logit(cell, line_number) for cell in row[2:]])

    if not block_rows:
        raise DataFormatError("Score file holds no inputs", line=first + 2)
    samples = len(block_rows[0])
    for input_id, rows, line_number in zip(input_ids, block_rows, block_lines):
        if len(rows) != samples:
            raise DimensionMismatchError(f"samples for input {input_id}", samples, len(rows), line=line_number)
    if samples < 2:
        raise DataFormatError(f"Need at least 2 samples per input, got {samples}", line=block_lines[0])

    return ScoreFile(
        num_classes=classes,
        samples=samples,
        sigma=sigma,
        input_ids=input_ids,
        blocks=[np.array(rows, dtype=np.float64) for rows in block_rows],
    )


def encode_csv(scores: ScoreFile) -> str:
    out = io.StringIO()
    if scores.sigma is not None:
        out.write(f"{SIGMA_PREFIX}{float(scores.sigma)!r}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["input_id", "sample_id"] + [f"logit_{k}" for k in range(scores.num_classes)])
    for input_id, block in zip(scores.input_ids, scores.blocks):
        for sample_id, row in enumerate(block):
            writer.writerow([input_id, sample_id] + [repr(float(v)) for v in row])
    return out.getvalue()


def load_scores(path: PathLike) -> ScoreFile:
    """Read a score file, detecting the binary form by its magic."""
    data = Path(path).read_bytes()
    if data.startswith(MAGIC):
        scores = parse_binary(data)
    else:
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DataFormatError(f"Neither a binary score file nor UTF-8 CSV: {e.reason}",
                                  offset=e.start) from e
        scores = parse_csv(text)
    logger.debug("Loaded %d inputs of %d x %d scores from %s", len(scores), scores.samples,
                 scores.num_classes, path)
    return scores


def save_scores(scores: ScoreFile, path: PathLike, binary: bool = True) -> None:
    path = Path(path)
    if binary:
        path.write_bytes(encode_binary(scores))
    else:
        path.write_text(encode_csv(scores), encoding="utf-8")


def read_labels(path: PathLike) -> Dict[int, int]:
    """Read a CSV of input_id,label pairs."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = [name.strip() for name in next(reader)]
        except StopIteration:
            raise DataFormatError("Missing labels header", line=1) from None
        if header != ["input_id", "label"]:
            raise DataFormatError("Labels header must be input_id,label", line=1)
        labels: Dict[int, int] = {}
        for line_number, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise DimensionMismatchError("label columns", 2, len(row), line=line_number)
            input_id = _parse_int(row[0], "input_id", line_number)
            label = _parse_int(row[1], "label", line_number)
            if label < 0:
                raise DataFormatError(f"Label must be nonnegative, got {label}", line=line_number)
            if input_id in labels:
                raise DataFormatError(f"Duplicate label for input {input_id}", line=line_number)
            labels[input_id] = label
    return labels
