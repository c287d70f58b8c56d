"""
Certificate records and their JSONL serialization.

One record per input, one JSON object per line. Parsing reports the
line number of the first malformed record.
"""

import json
import logging
import math
from dataclasses import dataclass, fields
from typing import Any, Dict, Iterable, Iterator, List, Optional, TextIO, Tuple, Union

from ..certify.radius import ABSTAIN, Certificate, RadiusRule
from ..certify.simplex_maps import MapKind
from ..errors import DataFormatError

ABSTAIN_LABEL = "abstain"


@dataclass(frozen=True)
class CertificateRecord:
    """Serialized certificate of one input."""

    input_id: int
    label: Optional[int]
    prediction: Union[int, str]
    radius: float
    rule: str
    map: str
    temperature: float
    mass: float
    alpha: float
    sigma: float
    n0: int
    n: int
    seed: int
    method: str

    @classmethod
    def from_certificate(cls, certificate: Certificate, input_id: int, seed: int,
                         label: Optional[int] = None) -> "CertificateRecord":
        spec = certificate.map_spec
        return cls(
            input_id=int(input_id),
            label=None if label is None else int(label),
            prediction=ABSTAIN_LABEL if certificate.abstained else int(certificate.prediction),
            radius=float(certificate.radius),
            rule=certificate.rule.value,
            map=spec.kind.value if spec is not None else MapKind.HARDMAX.value,
            temperature=float(spec.temperature) if spec is not None else 1.0,
            mass=float(spec.mass) if spec is not None else 1.0,
            alpha=float(certificate.alpha),
            sigma=float(certificate.sigma),
            n0=int(certificate.n0) if certificate.n0 is not None else 0,
            n=int(certificate.n),
            seed=int(seed),
            method=certificate.method.value if certificate.method is not None else "",
        )

    @property
    def abstained(self) -> bool:
        return self.prediction == ABSTAIN_LABEL

    @property
    def predicted_class(self) -> int:
        return ABSTAIN if self.abstained else int(self.prediction)

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_json_line(self) -> str:
        return json.dumps(self.to_dict(), allow_nan=False)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], line: Optional[int] = None) -> "CertificateRecord":
        names = [f.name for f in fields(cls)]
        missing = [name for name in names if name not in data]
        if missing:
            raise DataFormatError(f"Certificate record is missing fields: {', '.join(missing)}", line=line)
        unexpected = [key for key in data if key not in names]
        if unexpected:
            raise DataFormatError(f"Certificate record has unexpected fields: {', '.join(unexpected)}", line=line)
        record = cls(**{name: data[name] for name in names})
        is_valid, errors = record.validate()
        if not is_valid:
            raise DataFormatError(f"Invalid certificate record: {'; '.join(errors)}", line=line)
        return record

    def validate(self) -> Tuple[bool, List[str]]:
        """Check field types and the certificate invariants."""
        errors = []

        def is_int(value) -> bool:
            return isinstance(value, int) and not isinstance(value, bool)

        def is_real(value) -> bool:
            return is_int(value) or (isinstance(value, float) and math.isfinite(value))

        for name in ("input_id", "n0", "n", "seed"):
            if not is_int(getattr(self, name)) or getattr(self, name) < 0:
                errors.append(f"Field '{name}' must be a nonnegative integer")
        if self.label is not None and (not is_int(self.label) or self.label < 0):
            errors.append("Field 'label' must be a nonnegative integer or null")

        if self.prediction != ABSTAIN_LABEL and (not is_int(self.prediction) or self.prediction < 0):
            errors.append(f"Field 'prediction' must be a class index or '{ABSTAIN_LABEL}'")

        if not is_real(self.radius) or self.radius < 0:
            errors.append("Field 'radius' must be a nonnegative number")
        elif self.prediction == ABSTAIN_LABEL and self.radius != 0:
            errors.append("An abstaining record must have radius 0")

        if self.rule not in [rule.value for rule in RadiusRule]:
            errors.append(f"Invalid rule: {self.rule}")
        if self.map not in [kind.value for kind in MapKind]:
            errors.append(f"Invalid map: {self.map}")
        for name in ("temperature", "mass", "sigma"):
            value = getattr(self, name)
            if not is_real(value) or value <= 0:
                errors.append(f"Field '{name}' must be a positive number")
        if not is_real(self.alpha) or not (0 < self.alpha < 1):
            errors.append("Field 'alpha' must lie in (0, 1)")
        if not isinstance(self.method, str):
            errors.append("Field 'method' must be a string")

        return len(errors) == 0, errors


class CertificateParser:
    """Line-oriented parser for certificate JSONL files."""

    def __init__(self):
        self._logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def parse_lines(self, lines: Iterable[str]) -> Iterator[CertificateRecord]:
        """Yield records; blank lines are skipped, the first bad line raises."""
        for line_number, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            yield self._parse_line(line, line_number)

    def _parse_line(self, line: str, line_number: int) -> CertificateRecord:
        try:
            data = json.loads(line)
        except json.JSONDecodeError as e:
            raise DataFormatError(f"Invalid JSON: {e.msg}", line=line_number) from e
        if not isinstance(data, dict):
            raise DataFormatError("Certificate record is not a JSON object", line=line_number)
        return CertificateRecord.from_dict(data, line=line_number)

    def parse_file(self, path) -> List[CertificateRecord]:
        with open(path, "r", encoding="utf-8") as f:
            records = list(self.parse_lines(f))
        self._logger.debug("Parsed %d certificate records from %s", len(records), path)
        return records


def write_records(records: Iterable[CertificateRecord], stream: TextIO) -> None:
    """Write one JSON line per record."""
    for record in records:
        stream.write(record.to_json_line() + "\n")
