"""
Certification runner for SmoothCert.

Grid configuration, the smoothing engine, parallel batches, progress
events and certificate records.
"""

from .batch_runner import BatchResult, BatchRunner
from .config_models import GridConfig
from .events import Event, EventEmitter, EventType, Stage
from .jsonl_parser import CertificateParser, CertificateRecord
from .smoothing_engine import (
    ScoreMatrix, Selection, Stream, certified_accuracy_curve, certify_from_scores,
    estimate_phat, lvm_rs_certify, sample_scores, select_map, temperature_sweep,
)

__all__ = [
    'BatchResult', 'BatchRunner', 'CertificateParser', 'CertificateRecord', 'Event',
    'EventEmitter', 'EventType', 'GridConfig', 'ScoreMatrix', 'Selection', 'Stage', 'Stream',
    'certified_accuracy_curve', 'certify_from_scores', 'estimate_phat', 'lvm_rs_certify',
    'sample_scores', 'select_map', 'temperature_sweep',
]
