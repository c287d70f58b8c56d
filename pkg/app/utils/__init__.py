"""
Utility modules for SmoothCert.

This package provides readers and writers for pre-sampled score files
and label files.
"""

from .score_files import ScoreFile, load_scores, parse_binary, parse_csv, read_labels, save_scores

__all__ = [
    'ScoreFile',
    'load_scores',
    'parse_binary',
    'parse_csv',
    'read_labels',
    'save_scores',
]
