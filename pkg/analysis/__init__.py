"""
Ideal-model scans and their analysis.
"""

from analysis.ScanAnalyzer import ScanAnalyzer
from analysis.TimeScan import SCAN_COLUMNS, TimeScan

__all__ = ["ScanAnalyzer", "TimeScan", "SCAN_COLUMNS"]
