"""
Evaluation of pipeline outputs against reference recordings.
"""

from ppg_sleep.evaluation.alignment import Alignment, dtw_align
from ppg_sleep.evaluation.metrics import SummaryRow, mae, mape, summarize
from ppg_sleep.evaluation.report import METRICS, EvalReport
from ppg_sleep.evaluation.scoring import (
	evaluate_br,
	evaluate_hr,
	evaluate_rr,
	hr_reference,
	reference_exclusions,
)

__all__ = [
	'METRICS',
	'Alignment',
	'EvalReport',
	'SummaryRow',
	'dtw_align',
	'evaluate_br',
	'evaluate_hr',
	'evaluate_rr',
	'hr_reference',
	'mae',
	'mape',
	'reference_exclusions',
	'summarize',
]
