"""
Evaluation report across recordings.

The report keeps the per-recording metric values and one summary row per
metric, and renders them as JSON or as an aligned text table with one row per
metric and the columns Min, Q25, Median, Q75, Max and Mean.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

import pandas as pd

from ppg_sleep.evaluation.metrics import STATISTICS, SummaryRow, summarize
from ppg_sleep.exceptions import InsufficientDataError, ValidationError
from ppg_sleep.utils.helpers import atomic_write, format_table

logger = logging.getLogger(__name__)

# (key, table label)
METRICS: Tuple[Tuple[str, str], ...] = (
	('rr_mae_ms', 'RR MAE [ms]'),
	('rr_mape_pct', 'RR MAPE [%]'),
	('hr_mae_bpm', 'HR MAE [min⁻¹]'),
	('hr_mape_pct', 'HR MAPE [%]'),
	('br_mae_min', 'BR MAE [min⁻¹]'),
	('br_mape_pct', 'BR MAPE [%]'),
)
METRIC_KEYS = tuple(key for key, _ in METRICS)
COLUMN_LABELS = ('Min', 'Q25', 'Median', 'Q75', 'Max', 'Mean')


@dataclass
class EvalReport:
	"""
	Metric values per recording and their summaries.

	Attributes:
	    recordings: Recording name mapped to its metric values; a metric that
	        could not be computed for a recording is None.
	    summary: Metric key mapped to its summary over the recordings that have
	        a value; metrics without any value are absent.
	    errors: Recording name mapped to the reason it could not be scored.

	"""

	recordings: Dict[str, Dict[str, Optional[float]]] = field(default_factory=dict)
	summary: Dict[str, SummaryRow] = field(default_factory=dict)
	errors: Dict[str, str] = field(default_factory=dict)

	@classmethod
	def build(
		cls,
		recordings: Mapping[str, Mapping[str, Optional[float]]],
		errors: Optional[Mapping[str, str]] = None,
	) -> 'EvalReport':
		"""
		Summarize per-recording metric values.

		Raises:
		    InsufficientDataError: If no recording carries any metric.

		"""
		values = {name: {key: row.get(key) for key in METRIC_KEYS} for name, row in recordings.items()}
		summary = {}
		for key in METRIC_KEYS:
			column = [row[key] for row in values.values() if row[key] is not None]
			if column:
				summary[key] = summarize(column)
		if not summary:
			raise InsufficientDataError('no recording could be scored')
		report = cls(dict(sorted(values.items())), summary, dict(errors or {}))
		report.check()
		return report

	def check(self) -> None:
		"""
		Check the ordering and sign of every summary.

		Raises:
		    ValidationError: If a summary is out of order or negative.

		"""
		for key, row in self.summary.items():
			ordered = row.min <= row.q25 <= row.median <= row.q75 <= row.max
			if not ordered or row.min < 0:
				raise ValidationError(f'summary of {key} is inconsistent: {row}')

	def to_dict(self) -> Dict[str, Any]:
		return {
			'recordings': self.recordings,
			'summary': {key: row.to_dict() for key, row in self.summary.items()},
			'errors': self.errors,
		}

	def to_json(self, indent: int = 2) -> str:
		return json.dumps(self.to_dict(), indent=indent, ensure_ascii=False)

	def save_to_file(self, file_path: str) -> str:
		"""Write the JSON report atomically and return its path."""
		atomic_write(file_path, self.to_json() + '\n')
		logger.info(f'Evaluation report saved to {file_path}')
		return file_path

	def table_rows(self) -> List[Dict[str, Any]]:
		rows = []
		for key, label in METRICS:
			row: Dict[str, Any] = {'Metric': label}
			summary = self.summary.get(key)
			for stat, column in zip(STATISTICS, COLUMN_LABELS):
				row[column] = getattr(summary, stat) if summary else None
			rows.append(row)
		return rows

	def to_table(self) -> str:
		"""Render the summaries as an aligned-column text table."""
		return format_table(self.table_rows(), ['Metric', *COLUMN_LABELS])

	def to_frame(self) -> pd.DataFrame:
		"""Per-recording values as a pandas DataFrame indexed by recording."""
		frame = pd.DataFrame.from_dict(self.recordings, orient='index').reindex(columns=list(METRIC_KEYS))
		return frame.astype(float)
