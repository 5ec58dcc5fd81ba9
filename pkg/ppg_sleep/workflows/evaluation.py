"""
Evaluation workflow for the ppg-sleep package.

This module scores pipeline outputs against ECG beat and respiration
references and collects the per-recording metrics into an EvalReport.
"""

import os
from typing import Dict, Optional

from ppg_sleep.evaluation.alignment import default_band_width
from ppg_sleep.evaluation.report import EvalReport
from ppg_sleep.evaluation.scoring import evaluate_br, evaluate_hr, evaluate_rr, reference_exclusions
from ppg_sleep.exceptions import InsufficientDataError
from ppg_sleep.recordings import (
	optional_path,
	output_paths,
	read_bbi,
	read_output,
	read_reference_beats,
	read_reference_resp,
)
from ppg_sleep.signals.beats import beats_to_intervals
from ppg_sleep.signals.core import BBISeries, BeatSeries, TimedSeries
from ppg_sleep.utils.helpers import recording_name
from ppg_sleep.workflows.base import BaseWorkflow, WorkflowResult


class EvaluationWorkflow(BaseWorkflow):
	"""
	Workflow scoring outputs against references.
	"""

	def score(
		self,
		test_bbi: BBISeries,
		br: Optional[TimedSeries],
		ref_beats: Optional[BeatSeries],
		ref_resp: Optional[TimedSeries],
	) -> Dict[str, Optional[float]]:
		"""
		Compute every metric a recording has references for.

		Args:
		    test_bbi: Corrected intervals of the pipeline.
		    br: Breathing-rate estimate of the pipeline.
		    ref_beats: ECG reference beats, if any.
		    ref_resp: Respiration-rate reference, if any.

		Returns:
		    Dict: Metric key to value; None where no reference exists.

		Raises:
		    InsufficientDataError: If neither reference is given, or a given
		        reference does not overlap the estimate.

		"""
		if ref_beats is None and ref_resp is None:
			raise InsufficientDataError('no reference to score against')
		s = self.settings
		metrics: Dict[str, Optional[float]] = dict.fromkeys(
			('rr_mae_ms', 'rr_mape_pct', 'hr_mae_bpm', 'hr_mape_pct', 'br_mae_min', 'br_mape_pct')
		)

		if ref_beats is not None:
			ref_bbi = beats_to_intervals(ref_beats)
			exclusions = reference_exclusions(
				ref_bbi, s.ref_max_gap_s, s.plausible_min_ms, s.plausible_max_ms
			)
			band = default_band_width(len(test_bbi), len(ref_bbi), s.dtw_band_min, s.dtw_band_fraction)
			rr = evaluate_rr(test_bbi, ref_bbi, exclusions, band)
			hr = evaluate_hr(rr, s.hr_window_beats)
			metrics.update(
				rr_mae_ms=rr.mae, rr_mape_pct=rr.mape_pct, hr_mae_bpm=hr.mae, hr_mape_pct=hr.mape_pct
			)

		if ref_resp is not None and br is not None:
			score = evaluate_br(br, ref_resp)
			metrics.update(br_mae_min=score.mae, br_mape_pct=score.mape_pct)
		return metrics

	def process(self, path: str, reference_dir: Optional[str] = None) -> WorkflowResult:
		"""
		Score one ``<name>_output.csv`` file.

		The corrected intervals are read from ``<name>_bbi.csv`` next to it;
		references are looked up as ``<name>_ecg.csv`` and ``<name>_resp.csv``
		in ``reference_dir`` (default: the directory of the output file).

		Returns:
		    WorkflowResult: The metrics under ``details[name]['metrics']``.

		"""
		name = recording_name(path)
		here = output_paths(os.path.dirname(path), name)
		refs = output_paths(reference_dir or os.path.dirname(path), name)

		_, br = read_output(path)
		test_bbi = read_bbi(here['bbi'])
		ecg = optional_path(refs['ecg'])
		resp = optional_path(refs['resp'])
		metrics = self.score(
			test_bbi,
			br if len(br) else None,
			read_reference_beats(ecg) if ecg else None,
			read_reference_resp(resp) if resp else None,
		)
		result = WorkflowResult()
		result.details[name] = {'metrics': metrics}
		self.logger.info(f'{name}: {metrics}')
		return result

	@staticmethod
	def report(result: WorkflowResult) -> EvalReport:
		"""
		Collect the metrics of a batch into a report.

		Raises:
		    InsufficientDataError: If no recording was scored.

		"""
		per_recording = {
			name: detail['metrics'] for name, detail in result.details.items() if 'metrics' in detail
		}
		errors = {
			e.get('recording', '?'): e.get('exception', e['message']) for e in result.errors
		}
		return EvalReport.build(per_recording, errors)
