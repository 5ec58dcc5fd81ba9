"""
Server-stage workflow for the ppg-sleep package.

This module rebuilds the motion mask from transmitted motion powers, flags
and corrects the intervals, and derives heart rate and breathing rate.
"""

from dataclasses import dataclass
from typing import Dict, Sequence

from ppg_sleep.recordings import output_paths, write_bbi, write_output
from ppg_sleep.signals.cardio import correct_intervals, flag_intervals, heart_rate
from ppg_sleep.signals.codec import read_feature_file
from ppg_sleep.signals.core import BBIFlag, BBISeries, FeatureRecord, TimedSeries
from ppg_sleep.signals.epochs import unpack_epochs
from ppg_sleep.signals.motion import motion_mask
from ppg_sleep.signals.respiration import RespirationParams, breathing_pipeline
from ppg_sleep.utils.helpers import recording_name
from ppg_sleep.workflows.base import BaseWorkflow, WorkflowResult


@dataclass(frozen=True)
class ServerOutput:
	"""Server-stage results for one recording."""

	flagged: BBISeries
	corrected: BBISeries
	hr: TimedSeries
	br: TimedSeries

	def summary(self) -> Dict[str, float]:
		flags = self.flagged.flags
		return {
			'intervals': len(self.flagged),
			'motion': int((flags == BBIFlag.MOTION).sum()),
			'implausible': int((flags == BBIFlag.IMPLAUSIBLE).sum()),
			'interpolated': int((self.corrected.flags == BBIFlag.INTERPOLATED).sum()),
			'hr_samples': len(self.hr),
			'br_samples': len(self.br),
		}


class ServerWorkflow(BaseWorkflow):
	"""
	Workflow turning feature files into heart and breathing rate.
	"""

	def analyze(self, records: Sequence[FeatureRecord], motion_window_s: float) -> ServerOutput:
		"""
		Run the server chain on decoded epoch records.

		Args:
		    records: Epoch records as produced by the device stage.
		    motion_window_s: Motion window length of the records.

		Returns:
		    ServerOutput: Flagged and corrected intervals, heart rate, breathing rate.

		Raises:
		    InsufficientDataError: If the records cover too little time.

		"""
		s = self.settings
		features = unpack_epochs(records, motion_window_s)
		mask = motion_mask(features.powers, s.motion_threshold_g2)
		flagged = flag_intervals(
			features.bbi,
			mask,
			s.plausible_min_ms,
			s.plausible_max_ms,
			s.median_jump_ratio,
			s.median_history,
			s.max_consecutive_rejects,
		)
		corrected = correct_intervals(flagged, s.low_confidence_gap_s)
		hr = heart_rate(corrected, s.hr_window_beats)
		br = breathing_pipeline(corrected, RespirationParams.from_settings(s))
		return ServerOutput(flagged, corrected, hr, br)

	def write(self, name: str, output: ServerOutput, out_dir: str) -> WorkflowResult:
		"""Write the rate CSV and the corrected-interval CSV of a recording."""
		paths = output_paths(out_dir, name)
		result = WorkflowResult()
		result.add_output(name, 'output', write_output(paths['output'], output.hr, output.br))
		result.add_output(name, 'bbi', write_bbi(paths['bbi'], output.corrected))
		result.details[name] = output.summary()
		self.logger.info(f'{name}: wrote {paths["output"]}')
		return result

	def process(self, path: str, out_dir: str = '.') -> WorkflowResult:
		"""
		Decode a feature file and write its outputs.

		Args:
		    path: Feature file written by the device stage.
		    out_dir: Directory receiving ``<name>_output.csv`` and ``<name>_bbi.csv``.

		Returns:
		    WorkflowResult: Counts and the written files.

		"""
		stream = read_feature_file(path)
		output = self.analyze(stream.records, stream.motion_window_s)
		return self.write(recording_name(path), output, out_dir)
