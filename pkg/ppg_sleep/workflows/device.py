"""
Device-stage workflow for the ppg-sleep package.

This module runs the processing that fits on the wearable: motion power
estimation, beat detection and interval extraction, packed into epoch
records for transmission.
"""

from dataclasses import dataclass
from typing import List, Optional

from ppg_sleep.recordings import Recording, output_paths, read_recording
from ppg_sleep.signals.beats import beats_to_intervals, detect_beats
from ppg_sleep.signals.codec import write_feature_file
from ppg_sleep.signals.core import BBISeries, BeatSeries, FeatureRecord, UniformSeries
from ppg_sleep.signals.epochs import pack_epochs
from ppg_sleep.signals.motion import MotionMask, accel_norm, motion_mask, motion_power, remove_gravity
from ppg_sleep.workflows.base import BaseWorkflow, WorkflowResult


@dataclass(frozen=True)
class DeviceFeatures:
	"""Everything the device stage computes for one recording."""

	powers: UniformSeries
	mask: MotionMask
	beats: BeatSeries
	bbi: BBISeries
	records: List[FeatureRecord]


class DeviceWorkflow(BaseWorkflow):
	"""
	Workflow turning raw recordings into feature files.
	"""

	def extract(self, recording: Recording) -> DeviceFeatures:
		"""
		Compute device features for a recording held in memory.

		Args:
		    recording: Raw PPG and acceleration.

		Returns:
		    DeviceFeatures: Motion powers, beats, intervals and epoch records.

		"""
		s = self.settings
		norm = accel_norm(recording.acc_x, recording.acc_y, recording.acc_z)
		powers = motion_power(remove_gravity(norm, s.gravity_window_s), s.motion_window_s)
		mask = motion_mask(powers, s.motion_threshold_g2)
		if mask.corrupted_fraction > 0.5:
			self.logger.warning(
				f'{recording.name}: {mask.corrupted_fraction:.0%} of motion windows are corrupted'
			)
		beats = detect_beats(
			recording.ppg,
			mask,
			s.refractory_s,
			s.amplitude_floor_ratio,
			s.amplitude_history,
			s.beat_smoothing_s,
			s.plausible_max_ms / 1000.0,
		)
		bbi = beats_to_intervals(beats)
		records = pack_epochs(bbi, powers, s.epoch_s)
		return DeviceFeatures(powers, mask, beats, bbi, records)

	def process(
		self,
		path: str,
		out_dir: str = '.',
		channel: Optional[str] = None,
	) -> WorkflowResult:
		"""
		Read a recording CSV and write its feature file.

		Args:
		    path: Recording CSV.
		    out_dir: Directory receiving ``<name>.ftr``.
		    channel: PPG channel; the configured one when omitted.

		Returns:
		    WorkflowResult: Counts and the written file.

		"""
		recording = read_recording(path, channel or self.settings.channel)
		features = self.extract(recording)
		target = output_paths(out_dir, recording.name)['features']
		write_feature_file(target, features.records, self.settings.motion_window_s)

		result = WorkflowResult()
		result.add_output(recording.name, 'features', target)
		result.details[recording.name] = {
			'beats': len(features.beats),
			'intervals': len(features.bbi),
			'epochs': len(features.records),
			'corrupted_fraction': round(features.mask.corrupted_fraction, 4),
		}
		self.logger.info(f'{recording.name}: wrote {len(features.records)} epochs to {target}')
		return result
