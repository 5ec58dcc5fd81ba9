"""
Synthesis workflow for the ppg-sleep package.

This module writes synthetic nights as a bundle of CSV files in the same
formats as real recordings: the raw recording, an ECG beat reference, a
respiration reference and the ground truth.
"""

import zlib
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ppg_sleep.exceptions import InvalidParamError
from ppg_sleep.recordings import (
	output_paths,
	write_recording,
	write_reference_beats,
	write_reference_resp,
	write_truth,
)
from ppg_sleep.signals.core import BeatSeries
from ppg_sleep.signals.synth import SyntheticRecording, synthesize_recording
from ppg_sleep.utils.helpers import recording_name
from ppg_sleep.workflows.base import BaseWorkflow, WorkflowResult

# Relative amplitude of the infra-red channel written next to the green one.
IR_SCALE = 0.6


def _rsa_step_schedule(duration: float) -> List[Tuple[float, float]]:
	# 12, 15 and 20 breaths per minute in equal thirds.
	return [(0.0, 0.2), (duration / 3, 0.25), (2 * duration / 3, 1 / 3)]


def _motion_bursts(duration: float) -> List[Tuple[float, float, float]]:
	# A 30 s movement of 0.2 g ten minutes into every half hour.
	starts = np.arange(600.0, duration - 30.0, 1800.0)
	return [(float(start), float(start) + 30.0, 0.2) for start in starts]


def preset_parameters(preset: str, duration: float) -> Dict[str, Any]:
	"""
	Generator parameters of a named scenario.

	Args:
	    preset: ``clean``, ``rsa-step`` or ``motion``.
	    duration: Length of the night in seconds.

	Returns:
	    Dict: Keyword arguments for synthesize_recording.

	Raises:
	    InvalidParamError: For an unknown preset.

	"""
	if preset == 'clean':
		return {'hr_base': 60.0, 'rsa_freq': 0.25, 'rsa_depth': 0.05}
	if preset == 'rsa-step':
		return {'hr_base': 60.0, 'rsa_freq': _rsa_step_schedule(duration), 'rsa_depth': 0.05}
	if preset == 'motion':
		return {
			'hr_base': 60.0,
			'rsa_freq': 0.25,
			'rsa_depth': 0.05,
			'ppg_noise_std': 0.02,
			'bursts': _motion_bursts(duration),
			'artifact_gain': 2.0,
		}
	raise InvalidParamError(f'unknown synthesis preset {preset!r}')


PRESETS = ('clean', 'rsa-step', 'motion')


def recording_seed(seed: Optional[int], name: str) -> Optional[int]:
	"""Seed of one named recording, independent of batch order."""
	if seed is None:
		return None
	state = np.random.SeedSequence([seed, zlib.crc32(name.encode('utf-8'))]).generate_state(1)
	return int(state[0])


class SynthesisWorkflow(BaseWorkflow):
	"""
	Workflow writing synthetic recordings with their references.
	"""

	def write_bundle(self, name: str, synthetic: SyntheticRecording, out_dir: str) -> WorkflowResult:
		"""Write the recording, reference and truth CSVs of one synthetic night."""
		paths = output_paths(out_dir, name)
		truth = synthetic.truth
		ref_beats = BeatSeries(np.append(truth.true_bbi.onset_times, truth.true_bbi.end_times[-1:]))

		result = WorkflowResult()
		result.add_output(
			name,
			'recording',
			write_recording(
				paths['recording'],
				synthetic.ppg,
				synthetic.ppg.with_values(IR_SCALE * synthetic.ppg.values),
				(synthetic.acc_x, synthetic.acc_y, synthetic.acc_z),
			),
		)
		result.add_output(name, 'ecg', write_reference_beats(paths['ecg'], ref_beats))
		result.add_output(name, 'resp', write_reference_resp(paths['resp'], truth.true_br))
		result.add_output(name, 'truth', write_truth(paths['truth'], truth.true_bbi, truth.true_br))
		result.details[name] = {'beats': len(truth.beats), 'duration_s': synthetic.ppg.duration}
		return result

	def process(
		self,
		path: str,
		out_dir: str = '.',
		preset: str = 'clean',
		duration: float = 8 * 3600.0,
		seed: Optional[int] = None,
		overrides: Optional[Dict[str, Any]] = None,
	) -> WorkflowResult:
		"""
		Generate and write one synthetic night.

		Args:
		    path: Recording name (a path's directory and extension are ignored).
		    out_dir: Directory receiving the CSV bundle.
		    preset: Scenario name.
		    duration: Length in seconds.
		    seed: Base seed; each recording name derives its own.
		    overrides: Generator parameters replacing the preset's.

		Returns:
		    WorkflowResult: The written files.

		"""
		name = recording_name(path)
		params = {**preset_parameters(preset, duration), **(overrides or {})}
		synthetic = synthesize_recording(duration, seed=recording_seed(seed, name), **params)
		self.logger.info(f'{name}: synthesized {preset} night of {duration:.0f} s')
		return self.write_bundle(name, synthetic, out_dir)
