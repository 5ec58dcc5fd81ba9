"""
End-to-end workflow for the ppg-sleep package.

Runs the device stage, the server stage and, where references exist, the
evaluation on each recording in one process. The epoch records are handed
from device to server in memory, at the same precision as in a feature
file, so the outputs match a ``device`` then ``server`` run.
"""

import logging
import os
from typing import Optional

from ppg_sleep.config import PipelineSettings
from ppg_sleep.recordings import (
	optional_path,
	output_paths,
	read_recording,
	read_reference_beats,
	read_reference_resp,
)
from ppg_sleep.signals.codec import write_feature_file
from ppg_sleep.workflows.base import BaseWorkflow, WorkflowResult
from ppg_sleep.workflows.device import DeviceWorkflow
from ppg_sleep.workflows.evaluation import EvaluationWorkflow
from ppg_sleep.workflows.server import ServerWorkflow


class PipelineWorkflow(BaseWorkflow):
	"""
	Workflow chaining device, server and evaluation stages.
	"""

	def __init__(self, settings: PipelineSettings, logger: Optional[logging.Logger] = None):
		super().__init__(settings, logger)
		self.device = DeviceWorkflow(settings)
		self.server = ServerWorkflow(settings)
		self.evaluation = EvaluationWorkflow(settings)

	@property
	def stage(self) -> str:
		return 'run'

	def process(
		self,
		path: str,
		out_dir: str = '.',
		reference_dir: Optional[str] = None,
		channel: Optional[str] = None,
		keep_features: bool = True,
	) -> WorkflowResult:
		"""
		Process one recording CSV end to end.

		Args:
		    path: Recording CSV.
		    out_dir: Directory receiving all outputs.
		    reference_dir: Directory holding ``<name>_ecg.csv`` and
		        ``<name>_resp.csv``; defaults to the recording's directory.
		    channel: PPG channel; the configured one when omitted.
		    keep_features: Whether to also write the feature file.

		Returns:
		    WorkflowResult: Files, stage summaries and, if scored, metrics.

		"""
		recording = read_recording(path, channel or self.settings.channel)
		name = recording.name
		features = self.device.extract(recording)
		output = self.server.analyze(features.records, self.settings.motion_window_s)

		result = self.server.write(name, output, out_dir)
		summary = dict(result.details[name])
		summary['beats'] = len(features.beats)
		summary['corrupted_fraction'] = round(features.mask.corrupted_fraction, 4)
		if keep_features:
			target = output_paths(out_dir, name)['features']
			write_feature_file(target, features.records, self.settings.motion_window_s)
			result.add_output(name, 'features', target)

		refs = output_paths(reference_dir or os.path.dirname(path), name)
		ecg, resp = optional_path(refs['ecg']), optional_path(refs['resp'])
		if ecg or resp:
			summary['metrics'] = self.evaluation.score(
				output.corrected,
				output.br,
				read_reference_beats(ecg) if ecg else None,
				read_reference_resp(resp) if resp else None,
			)
		result.details[name] = summary
		return result
