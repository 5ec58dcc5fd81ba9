"""
Base workflow module for the ppg-sleep package.

This module provides the result container and base class shared by the
pipeline stages, plus the batch runner that processes several recordings
concurrently with per-recording isolation.
"""

import json
import logging
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

from tqdm import tqdm

from ppg_sleep.config import PipelineSettings
from ppg_sleep.exceptions import PPGSleepError
from ppg_sleep.utils.helpers import atomic_write, recording_name


@dataclass
class WorkflowResult:
	"""
	Data class for storing workflow execution results.

	Attributes:
	    success: Whether every recording was processed.
	    message: A message describing the result.
	    details: Per-recording summaries (counts, metrics).
	    outputs: Files written, keyed by recording then by file kind.
	    errors: Failures, one entry per failed recording or step.

	"""

	success: bool = True
	message: str = ''
	details: Dict[str, Any] = field(default_factory=dict)
	outputs: Dict[str, Dict[str, str]] = field(default_factory=dict)
	errors: List[Dict[str, Any]] = field(default_factory=list)

	def add_error(
		self,
		message: str,
		error: Optional[Exception] = None,
		recording: Optional[str] = None,
	) -> None:
		"""
		Add an error to the workflow result.

		Args:
		    message: Error message.
		    error: Optional exception that caused the error.
		    recording: Optional name of the recording that failed.

		"""
		error_info: Dict[str, Any] = {'message': message, 'timestamp': time.time()}

		if error:
			error_info['exception'] = str(error)
			error_info['exception_type'] = error.__class__.__name__
			error_info['exit_code'] = getattr(error, 'exit_code', 1)

		if recording:
			error_info['recording'] = recording

		self.errors.append(error_info)
		self.success = False

	def add_output(self, recording: str, kind: str, path: str) -> None:
		"""Record a file written for a recording."""
		self.outputs.setdefault(recording, {})[kind] = path

	@property
	def exit_code(self) -> int:
		"""Exit code of the first failure, 0 on success."""
		if self.success:
			return 0
		for error in self.errors:
			if 'exit_code' in error:
				return error['exit_code']
		return 1

	def merge(self, other: 'WorkflowResult') -> 'WorkflowResult':
		"""
		Merge another workflow result into this one.

		Args:
		    other: The other workflow result to merge.

		Returns:
		    WorkflowResult: The merged workflow result.

		"""
		if not other.success:
			self.success = False

		if self.message and other.message:
			self.message = f'{self.message}; {other.message}'
		elif other.message:
			self.message = other.message

		self.details.update(other.details)
		for recording, files in other.outputs.items():
			self.outputs.setdefault(recording, {}).update(files)
		self.errors.extend(other.errors)
		return self

	def to_dict(self) -> Dict[str, Any]:
		return {
			'success': self.success,
			'message': self.message,
			'details': self.details,
			'outputs': self.outputs,
			'errors': self.errors,
		}

	def to_json(self, pretty: bool = False) -> str:
		"""
		Convert the workflow result to a JSON string.

		Args:
		    pretty: Whether to format the JSON with indentation.

		Returns:
		    str: The workflow result as a JSON string.

		"""
		indent = 2 if pretty else None
		return json.dumps(self.to_dict(), indent=indent, default=str)

	def save_to_file(self, file_path: str, pretty: bool = True) -> str:
		"""Save the workflow result as JSON, atomically."""
		return atomic_write(file_path, self.to_json(pretty=pretty))


class BaseWorkflow(ABC):
	"""
	Base class for the pipeline stages.

	Subclasses implement ``process`` for one recording; ``execute`` runs it
	over a batch, isolating failures so that one bad recording does not stop
	the others.
	"""

	def __init__(self, settings: PipelineSettings, logger: Optional[logging.Logger] = None):
		"""
		Initialize the workflow.

		Args:
		    settings: Resolved pipeline settings.
		    logger: Optional logger to use for logging.

		"""
		self.settings = settings
		self.logger = logger or logging.getLogger(self.__class__.__name__)

	def execute_safely(
		self,
		operation: Callable,
		error_message: str,
		recording: Optional[str] = None,
		result: Optional[WorkflowResult] = None,
		**kwargs,
	) -> WorkflowResult:
		"""
		Execute an operation safely, handling any errors.

		Args:
		    operation: The operation to execute.
		    error_message: The error message to use if the operation fails.
		    recording: Optional name of the recording being processed.
		    result: Optional workflow result to update with the execution result.
		    **kwargs: Additional arguments to pass to the operation.

		Returns:
		    WorkflowResult: The execution result.

		"""
		if result is None:
			result = WorkflowResult()

		try:
			operation_result = operation(**kwargs)

			if isinstance(operation_result, WorkflowResult):
				result.merge(operation_result)
			elif isinstance(operation_result, dict) and recording:
				result.details[recording] = operation_result

			return result

		except PPGSleepError as e:
			self.logger.error(f'{error_message}: {e!s}')
			result.add_error(error_message, e, recording)
			return result

		except Exception as e:
			self.logger.exception(f'Unexpected error during {error_message}')
			result.add_error(f'Unexpected error during {error_message}', e, recording)
			return result

	def execute(
		self,
		inputs: Sequence[str],
		jobs: int = 1,
		progress: bool = False,
		**kwargs,
	) -> WorkflowResult:
		"""
		Process several inputs, optionally on a thread pool.

		Args:
		    inputs: Input file paths, one per recording.
		    jobs: Number of worker threads.
		    progress: Whether to show a progress bar.
		    **kwargs: Passed to ``process`` for every input.

		Returns:
		    WorkflowResult: The merged per-recording results, in input order.

		"""

		def run(path: str) -> WorkflowResult:
			return self.execute_safely(
				self.process,
				f'{self.stage} failed for {path}',
				recording=self.recording_of(path),
				path=path,
				**kwargs,
			)

		bar = tqdm(total=len(inputs), desc=self.stage, unit='rec', disable=not progress)
		results: List[WorkflowResult] = []
		with bar:
			if jobs <= 1 or len(inputs) <= 1:
				for path in inputs:
					results.append(run(path))
					bar.update()
			else:
				with ThreadPoolExecutor(max_workers=jobs) as pool:
					for item in pool.map(run, inputs):
						results.append(item)
						bar.update()

		merged = WorkflowResult()
		for item in results:
			merged.merge(item)
		failed = len({e.get('recording') for e in merged.errors})
		merged.message = f'{self.stage}: {len(inputs) - failed} of {len(inputs)} recordings processed'
		self.logger.info(merged.message)
		return merged

	@property
	def stage(self) -> str:
		return self.__class__.__name__.removesuffix('Workflow').lower()

	def recording_of(self, path: str) -> str:
		return recording_name(path)

	@abstractmethod
	def process(self, path: str, **kwargs) -> WorkflowResult:
		"""
		Process one recording.

		This method must be implemented by all workflow classes.

		Returns:
		    WorkflowResult: The result for this recording.

		"""
