"""
Workflows package for the ppg-sleep package.

This package contains one workflow per pipeline stage plus the end-to-end
workflow chaining them.
"""

from ppg_sleep.workflows.base import BaseWorkflow, WorkflowResult
from ppg_sleep.workflows.device import DeviceWorkflow
from ppg_sleep.workflows.evaluation import EvaluationWorkflow
from ppg_sleep.workflows.pipeline import PipelineWorkflow
from ppg_sleep.workflows.server import ServerWorkflow
from ppg_sleep.workflows.synthesis import SynthesisWorkflow

__all__ = [
	'BaseWorkflow',
	'DeviceWorkflow',
	'EvaluationWorkflow',
	'PipelineWorkflow',
	'ServerWorkflow',
	'SynthesisWorkflow',
	'WorkflowResult',
]
