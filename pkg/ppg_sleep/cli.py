"""
Command-line interface for the ppg-sleep package.

This module provides the ``ppg-sleep`` command with one subcommand per
pipeline stage: ``device``, ``server``, ``eval``, ``synth`` and ``run``.
"""

import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

import click

from ppg_sleep.config import PipelineConfig, PipelineSettings
from ppg_sleep.exceptions import PPGSleepError
from ppg_sleep.schemas import PPG_CHANNELS
from ppg_sleep.utils.helpers import ensure_directory_exists, format_table
from ppg_sleep.workflows import (
	DeviceWorkflow,
	EvaluationWorkflow,
	PipelineWorkflow,
	ServerWorkflow,
	SynthesisWorkflow,
	WorkflowResult,
)
from ppg_sleep.workflows.synthesis import PRESETS

REPORT_FILE = 'report.json'
RECORDINGS_FILE = 'report_recordings.csv'


def configure_logging(verbosity: int) -> None:
	"""
	Configure logging based on verbosity level.

	Args:
	    verbosity: The verbosity level (0-3).

	"""
	log_levels = {
		0: logging.WARNING,
		1: logging.INFO,
		2: logging.DEBUG,
		3: logging.DEBUG,
	}

	log_format = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
	if verbosity >= 3:
		log_format = '%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s'

	logging.basicConfig(
		level=log_levels.get(verbosity, logging.DEBUG), format=log_format
	)


def output_json(data: Any, pretty: bool = False) -> None:
	"""
	Output data as JSON.

	Args:
	    data: The data to output.
	    pretty: Whether to pretty-print the JSON.

	"""
	indent = 2 if pretty else None
	click.echo(json.dumps(data, indent=indent, default=str, ensure_ascii=False))


def output_table(data: List[Dict[str, Any]], fields: Optional[List[str]] = None) -> None:
	"""
	Output data as a table.

	Args:
	    data: The data to output.
	    fields: The fields to include in the table.

	"""
	click.echo(format_table(data, fields))


def output_result(result: WorkflowResult, output: str) -> None:
	"""Print a workflow result in the requested format."""
	if output == 'json':
		output_json(result.to_dict())
	elif output == 'table':
		rows = [{'recording': name, **summary} for name, summary in result.details.items()]
		output_table([{k: v for k, v in row.items() if k != 'metrics'} for row in rows])
	else:
		output_json(result.to_dict(), pretty=True)


def finish(result: WorkflowResult) -> None:
	"""Report failed recordings and exit with the code of the first failure."""
	for error in result.errors:
		click.echo(f"Error: {error['message']}: {error.get('exception', '')}", err=True)
	if not result.success:
		sys.exit(result.exit_code)


def load_settings(config_file: Optional[str], profile: str) -> PipelineSettings:
	return PipelineConfig(config_file=config_file, profile=profile).settings


# Define common options
def common_options(func):
	"""Decorator to add common options to commands."""
	func = click.option(
		'--config', '--config-file', '-c', 'config_file', help='Path to the configuration file.'
	)(func)
	func = click.option(
		'--profile',
		'-p',
		default='default',
		help='Profile to use from the configuration file.',
	)(func)
	func = click.option(
		'--verbose',
		'-v',
		count=True,
		help='Increase verbosity (can be used multiple times).',
	)(func)
	func = click.option(
		'--output',
		'-o',
		type=click.Choice(['json', 'table', 'pretty']),
		default='pretty',
		help='Output format.',
	)(func)
	return func


def batch_options(func):
	"""Decorator to add output directory and concurrency options."""
	func = click.option(
		'--out-dir', default='.', show_default=True, help='Directory receiving the outputs.'
	)(func)
	func = click.option(
		'--jobs', '-j', default=1, show_default=True, type=click.IntRange(min=1),
		help='Recordings processed concurrently.',
	)(func)
	return func


channel_option = click.option(
	'--channel',
	type=click.Choice(sorted(PPG_CHANNELS)),
	help='PPG channel used for beat detection (default from configuration).',
)


# Define the CLI
@click.group()
@click.version_option(package_name='ppg-sleep')
def cli():
	"""
	ppg-sleep - Heart rate and breathing rate from wrist PPG during sleep.

	Splits processing into a device stage (motion and beat detection) and a
	server stage (interval correction, heart rate, breathing rate), and
	scores the results against ECG and respiration references.
	"""


@cli.command('device')
@click.argument('inputs', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@channel_option
@batch_options
@common_options
def device(inputs, channel, out_dir, jobs, config_file, profile, verbose, output):
	"""Turn recording CSVs into feature files (.ftr)."""
	configure_logging(verbose)

	try:
		workflow = DeviceWorkflow(load_settings(config_file, profile))
		ensure_directory_exists(out_dir)
		result = workflow.execute(
			list(inputs), jobs=jobs, progress=verbose > 0, out_dir=out_dir, channel=channel
		)
		output_result(result, output)
		finish(result)

	except PPGSleepError as e:
		click.echo(f'Error: {e!s}', err=True)
		sys.exit(e.exit_code)


@cli.command('server')
@click.argument('inputs', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@batch_options
@common_options
def server(inputs, out_dir, jobs, config_file, profile, verbose, output):
	"""Turn feature files into heart rate and breathing rate CSVs."""
	configure_logging(verbose)

	try:
		workflow = ServerWorkflow(load_settings(config_file, profile))
		ensure_directory_exists(out_dir)
		result = workflow.execute(list(inputs), jobs=jobs, progress=verbose > 0, out_dir=out_dir)
		output_result(result, output)
		finish(result)

	except PPGSleepError as e:
		click.echo(f'Error: {e!s}', err=True)
		sys.exit(e.exit_code)


def emit_report(result: WorkflowResult, out_dir: str, output: str) -> None:
	"""Build, save and print the evaluation report of a batch."""
	report = EvaluationWorkflow.report(result)
	ensure_directory_exists(out_dir)
	report.save_to_file(os.path.join(out_dir, REPORT_FILE))
	report.to_frame().to_csv(os.path.join(out_dir, RECORDINGS_FILE), index_label='recording')
	if output == 'json':
		output_json(report.to_dict())
	elif output == 'table':
		click.echo(report.to_table())
	else:
		output_json(report.to_dict(), pretty=True)


@cli.command('eval')
@click.argument('inputs', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option(
	'--reference-dir',
	type=click.Path(exists=True, file_okay=False),
	help='Directory with <name>_ecg.csv and <name>_resp.csv (default: next to each output).',
)
@batch_options
@common_options
def evaluate(inputs, reference_dir, out_dir, jobs, config_file, profile, verbose, output):
	"""Score <name>_output.csv files against references."""
	configure_logging(verbose)

	try:
		workflow = EvaluationWorkflow(load_settings(config_file, profile))
		result = workflow.execute(
			list(inputs), jobs=jobs, progress=verbose > 0, reference_dir=reference_dir
		)
		if result.details:
			emit_report(result, out_dir, output)
		finish(result)

	except PPGSleepError as e:
		click.echo(f'Error: {e!s}', err=True)
		sys.exit(e.exit_code)


@cli.command('synth')
@click.argument('names', nargs=-1)
@click.option('--preset', type=click.Choice(PRESETS), default='clean', show_default=True)
@click.option('--duration', type=float, default=8 * 3600.0, show_default=True, help='Seconds.')
@click.option('--seed', type=int, help='Base random seed.')
@click.option('--hr', 'hr_base', type=float, help='Mean heart rate, beats per minute.')
@click.option('--breathing-rate', type=float, help='Breathing rate, breaths per minute.')
@click.option('--rsa-depth', type=float, help='Relative heart rate modulation depth.')
@click.option('--noise', 'ppg_noise_std', type=float, help='PPG white noise standard deviation.')
@click.option('--jitter-ms', type=float, help='Beat jitter standard deviation in ms.')
@batch_options
@common_options
def synth(
	names,
	preset,
	duration,
	seed,
	hr_base,
	breathing_rate,
	rsa_depth,
	ppg_noise_std,
	jitter_ms,
	out_dir,
	jobs,
	config_file,
	profile,
	verbose,
	output,
):
	"""Write synthetic recordings with references and ground truth."""
	configure_logging(verbose)

	overrides = {
		'hr_base': hr_base,
		'rsa_freq': None if breathing_rate is None else breathing_rate / 60.0,
		'rsa_depth': rsa_depth,
		'ppg_noise_std': ppg_noise_std,
		'jitter_std_s': None if jitter_ms is None else jitter_ms / 1000.0,
	}
	overrides = {key: value for key, value in overrides.items() if value is not None}

	try:
		workflow = SynthesisWorkflow(load_settings(config_file, profile))
		ensure_directory_exists(out_dir)
		result = workflow.execute(
			list(names) or ['synthetic'],
			jobs=jobs,
			progress=verbose > 0,
			out_dir=out_dir,
			preset=preset,
			duration=duration,
			seed=seed,
			overrides=overrides,
		)
		output_result(result, output)
		finish(result)

	except PPGSleepError as e:
		click.echo(f'Error: {e!s}', err=True)
		sys.exit(e.exit_code)


@cli.command('run')
@click.argument('inputs', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option(
	'--reference-dir',
	type=click.Path(exists=True, file_okay=False),
	help='Directory with <name>_ecg.csv and <name>_resp.csv (default: next to each recording).',
)
@channel_option
@batch_options
@common_options
def run(inputs, reference_dir, channel, out_dir, jobs, config_file, profile, verbose, output):
	"""Run every stage on recording CSVs and score them where references exist."""
	configure_logging(verbose)

	try:
		workflow = PipelineWorkflow(load_settings(config_file, profile))
		ensure_directory_exists(out_dir)
		result = workflow.execute(
			list(inputs),
			jobs=jobs,
			progress=verbose > 0,
			out_dir=out_dir,
			reference_dir=reference_dir,
			channel=channel,
		)
		if any('metrics' in summary for summary in result.details.values()):
			emit_report(result, out_dir, output)
		else:
			output_result(result, output)
		finish(result)

	except PPGSleepError as e:
		click.echo(f'Error: {e!s}', err=True)
		sys.exit(e.exit_code)


@cli.command('profiles')
@common_options
def profiles(config_file, profile, verbose, output):
	"""List profiles and show the resolved settings of the selected one."""
	configure_logging(verbose)

	try:
		config = PipelineConfig(config_file=config_file, profile=profile)
		data = {'profiles': config.get_available_profiles(), 'settings': config.settings.to_dict()}

		if output == 'json':
			output_json(data)
		elif output == 'table':
			output_table(
				[{'setting': key, 'value': value} for key, value in data['settings'].items()],
				['setting', 'value'],
			)
		else:
			output_json(data, pretty=True)

	except PPGSleepError as e:
		click.echo(f'Error: {e!s}', err=True)
		sys.exit(e.exit_code)


# Entry point
def main():
	"""Entry point for the CLI."""
	try:
		cli()
	except Exception as e:
		click.echo(f'Error: {e!s}', err=True)
		sys.exit(1)


if __name__ == '__main__':
	main()
