import json
import os
import time

import numpy as np
import pytest

from ppg_sleep.evaluation.scoring import evaluate_rr
from ppg_sleep.exceptions import InsufficientDataError, InvalidParamError, SchemaError
from ppg_sleep.recordings import Recording, read_bbi, read_output
from ppg_sleep.signals.synth import synthesize_recording
from ppg_sleep.workflows import (
	DeviceWorkflow,
	EvaluationWorkflow,
	PipelineWorkflow,
	ServerWorkflow,
	SynthesisWorkflow,
	WorkflowResult,
)
from ppg_sleep.workflows.synthesis import PRESETS, preset_parameters, recording_seed


def read_bytes(path):
	with open(path, 'rb') as f:
		return f.read()


def test_workflow_result_exit_codes():
	result = WorkflowResult()
	assert result.exit_code == 0
	result.add_error('scoring failed', InsufficientDataError('too short'), 'night1')
	result.add_error('reading failed', SchemaError('no rows'), 'night2')
	assert not result.success
	assert result.exit_code == 6
	assert result.errors[0]['recording'] == 'night1'
	plain = WorkflowResult()
	plain.add_error('boom')
	assert plain.exit_code == 1


def test_workflow_result_merge(tmp_path):
	first = WorkflowResult(message='device done')
	first.add_output('night1', 'features', 'night1.ftr')
	second = WorkflowResult(message='server done', details={'night1': {'beats': 10}})
	second.add_output('night1', 'output', 'night1_output.csv')
	merged = first.merge(second)
	assert merged.message == 'device done; server done'
	assert merged.outputs == {'night1': {'features': 'night1.ftr', 'output': 'night1_output.csv'}}
	path = merged.save_to_file(str(tmp_path / 'result.json'))
	with open(path) as f:
		assert json.load(f)['details'] == {'night1': {'beats': 10}}


def test_execute_isolates_failures(tmp_path, night_dir, settings):
	bad = tmp_path / 'broken.csv'
	bad.write_text('t_s,ppg_green,ppg_ir,acc_x_g,acc_y_g,acc_z_g\n')
	inputs = [str(night_dir / 'night.csv'), str(bad)]
	result = DeviceWorkflow(settings).execute(inputs, jobs=2, out_dir=str(tmp_path))
	assert not result.success
	assert result.exit_code == SchemaError.exit_code
	assert [e['recording'] for e in result.errors] == ['broken']
	assert os.path.exists(result.outputs['night']['features'])
	assert result.message == 'device: 1 of 2 recordings processed'


def test_device_then_server_matches_single_run(tmp_path, night_dir, settings):
	split, joined = tmp_path / 'split', tmp_path / 'joined'
	recording = str(night_dir / 'night.csv')
	device = DeviceWorkflow(settings).execute([recording], out_dir=str(split))
	assert device.success
	assert device.details['night']['epochs'] == 7
	server = ServerWorkflow(settings).execute([device.outputs['night']['features']], out_dir=str(split))
	assert server.success

	run = PipelineWorkflow(settings).execute([recording], out_dir=str(joined))
	assert run.success
	for kind in ('features', 'output', 'bbi'):
		assert read_bytes(run.outputs['night'][kind]) == read_bytes(
			{**device.outputs['night'], **server.outputs['night']}[kind]
		)


def test_server_run_is_deterministic(tmp_path, night_dir, settings):
	DeviceWorkflow(settings).process(str(night_dir / 'night.csv'), out_dir=str(tmp_path))
	features = str(tmp_path / 'night.ftr')
	first = ServerWorkflow(settings).process(features, out_dir=str(tmp_path / 'a'))
	second = ServerWorkflow(settings).process(features, out_dir=str(tmp_path / 'b'))
	assert read_bytes(first.outputs['night']['output']) == read_bytes(second.outputs['night']['output'])
	assert first.details == second.details


def test_pipeline_outputs_on_clean_night(tmp_path, night_dir, settings):
	result = PipelineWorkflow(settings).process(str(night_dir / 'night.csv'), out_dir=str(tmp_path))
	summary = result.details['night']
	assert summary['corrupted_fraction'] == 0.0
	assert summary['implausible'] <= 2
	hr, br = read_output(result.outputs['night']['output'])
	assert np.all((hr.values > 50.0) & (hr.values < 70.0))
	assert np.all((br.values >= 6.0) & (br.values <= 30.0))
	assert len(read_bbi(result.outputs['night']['bbi'])) > 400
	metrics = summary['metrics']
	assert metrics['rr_mae_ms'] <= 15.0
	assert metrics['hr_mae_bpm'] <= 0.2
	assert metrics['br_mae_min'] <= 1.0


def test_evaluation_workflow_and_report(tmp_path, night_dir, settings):
	PipelineWorkflow(settings).process(str(night_dir / 'night.csv'), out_dir=str(tmp_path))
	workflow = EvaluationWorkflow(settings)
	result = workflow.execute([str(tmp_path / 'night_output.csv')], reference_dir=str(night_dir))
	assert result.success
	report = EvaluationWorkflow.report(result)
	assert list(report.recordings) == ['night']
	assert report.summary['rr_mae_ms'].median < 15.0


def test_evaluation_needs_a_reference(settings):
	with pytest.raises(InsufficientDataError):
		EvaluationWorkflow(settings).score(None, None, None, None)


def test_presets():
	for preset in PRESETS:
		params = preset_parameters(preset, 3600.0)
		assert params['hr_base'] == 60.0
	assert preset_parameters('motion', 3600.0)['bursts'] == [(600.0, 630.0, 0.2), (2400.0, 2430.0, 0.2)]
	with pytest.raises(InvalidParamError):
		preset_parameters('hurricane', 60.0)


def test_recording_seed_depends_on_name_only():
	assert recording_seed(None, 'night1') is None
	assert recording_seed(3, 'night1') == recording_seed(3, 'night1')
	assert recording_seed(3, 'night1') != recording_seed(3, 'night2')
	assert recording_seed(3, 'night1') != recording_seed(4, 'night1')


def test_synthesis_writes_bundle(tmp_path, settings):
	result = SynthesisWorkflow(settings).execute(
		['a', 'b'], out_dir=str(tmp_path), preset='rsa-step', duration=90.0, seed=1
	)
	assert result.success
	assert set(result.outputs['a']) == {'recording', 'ecg', 'resp', 'truth'}
	assert read_bytes(tmp_path / 'a.csv') != read_bytes(tmp_path / 'b.csv')
	assert result.details['a']['duration_s'] == pytest.approx(90.0)


def nearest_errors(detected, truth):
	index = np.clip(np.searchsorted(truth, detected), 1, len(truth) - 1)
	return np.minimum(np.abs(detected - truth[index - 1]), np.abs(detected - truth[index]))


def as_recording(name, synthetic):
	return Recording(name, synthetic.ppg, synthetic.acc_x, synthetic.acc_y, synthetic.acc_z)


def test_device_keeps_beats_after_motion(settings):
	params = {**preset_parameters('motion', 3600.0), 'artifact_gain': 10.0}
	synthetic = synthesize_recording(3600.0, seed=2, **params)
	beats = DeviceWorkflow(settings).extract(as_recording('motion', synthetic)).beats.times
	truth = synthetic.truth.beats.times
	late = truth[(truth > 2440.0) & (truth < 3599.0)]
	assert len(beats) >= 0.95 * len(truth)
	detected = np.sum((beats > 2440.0) & (beats < 3599.0))
	assert abs(detected - len(late)) <= 0.02 * len(late)
	assert np.median(nearest_errors(late, beats)) <= 0.015


@pytest.mark.slow
def test_full_night_accuracy_and_runtime(settings):
	synthetic = synthesize_recording(8 * 3600.0, hr_base=57.0, rsa_freq=0.22, rsa_depth=0.05, seed=11)
	start = time.perf_counter()
	features = DeviceWorkflow(settings).extract(as_recording('night', synthetic))
	output = ServerWorkflow(settings).analyze(features.records, settings.motion_window_s)
	elapsed = time.perf_counter() - start

	truth = synthetic.truth
	inner = truth.beats.times[(truth.beats.times > 0.5) & (truth.beats.times < 8 * 3600.0 - 0.5)]
	assert np.mean(nearest_errors(inner, features.beats.times)) <= 0.015
	assert evaluate_rr(output.corrected, truth.true_bbi).mae <= 15.0
	assert elapsed < 10.0
