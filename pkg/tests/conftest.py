import numpy as np
import pytest

from ppg_sleep import config
from ppg_sleep.config import PipelineSettings
from ppg_sleep.workflows.synthesis import SynthesisWorkflow


@pytest.fixture(autouse=True)
def no_user_config(monkeypatch):
	# Keep a ppg_sleep.yaml in the home or working directory out of the tests.
	monkeypatch.setattr(config, 'DEFAULT_CONFIG_PATHS', [])


@pytest.fixture
def settings():
	return PipelineSettings.from_dict({})


@pytest.fixture
def rng():
	return np.random.default_rng(20240611)


@pytest.fixture(scope='session')
def night_dir(tmp_path_factory):
	"""A seven-minute clean synthetic night with references, written once."""
	out_dir = tmp_path_factory.mktemp('night')
	workflow = SynthesisWorkflow(PipelineSettings.from_dict({}))
	result = workflow.process('night', out_dir=str(out_dir), preset='clean', duration=420.0, seed=7)
	assert result.success
	return out_dir
