import pytest
from hypothesis import HealthCheck, settings

from arvoc.model import ModelConfig, random_model

settings.register_profile(
    "suite", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")

# Small dimensions for fast structural tests; geometry fields stay fixed.
TINY = ModelConfig(cond_hidden=32, cond_sub_dim=16, sub_hidden=48, sub_layers=2)


@pytest.fixture(scope="session")
def tiny_model():
    return random_model(TINY, seed=11, weight_scale=2.0, feedback_scale=0.25)


@pytest.fixture(scope="session")
def default_model():
    """Default preset with contractive feedback, used for acceptance."""
    return random_model(ModelConfig(), seed=7, weight_scale=2.0, feedback_scale=0.25)
