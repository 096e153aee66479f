import pytest

from tfqss import ChannelParams, SourceParams


@pytest.fixture
def reference_channel():
    """50 km on each arm, hardware defaults."""
    return ChannelParams(l_a=50.0, l_b=50.0)


@pytest.fixture
def reference_source():
    return SourceParams(mu_a=0.05, mu_b=0.05)
