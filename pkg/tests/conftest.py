import pytest

from holonomy_lab import rb
from holonomy_lab.model import NoiseModel


@pytest.fixture(scope="session")
def rb_noisy_reference():
    """Shared reduced-size reference RB run under the device noise."""
    noise = NoiseModel.from_coherence_times()
    factory = rb.default_channel_factory(noise)
    return rb.run_rb(factory, m_values=(1, 6, 16, 36, 75), n_seqs=12, seed=1)
