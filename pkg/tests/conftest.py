"""Pytest configuration and fixtures for receptorlab."""
import sys
from pathlib import Path

import pytest

# Ajout des chemins comme le fait main.py ; les tests importent via ``src.``
# pour partager les mêmes objets (enums) que le code du paquet.
ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))
sys.path.insert(0, str(ROOT / "src"))

from src.core.binding.sampler import ChannelScenario, make_rng  # noqa: E402
from src.core.detection.estimators import build_binning  # noqa: E402


def pytest_configure(config):
    """Marqueurs personnalisés."""
    config.addinivalue_line("markers", "slow: tests longs (Monte Carlo à l'échelle d'acceptation)")


@pytest.fixture
def reference_scenario():
    """Scénario de référence : c0=2, c1=2.5, μ_cin=5, V=4000, N=10⁴."""
    return ChannelScenario.reference()


@pytest.fixture
def small_scenario():
    """Scénario réduit (N=500) pour les tests rapides."""
    return ChannelScenario.reference(n_receptors=500)


@pytest.fixture
def reference_scheme(reference_scenario):
    """Binning ν=3 du scénario de référence (t1 = 0.06 s)."""
    return build_binning(3.0, reference_scenario.spec_s, reference_scenario.spec_in)


@pytest.fixture
def rng():
    """Générateur reproductible."""
    return make_rng(1234)
