import pytest

from mahc.geometry import TwoCellTopology
from mahc.model import ContentLibrary

REF_N = 10
REF_M = 3
REF_Z = 10
REF_ALPHA = 1.2
REF_RATIO = 0.3375


@pytest.fixture
def reference_library():
    return ContentLibrary.zipf(REF_N, REF_ALPHA)


@pytest.fixture
def reference_topology():
    return TwoCellTopology.from_overlap_ratio(REF_RATIO, REF_Z)


@pytest.fixture
def unit_topology():
    """Equal unit cells 0.8 apart, the setting behind the 0.3375 ratio."""
    return TwoCellTopology(1.0, 1.0, 0.8, REF_Z)
