import os
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)


@pytest.fixture(scope="session")
def engine():
    """Calibrated engine shared by the star product and R tests."""
    from udf_engine import UDFEngine
    return UDFEngine(sign=1)


@pytest.fixture(scope="session")
def r_order2(engine):
    return engine.extract_R(2)
