import warnings

import pytest

from spinancilla.hilbert import SmallAncillaWarning


@pytest.fixture(autouse=True)
def _silence_small_ancilla_warning():
    """Many tests intentionally run frozen or small bosons (q <= L)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmallAncillaWarning)
        yield
