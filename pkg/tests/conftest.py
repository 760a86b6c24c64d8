import sys
from pathlib import Path

import pytest

from glt import kernels

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(params=["python"] + (["ext"] if kernels.HAVE_EXT else []))
def backend(request):
    """Run a test under each available kernel backend."""
    kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend("auto")
