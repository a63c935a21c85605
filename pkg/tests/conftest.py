import pathlib

import pytest


@pytest.fixture(scope="session")
def bundled_certificate_path():
    import spikecert

    return pathlib.Path(spikecert.__file__).parent / "data" / "reference_certificate.json"
