import pytest

from intervalzeta.config import config_from_document
from intervalzeta.presets import PRESET_NAMES, preset_document


def load(name, **run):
    doc = preset_document(name)
    if run:
        doc.setdefault("run", {}).update(run)
    return config_from_document(doc)


@pytest.fixture(scope="session")
def presets():
    return {name: load(name) for name in PRESET_NAMES}


@pytest.fixture(scope="session")
def tent(presets):
    return presets["tent"]


@pytest.fixture(scope="session")
def weighted_tent(presets):
    return presets["weighted_tent"]


@pytest.fixture(scope="session")
def three(presets):
    return presets["three_interval"]


@pytest.fixture(scope="session")
def logistic4(presets):
    return presets["logistic4"]


@pytest.fixture(scope="session")
def logistic38(presets):
    return presets["logistic38"]


@pytest.fixture(scope="session")
def ident(presets):
    return presets["identity_branch"]
