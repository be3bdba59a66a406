import pytest

from bhenergy import fixtures as fx


@pytest.fixture(scope="session")
def laws():
    return fx.shipped_laws()


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    return fx.write_fixture_files(tmp_path_factory.mktemp("fixtures"))
