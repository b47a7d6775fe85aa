import pytest

from dissipative_rmt.runner import TableRunner, default_workers

# Seed for the table-scale ensembles used by the acceptance gate.
ACCEPTANCE_SEED = 7


@pytest.fixture(scope="session")
def tables():
    """Table rows at desk scale, computed lazily and shared across tests."""
    return TableRunner({"seed": ACCEPTANCE_SEED}, workers=default_workers())
