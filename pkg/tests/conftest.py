import pytest

from proxinorm.construction import canonical_table


@pytest.fixture(scope="session")
def table():
    """One shared canonical table; it is append-only, so sharing is safe."""
    return canonical_table()
