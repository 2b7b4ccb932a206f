import pytest

from centerline.grid import GridSpec


@pytest.fixture
def spec():
    return GridSpec()


@pytest.fixture
def unit_spec():
    """Grid whose world frame equals the index frame (cell 1 m, origin 0)."""
    return GridSpec(height_cells=40, width_cells=40, cell_size_m=1.0, origin_world=(0.0, 0.0))
