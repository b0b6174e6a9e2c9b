import pytest

from fairalloc import Allocation, Instance


@pytest.fixture
def two_by_five() -> Instance:
    """2 agents x 5 items; the product-maximal complete allocation is unique."""
    return Instance.from_rows([[3, 3, 1, 1, 1], [5, 5, 1, 4, 3]])


@pytest.fixture
def four_by_four() -> Instance:
    """4 agents x 4 items with an instructive envy-ratio graph."""
    return Instance.from_rows([[8, 2, 4, 3], [4, 2, 0, 2], [0, 3, 2, 2], [1, 6, 3, 9]])


@pytest.fixture
def identity_allocation() -> Allocation:
    return Allocation.of([[0], [1], [2], [3]], 4)


@pytest.fixture
def rotated_allocation() -> Allocation:
    """The 4x4 identity allocation after rotating the improving cycle (0, 2, 1)."""
    return Allocation.of([[2], [0], [1], [3]], 4)
