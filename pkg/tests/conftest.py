import numpy as np
import pytest

from trustqueue.experiments import (four_class_example, rare_long_job_example,
                                    three_class_example)
from trustqueue.model import SizeEstimateMatrix, SizeGrid, SystemConfig


@pytest.fixture
def three_class():
    return three_class_example()


@pytest.fixture
def four_class():
    return four_class_example(0.1)


@pytest.fixture
def rare_long_job():
    return rare_long_job_example()


def random_config(seed: int, n_range=(2, 5), max_load=0.95) -> SystemConfig:
    """Random valid workload: increasing sizes, random joint matrix, rho < max_load."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    sizes = np.cumsum(rng.uniform(0.2, 3.0, n))
    entries = rng.uniform(0.0, 1.0, (n, n)) ** 2
    entries /= entries.sum()
    matrix = SizeEstimateMatrix(entries)
    mean_size = float(matrix.size_marginal @ sizes)
    rho = rng.uniform(0.2, max_load)
    return SystemConfig(lam=rho / mean_size, grid=SizeGrid(sizes), matrix=matrix)
