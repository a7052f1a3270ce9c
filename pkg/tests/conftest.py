import numpy as np
import pytest

from maxmin_svm.verify import blob_dataset


@pytest.fixture
def blobs3():
    """Well-separated 3-class clusters; linearly separable."""
    return blob_dataset(np.random.default_rng(0), n_per=20, c=3, d=4,
                        sep=3.0, spread=0.5)


@pytest.fixture
def blobs2():
    """Well-separated 2-class clusters."""
    return blob_dataset(np.random.default_rng(1), n_per=25, c=2, d=3,
                        sep=3.0, spread=0.5)


@pytest.fixture
def overlap4():
    """Heavily overlapping 4-class clusters; accuracy well below 1."""
    return blob_dataset(np.random.default_rng(2), n_per=30, c=4, d=4,
                        sep=1.0, spread=1.2)
