"""Shared fixtures for ldpc-lab tests."""

import numpy as np
import pytest

from ldpc_lab.alist import emit_alist
from ldpc_lab.codes import ParityCheckMatrix, build_array_code, enumerate_codewords

TOY_ALIST = """3 2
2 2
1 2 1
2 2
1
1 2
2
1 2
2 3
"""


@pytest.fixture()
def toy_code():
    """H = [[1,1,0],[0,1,1]]."""
    return ParityCheckMatrix(3, [[0, 1], [1, 2]])


@pytest.fixture()
def toy_alist():
    return TOY_ALIST


@pytest.fixture()
def hamming74():
    return ParityCheckMatrix.from_dense(
        [
            [1, 1, 0, 1, 1, 0, 0],
            [1, 0, 1, 1, 0, 1, 0],
            [0, 1, 1, 1, 0, 0, 1],
        ]
    )


@pytest.fixture()
def hamming_codebook(hamming74):
    return enumerate_codewords(hamming74)


@pytest.fixture(scope="session")
def array53():
    return build_array_code(5, 3)


@pytest.fixture(scope="session")
def array53_codebook(array53):
    return enumerate_codewords(array53)


@pytest.fixture()
def array53_alist(tmp_path, array53):
    path = tmp_path / "a53.alist"
    path.write_text(emit_alist(array53), encoding="utf-8")
    return path


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
