import numpy as np
import pytest

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# x-basis projectors (I +/- X)/2, used across the suite
PROJ_X_PLUS = 0.5 * (np.eye(2) + PAULI_X).astype(complex)
PROJ_X_MINUS = 0.5 * (np.eye(2) - PAULI_X).astype(complex)

# z-basis projectors
PROJ_0 = np.diag([1.0, 0.0]).astype(complex)
PROJ_1 = np.diag([0.0, 1.0]).astype(complex)


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


def assert_hermitian(m, tol=1e-12):
    assert np.abs(m - m.conj().T).max() <= tol
