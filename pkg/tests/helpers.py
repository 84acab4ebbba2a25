"""Small matrices shared by the test modules."""

import numpy as np

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
P0 = np.diag([1.0, 0.0]).astype(complex)


def unit(n, i, j):
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1
    return e
