"""Small shared numeric helpers on top of numpy."""

from __future__ import annotations

import numpy as np


def hermiticity_defect(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0


def expm_hermitian(matrix: np.ndarray, prefactor: complex = 1.0) -> np.ndarray:
    """exp(prefactor * M) for self-adjoint M, via eigendecomposition."""
    evals, vecs = np.linalg.eigh(matrix)
    return (vecs * np.exp(prefactor * evals)) @ vecs.conj().T


def max_abs(arr) -> float:
    arr = np.asarray(arr)
    return float(np.max(np.abs(arr))) if arr.size else 0.0
