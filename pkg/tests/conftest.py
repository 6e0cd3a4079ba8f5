"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest


def numeric_grad(fn, arrays, step=1e-6):
    """Central finite differences of a scalar function of ``arrays``.

    ``fn`` takes no arguments and reads the arrays in place; the arrays are
    perturbed one coordinate at a time and restored afterwards.
    """
    grads = []
    for arr in arrays:
        grad = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            kept = arr[idx]
            arr[idx] = kept + step
            plus = fn()
            arr[idx] = kept - step
            minus = fn()
            arr[idx] = kept
            grad[idx] = (plus - minus) / (2.0 * step)
        grads.append(grad)
    return grads


@pytest.fixture
def rng():
    return np.random.default_rng(0)
