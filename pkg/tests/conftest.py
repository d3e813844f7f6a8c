"""Shared oracles: brute-force geometric checks independent of the library
code paths they validate."""

import numpy as np
import pytest

from ricci_lab.curvature import Metric4


@pytest.fixture
def identity_metric():
    return Metric4.identity()


def sectional_curvatures(rm, g, n_random=50, seed=0):
    """Brute-force sectional curvatures over coordinate and random 2-planes.

    K(X, Y) = Rm(X, Y, X, Y) / (|X|^2 |Y|^2 - <X, Y>^2), independent of the
    decomposition machinery.
    """
    rng = np.random.default_rng(seed)
    planes = []
    eye = np.eye(4)
    for i in range(4):
        for j in range(i + 1, 4):
            planes.append((eye[i], eye[j]))
    for _ in range(n_random):
        planes.append((rng.normal(size=4), rng.normal(size=4)))
    out = []
    for x, y in planes:
        num = np.einsum("ijkl,i,j,k,l->", rm, x, y, x, y)
        gram = (np.einsum("ij,i,j->", g, x, x) * np.einsum("ij,i,j->", g, y, y)
                - np.einsum("ij,i,j->", g, x, y) ** 2)
        if gram > 1e-12:
            out.append(num / gram)
    return np.array(out)


def four_tensor_norm2(w, g):
    """|W|^2 with all four indices raised by g (plain four-tensor norm)."""
    ginv = np.linalg.inv(g)
    return np.einsum("ijkl,pqrs,ip,jq,kr,ls->", w, w, ginv, ginv, ginv, ginv)
