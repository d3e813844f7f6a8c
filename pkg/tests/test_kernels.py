"""Backend parity: the compiled kernels and the numpy fallback must agree to
rounding on identical inputs."""

import numpy as np
import pytest

from ricci_lab import _kernels
from ricci_lab._kernels import _numpy

_core = pytest.importorskip("ricci_lab._kernels._core",
                            reason="compiled kernel backend not built")


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(77)
    rm = rng.normal(size=(64, 4, 4, 4, 4))
    rm = rm - rm.transpose(0, 2, 1, 3, 4)
    rm = rm - rm.transpose(0, 1, 2, 4, 3)
    rm = rm + rm.transpose(0, 3, 4, 1, 2)
    e = rng.normal(size=(64, 4, 4))
    e = e + e.transpose(0, 2, 1)
    f = rng.normal(size=(64, 4, 4)) + 3 * np.eye(4)
    a = rng.normal(size=(64, 4, 4))
    g = np.einsum("nij,nkj->nik", a, a) + 4 * np.eye(4)
    dg = rng.normal(size=(64, 4, 4, 4))
    dg = dg + dg.transpose(0, 1, 3, 2)
    d2g = rng.normal(size=(64, 4, 4, 4, 4))
    d2g = d2g + d2g.transpose(0, 2, 1, 3, 4)
    d2g = d2g + d2g.transpose(0, 1, 2, 4, 3)
    op = rng.normal(size=(64, 6, 6))
    return dict(rm=rm, e=e, f=f, g=g, ginv=np.linalg.inv(g), dg=dg, d2g=d2g, op=op)


def _agree(a, b, tol=1e-12):
    scale = max(1.0, float(np.max(np.abs(a))))
    return np.max(np.abs(a - b)) <= tol * scale


def test_rm_to_op_parity(data):
    assert _agree(_core.rm_to_op(data["rm"]), _numpy.rm_to_op(data["rm"]))


def test_op_to_rm_parity(data):
    assert _agree(_core.op_to_rm(data["op"]), _numpy.op_to_rm(data["op"]))


def test_wee_parity(data):
    assert _agree(_core.wee(data["rm"], data["e"]), _numpy.wee(data["rm"], data["e"]))


def test_frame_transform_parity(data):
    assert _agree(_core.frame_transform(data["rm"], data["f"]),
                  _numpy.frame_transform(data["rm"], data["f"]))


def test_riemann_parity(data):
    assert _agree(_core.riemann_from_derivs(data["g"], data["ginv"],
                                            data["dg"], data["d2g"]),
                  _numpy.riemann_from_derivs(data["g"], data["ginv"],
                                             data["dg"], data["d2g"]))


def test_backend_selection_env(monkeypatch):
    import importlib
    monkeypatch.setenv("RICCI_LAB_BACKEND", "numpy")
    mod = importlib.reload(_kernels)
    assert mod.BACKEND == "numpy"
    monkeypatch.setenv("RICCI_LAB_BACKEND", "cython")
    mod = importlib.reload(_kernels)
    assert mod.BACKEND == "cython"
    monkeypatch.delenv("RICCI_LAB_BACKEND")
    importlib.reload(_kernels)


def test_op_round_trip_identity(data):
    op = _core.rm_to_op(_core.op_to_rm(data["op"]))
    # the operator map is an isometry on pair-antisymmetric tensors
    assert _agree(op, data["op"])
