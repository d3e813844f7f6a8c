"""Chart-sampled metrics: quadrature node sets and finite-difference curvature.

A chart model is a collection of patches.  Each patch carries a closed-form
metric component function on an open coordinate box (or ball), a set of
Gauss-Legendre quadrature nodes with Lebesgue weights, and an orientation
sign.  Curvature at a point is obtained from fourth-order central finite
differences of the metric components; integrals are weighted sums of
pointwise densities over all patches.
"""

from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from . import _kernels
from .curvature import CurvatureDecomposition, Metric4, decompose
from .errors import RicciLabError, SingularMetricError

DEFAULT_FD_STEP = 1e-2
_CHUNK = 2048


# ---------------------------------------------------------------------------
# fourth-order finite-difference stencil for first and second derivatives

def _build_stencil(h: float):
    """Offset table (s,4) and dense coefficient maps D1 (4,s), D2 (4,4,s)."""
    c1 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
    off1 = np.array([-2, -1, 1, 2])
    c2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0

    offsets = [np.zeros(4)]
    index = {(0, 0, 0, 0): 0}

    def key(vec):
        return tuple(int(v) for v in vec)

    def idx(vec):
        k = key(vec)
        if k not in index:
            index[k] = len(offsets)
            offsets.append(np.asarray(vec, dtype=float))
        return index[k]

    axis_idx = np.zeros((4, 4), dtype=int)
    for d in range(4):
        for a, o in enumerate(off1):
            v = np.zeros(4)
            v[d] = o
            axis_idx[d, a] = idx(v)
    cross_idx = {}
    for a in range(4):
        for b in range(a + 1, 4):
            ids = np.zeros((4, 4), dtype=int)
            for i, oa in enumerate(off1):
                for j, ob in enumerate(off1):
                    v = np.zeros(4)
                    v[a] = oa
                    v[b] = ob
                    ids[i, j] = idx(v)
            cross_idx[(a, b)] = ids

    n_pts = len(offsets)
    d1 = np.zeros((4, n_pts))
    d2 = np.zeros((4, 4, n_pts))
    for d in range(4):
        for a in range(4):
            d1[d, axis_idx[d, a]] += c1[a] / h
        d2[d, d, 0] += c2[2] / h ** 2
        for a, o in enumerate([-2, -1, 1, 2]):
            d2[d, d, axis_idx[d, a]] += c2[a if a < 2 else a + 1] / h ** 2
    for (a, b), ids in cross_idx.items():
        for i in range(4):
            for j in range(4):
                d2[a, b, ids[i, j]] += c1[i] * c1[j] / h ** 2
        d2[b, a] = d2[a, b]
    return np.stack(offsets) * h, d1, d2


def metric_jets(metric_fn, pts, h=DEFAULT_FD_STEP):
    """Metric components with first and second derivatives at ``pts``.

    Returns (g, dg, d2g) with dg[n,d,i,j] = d_d g_ij.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    offsets, d1, d2 = _build_stencil(h)
    stencil_pts = pts[:, None, :] + offsets[None, :, :]
    n, s = stencil_pts.shape[:2]
    gs = metric_fn(stencil_pts.reshape(n * s, 4)).reshape(n, s, 4, 4)
    g = gs[:, 0]
    dg = np.einsum("ds,nsij->ndij", d1, gs)
    d2g = np.einsum("des,nsij->ndeij", d2, gs)
    return g, dg, d2g


def curvature_batch(metric_fn, pts, h=DEFAULT_FD_STEP):
    """(g, Rm) at each point, Rm from finite-difference Christoffel symbols."""
    g, dg, d2g = metric_jets(metric_fn, pts, h)
    ev = np.linalg.eigvalsh(g)
    if np.min(ev) <= 0:
        raise SingularMetricError("chart metric not positive definite at a requested point")
    ginv = np.linalg.inv(g)
    rm = _kernels.riemann_from_derivs(g, ginv, dg, d2g)
    return g, rm


# ---------------------------------------------------------------------------
# quadrature nodes

def _gl(n, lo, hi):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def polar_ball_nodes(radius, n):
    """Tensor-product Gauss-Legendre nodes of the closed 4-ball, via polar
    parameters (rho, chi, theta, phi); returns Cartesian nodes and Lebesgue
    weights."""
    rho, w_rho = _gl(n, 0.0, radius)
    chi, w_chi = _gl(n, 0.0, np.pi)
    theta, w_theta = _gl(n, 0.0, np.pi)
    phi, w_phi = _gl(n, 0.0, 2.0 * np.pi)
    r, c, t, p = np.meshgrid(rho, chi, theta, phi, indexing="ij")
    wr, wc, wt, wp = np.meshgrid(w_rho, w_chi, w_theta, w_phi, indexing="ij")
    x0 = r * np.cos(c)
    x1 = r * np.sin(c) * np.cos(t)
    x2 = r * np.sin(c) * np.sin(t) * np.cos(p)
    x3 = r * np.sin(c) * np.sin(t) * np.sin(p)
    nodes = np.stack([a.ravel() for a in (x0, x1, x2, x3)], axis=-1)
    jac = (r ** 3 * np.sin(c) ** 2 * np.sin(t)).ravel()
    weights = (wr * wc * wt * wp).ravel() * jac
    return nodes, weights


def box_nodes(bounds, counts):
    """Tensor-product Gauss-Legendre nodes of a coordinate box."""
    axes = [_gl(c, lo, hi) for (lo, hi), c in zip(bounds, counts)]
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    nodes = np.stack([a.ravel() for a in grids], axis=-1)
    weights = np.ones_like(nodes[:, 0])
    for w in wgrids:
        weights = weights * w.ravel()
    return nodes, weights


# ---------------------------------------------------------------------------
# patches and chart models

@dataclass(frozen=True)
class ChartPatch:
    name: str
    metric_fn: Callable
    nodes: np.ndarray
    weights: np.ndarray
    orientation: int
    contains: Callable


@dataclass(frozen=True)
class ChartSample:
    """One chunk of chart data: curvature plus positive volume weights."""

    coordinates: np.ndarray
    metric: Metric4
    rm: np.ndarray
    volume_weight: np.ndarray


class ChartModel:
    """Metric family sampled on quadrature nodes of one or more patches."""

    is_homogeneous = False

    def __init__(self, kind, patches, fd_step=DEFAULT_FD_STEP, params=None):
        self.kind = kind
        self.patches = list(patches)
        self.fd_step = float(fd_step)
        self.params = dict(params or {})
        for patch in self.patches:
            g = patch.metric_fn(patch.nodes[:256])
            if np.min(np.linalg.eigvalsh(g)) <= 0:
                raise SingularMetricError(f"patch {patch.name}: metric not positive "
                                          "definite at quadrature nodes")
            if np.any(patch.weights <= 0):
                raise RicciLabError(f"patch {patch.name}: non-positive quadrature weight")

    @property
    def node_count(self):
        return sum(len(p.nodes) for p in self.patches)

    def curvature_at(self, point, h=None):
        """(Metric4, Rm components) at a chart point, from finite differences.

        The point is looked up in patch order; raises if outside all patches.
        """
        point = np.asarray(point, dtype=float)
        for patch in self.patches:
            if patch.contains(point):
                g, rm = curvature_batch(patch.metric_fn, point[None], h or self.fd_step)
                return Metric4(g[0], patch.orientation), rm[0]
        raise RicciLabError(f"point {point} outside every chart patch")

    def sample_chunks(self, chunk=_CHUNK, h=None, stride=1) -> Iterator[ChartSample]:
        """Stream curvature over quadrature nodes in memory-bounded chunks."""
        h = h or self.fd_step
        for patch in self.patches:
            nodes = patch.nodes[::stride]
            weights = patch.weights[::stride]
            for lo in range(0, len(nodes), chunk):
                pts = nodes[lo:lo + chunk]
                g, rm = curvature_batch(patch.metric_fn, pts, h)
                vol_w = np.sqrt(np.linalg.det(g)) * weights[lo:lo + chunk]
                yield ChartSample(pts, Metric4(g, patch.orientation), rm, vol_w)

    def integrate_many(self, densities, h=None, stride=1):
        """Integrate several densities in one pass over the nodes.

        ``densities`` maps names to callables on a CurvatureDecomposition
        returning pointwise values.  Returns {name: integral}.
        """
        totals = {name: 0.0 for name in densities}
        for sample in self.sample_chunks(h=h, stride=stride):
            dec = decompose(sample.rm, sample.metric)
            for name, fn in densities.items():
                totals[name] += float(np.sum(fn(dec) * sample.volume_weight))
        return totals

    def richardson_estimate(self, densities, subsample=512):
        """Relative disagreement of each density integrand between the
        configured step and half of it, on a node subsample.  A large value
        flags finite-difference non-convergence; reported, never fatal."""
        stride = max(1, self.node_count // subsample)
        coarse = self.integrate_many(densities, h=self.fd_step, stride=stride)
        fine = self.integrate_many(densities, h=self.fd_step / 2.0, stride=stride)
        out = {}
        for name in densities:
            scale = max(1.0, abs(coarse[name]), abs(fine[name]))
            out[name] = abs(coarse[name] - fine[name]) / scale
        return out

    def volume(self):
        total = 0.0
        for patch in self.patches:
            g = patch.metric_fn(patch.nodes)
            total += float(np.sum(np.sqrt(np.linalg.det(g)) * patch.weights))
        return total


def stereographic_metric_fn(radius, conformal_fn=None, south=False):
    """Component function of the round-sphere stereographic chart, optionally
    multiplied by a conformal factor exp(2 w) with w given on the ambient
    sphere in R^5."""
    r2 = radius * radius

    def ambient(x):
        s = np.sum(x * x, axis=-1, keepdims=True)
        y_head = 2.0 * r2 * x / (r2 + s)
        y_last = radius * (r2 - s) / (r2 + s)
        if south:
            y_last = -y_last
        return np.concatenate([y_head, y_last], axis=-1)

    def fn(x):
        x = np.atleast_2d(x)
        s = np.sum(x * x, axis=-1)
        psi2 = (2.0 * r2 / (r2 + s)) ** 2
        if conformal_fn is not None:
            psi2 = psi2 * np.exp(2.0 * conformal_fn(ambient(x)))
        return psi2[:, None, None] * np.eye(4)

    return fn


def chart_s4(radius=1.0, resolution=16, conformal_fn=None, fd_step=DEFAULT_FD_STEP,
             kind="chart_s4", params=None):
    """Two stereographic patches (closed hemispheres as balls of radius
    ``radius``); the south patch carries the reversed orientation."""
    nodes, weights = polar_ball_nodes(radius, resolution)
    ball = float(radius)

    def contains(p, _r=ball):
        return bool(np.sum(p * p) <= _r * _r * (1 + 1e-12))

    patches = [
        ChartPatch("north", stereographic_metric_fn(radius, conformal_fn, south=False),
                   nodes, weights, +1, contains),
        ChartPatch("south", stereographic_metric_fn(radius, conformal_fn, south=True),
                   nodes, weights, -1, contains),
    ]
    return ChartModel(kind, patches, fd_step=fd_step,
                      params=dict(params or {}, r=radius, resolution=resolution))


def product_angles_metric_fn(a, b):
    def fn(x):
        x = np.atleast_2d(x)
        n = len(x)
        g = np.zeros((n, 4, 4))
        g[:, 0, 0] = a * a
        g[:, 1, 1] = a * a * np.sin(x[:, 0]) ** 2
        g[:, 2, 2] = b * b
        g[:, 3, 3] = b * b * np.sin(x[:, 2]) ** 2
        return g
    return fn


def chart_s2s2(a=1.0, b=1.0, resolution=16, fd_step=DEFAULT_FD_STEP):
    """Spherical-angle chart of the product of two round 2-spheres."""
    bounds = [(0.0, np.pi), (0.0, 2 * np.pi), (0.0, np.pi), (0.0, 2 * np.pi)]
    nodes, weights = box_nodes(bounds, [resolution] * 4)

    def contains(p):
        return bool(0 < p[0] < np.pi and 0 <= p[1] <= 2 * np.pi
                    and 0 < p[2] < np.pi and 0 <= p[3] <= 2 * np.pi)

    patch = ChartPatch("angles", product_angles_metric_fn(a, b), nodes, weights,
                       +1, contains)
    return ChartModel("chart_s2s2", [patch], fd_step=fd_step,
                      params={"a": a, "b": b, "resolution": resolution})
