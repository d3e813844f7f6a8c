"""Concrete metric families with curvature evaluation.

Closed-form homogeneous models (round four-sphere, product of two round
two-spheres, the self-dual Einstein metric on the complex projective plane)
plus chart-sampled variants with finite-difference curvature, conformal
deformations of the sphere chart, and the pointwise conformal transformation
rule of the Schouten-type tensor.

Homogeneous models report orthonormal-frame curvature; a point argument is
accepted and ignored.  Their volumes are closed forms:

* round sphere, radius r:      (8 pi^2 / 3) r^4
* product of unit-area factors: 16 pi^2 a^2 b^2
* projective plane, Einstein constant lam: 18 pi^2 / lam^2
"""

import numpy as np

from . import charts
from .curvature import (CurvatureDecomposition, Metric4, check_symmetric,
                        decompose, kulkarni_nomizu)
from .errors import ContractViolation, RicciLabError

SPEC_VERSION = 1

_I4 = np.eye(4)


class HomogeneousModel:
    """Base for closed-form families: curvature is the same at every point."""

    is_homogeneous = True

    kind: str
    params: dict

    def frame_curvature(self) -> np.ndarray:
        raise NotImplementedError

    def volume(self) -> float:
        raise NotImplementedError

    def scaled(self, c: float) -> "HomogeneousModel":
        """Same geometry with all lengths multiplied by ``c``."""
        raise NotImplementedError

    def curvature_at(self, point=None):
        """Orthonormal-frame metric and curvature; ``point`` is ignored."""
        return Metric4.identity(), self.frame_curvature()

    def decomposition(self) -> CurvatureDecomposition:
        cached = getattr(self, "_dec_cache", None)
        if cached is None:
            cached = decompose(self.frame_curvature(), Metric4.identity())
            self._dec_cache = cached
        return cached


def _positive(name, value):
    value = float(value)
    if not value > 0:
        raise ContractViolation(f"{name} must be positive, got {value}")
    return value


class RoundS4(HomogeneousModel):
    """Round four-sphere of radius r: sectional curvature 1/r^2."""

    kind = "round_s4"

    def __init__(self, r=1.0):
        self.r = _positive("radius", r)
        self.params = {"r": self.r}

    def frame_curvature(self):
        return 0.5 / self.r ** 2 * kulkarni_nomizu(_I4, _I4)

    def volume(self):
        return (8.0 * np.pi ** 2 / 3.0) * self.r ** 4

    def scaled(self, c):
        return RoundS4(c * self.r)


class ProductS2S2(HomogeneousModel):
    """Product of round two-spheres of radii a and b."""

    kind = "product_s2s2"

    def __init__(self, a=1.0, b=1.0):
        self.a = _positive("a", a)
        self.b = _positive("b", b)
        self.params = {"a": self.a, "b": self.b}

    def frame_curvature(self):
        g1 = np.diag([1.0, 1.0, 0.0, 0.0])
        g2 = np.diag([0.0, 0.0, 1.0, 1.0])
        return (0.5 / self.a ** 2 * kulkarni_nomizu(g1, g1)
                + 0.5 / self.b ** 2 * kulkarni_nomizu(g2, g2))

    def volume(self):
        return 16.0 * np.pi ** 2 * self.a ** 2 * self.b ** 2

    def scaled(self, c):
        return ProductS2S2(c * self.a, c * self.b)


def _cp2_frame_curvature():
    """Orthonormal-frame curvature of the self-dual Einstein metric on the
    projective plane with Einstein constant 6 (sectional curvature in [1,4]),
    written in a unitary frame (e1 = J e0, e3 = J e2)."""
    j = np.zeros((4, 4))
    j[0, 1], j[1, 0], j[2, 3], j[3, 2] = 1.0, -1.0, 1.0, -1.0
    p1 = np.einsum("ik,jl->ijkl", _I4, _I4) - np.einsum("il,jk->ijkl", _I4, _I4)
    p2 = (np.einsum("ik,jl->ijkl", j, j) - np.einsum("il,jk->ijkl", j, j)
          + 2.0 * np.einsum("ij,kl->ijkl", j, j))
    return p1 + p2


_CP2_BASE = _cp2_frame_curvature()


class FubiniStudy(HomogeneousModel):
    """Self-dual Einstein metric on the projective plane, Ric = lam * g.

    The metric is ``s * g0`` with ``g0`` normalised to Einstein constant 6
    and ``s = 6 / lam``; frame curvature scales by 1/s.
    """

    kind = "fubini_study"

    def __init__(self, lam=6.0):
        self.lam = _positive("einstein constant", lam)
        self.params = {"lambda": self.lam}

    @classmethod
    def from_scale(cls, scale):
        return cls(6.0 / _positive("scale", scale))

    @property
    def scale(self):
        return 6.0 / self.lam

    def frame_curvature(self):
        return (self.lam / 6.0) * _CP2_BASE

    def volume(self):
        return self.scale ** 2 * np.pi ** 2 / 2.0

    def scaled(self, c):
        return FubiniStudy.from_scale(c ** 2 * self.scale)


# ---------------------------------------------------------------------------
# conformal machinery

def conformal_schouten(p, w, dw, hess_w, metric: Metric4):
    """Schouten-type tensor of the metric exp(2 w) g as a (0,2) tensor.

    Implements P~ = P - Hess(w) + dw (x) dw - (1/2) |dw|^2_g g, where
    ``hess_w`` is the covariant Hessian with respect to g.  The Weyl tensor
    needs no companion rule: as a (1,3) tensor it is unchanged.
    """
    p = check_symmetric(np.asarray(p, dtype=float), "schouten tensor")
    hess_w = check_symmetric(np.asarray(hess_w, dtype=float), "hessian")
    dw = np.asarray(dw, dtype=float)
    if dw.shape[-1] != 4 or hess_w.shape[-2:] != (4, 4) or p.shape[-2:] != (4, 4):
        raise ContractViolation("conformal_schouten: inconsistent derivative shapes")
    del w  # the tensor rule involves only derivatives of the exponent
    ginv = np.linalg.inv(metric.g)
    grad2 = np.einsum("...i,...j->...ij", dw, dw)
    norm2 = np.einsum("...ij,...i,...j->...", ginv, dw, dw)
    return p - hess_w + grad2 - 0.5 * norm2[..., None, None] * metric.g


def random_conformal_exponent(seed, amplitude=0.25, radius=1.0):
    """Seeded smooth function on the ambient sphere in R^5, scaled so its
    sampled sup-norm is ``amplitude``: a random linear-plus-quadratic form
    in the unit ambient coordinates."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed),
                                                       spawn_key=(0x5eed,)))
    lin = rng.normal(size=5)
    quad = rng.normal(size=(5, 5))
    quad = 0.5 * (quad + quad.T)

    def raw(y):
        yhat = np.asarray(y, dtype=float) / radius
        return yhat @ lin + np.einsum("...i,ij,...j->...", yhat, quad, yhat)

    probe = rng.normal(size=(4096, 5))
    probe = radius * probe / np.linalg.norm(probe, axis=1, keepdims=True)
    sup = float(np.max(np.abs(raw(probe))))

    def w(y):
        return amplitude * raw(y) / sup

    return w


def conformal_chart_s4(base_or_radius, w_fn=None, resolution=16,
                       fd_step=charts.DEFAULT_FD_STEP, params=None):
    """Chart model of exp(2 w) g_round on the sphere, with w given on the
    ambient sphere in R^5."""
    if isinstance(base_or_radius, charts.ChartModel):
        base = base_or_radius
        if base.kind not in ("chart_s4", "conformal_s4"):
            raise RicciLabError("conformal deformation supports the sphere chart only")
        radius = base.params["r"]
        resolution = base.params["resolution"]
        fd_step = base.fd_step
    else:
        radius = float(base_or_radius)
    return charts.chart_s4(radius, resolution, conformal_fn=w_fn, fd_step=fd_step,
                           kind="conformal_s4", params=params)


# ---------------------------------------------------------------------------
# JSON metric specifications

def from_spec(spec: dict):
    """Build a model from its JSON specification dictionary.

    Examples: {"kind": "product_s2s2", "a": 1.0, "b": 1.2},
    {"kind": "chart_s4", "r": 1.0, "resolution": 16},
    {"kind": "conformal", "base": {...}, "w": {"seed": 7, "amplitude": 0.25}}.
    """
    if not isinstance(spec, dict):
        raise ContractViolation("metric spec must be a JSON object")
    spec = dict(spec)
    version = spec.pop("spec_version", SPEC_VERSION)
    if version != SPEC_VERSION:
        raise ContractViolation(f"unsupported spec_version {version}")
    kind = spec.pop("kind", None)
    try:
        if kind == "round_s4":
            return RoundS4(spec.pop("r", 1.0))
        if kind == "product_s2s2":
            return ProductS2S2(spec.pop("a", 1.0), spec.pop("b", 1.0))
        if kind == "fubini_study":
            return FubiniStudy(spec.pop("lambda", 6.0))
        if kind == "chart_s4":
            return charts.chart_s4(spec.pop("r", 1.0), int(spec.pop("resolution", 16)),
                                   fd_step=spec.pop("fd_step", charts.DEFAULT_FD_STEP))
        if kind == "chart_s2s2":
            return charts.chart_s2s2(spec.pop("a", 1.0), spec.pop("b", 1.0),
                                     int(spec.pop("resolution", 16)),
                                     fd_step=spec.pop("fd_step", charts.DEFAULT_FD_STEP))
        if kind == "conformal":
            base = spec.pop("base", {"kind": "chart_s4"})
            wspec = spec.pop("w", {})
            if base.get("kind") != "chart_s4":
                raise RicciLabError("conformal deformation supports chart_s4 bases only")
            radius = float(base.get("r", 1.0))
            w_fn = random_conformal_exponent(int(wspec.get("seed", 0)),
                                             float(wspec.get("amplitude", 0.25)),
                                             radius=radius)
            return conformal_chart_s4(radius, w_fn,
                                      resolution=int(base.get("resolution", 16)),
                                      fd_step=float(base.get("fd_step",
                                                             charts.DEFAULT_FD_STEP)),
                                      params={"w": dict(wspec)})
    except (TypeError, ValueError) as exc:
        raise ContractViolation(f"bad metric spec: {exc}") from exc
    raise ContractViolation(f"unknown metric kind {kind!r}")


def describe(model) -> dict:
    out = {"spec_version": SPEC_VERSION, "kind": model.kind}
    out.update(model.params)
    return out
