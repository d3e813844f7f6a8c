"""Pointwise curvature algebra in dimension four.

Everything here is exact linear algebra on small arrays: building algebraic
curvature tensors, splitting them into scalar / trace-free Ricci / Weyl
parts, projecting the Weyl operator onto the self-dual and anti-self-dual
two-form bundles, and the scalar invariants built from those pieces.

Conventions
-----------
* ``Rm[i,j,k,l]`` is the (0,4) curvature tensor with ``Rm[i,j,i,j] > 0`` on
  the round sphere (sectional curvature of orthonormal coordinate planes).
* Operator norms on two-forms: ``norm2_w_plus`` etc. are Frobenius norms of
  the 3x3 blocks of the curvature operator, which equals one quarter of the
  plain four-tensor square norm.
* The trace-free Ricci tensor is ``E = Ric - (R/4) g``; the Schouten-type
  tensor is ``P = (Ric - R g / 6) / 2``.

All operations broadcast over a leading batch axis and are pure; the
returned dataclasses are frozen value objects.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ContractViolation, SingularMetricError

SQRT6 = np.sqrt(6.0)

_SYM_TOL = 1e-9
_CURV_TOL = 1e-9


def _as_batch(arr, core_ndim):
    """View ``arr`` with exactly one leading batch axis; also report whether
    the input carried one."""
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == core_ndim:
        return arr[None], False
    if arr.ndim == core_ndim + 1:
        return arr, True
    raise ContractViolation(f"expected array of ndim {core_ndim} or {core_ndim + 1}, "
                            f"got shape {arr.shape}")


def _debatch(arr, batched):
    return arr if batched else arr[0]


def check_symmetric(m, name="matrix", tol=_SYM_TOL):
    m = np.asarray(m, dtype=float)
    dev = np.max(np.abs(m - np.swapaxes(m, -1, -2)))
    if dev > tol * max(1.0, float(np.max(np.abs(m)))):
        raise ContractViolation(f"{name} is not symmetric (deviation {dev:.3e})")
    return m


@dataclass(frozen=True)
class Metric4:
    """A positive-definite symmetric 4x4 metric with a fixed orientation."""

    g: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        g = check_symmetric(self.g, "metric")
        object.__setattr__(self, "g", g)
        if self.orientation not in (1, -1):
            raise ContractViolation("orientation must be +1 or -1")
        ev = np.linalg.eigvalsh(g)
        if np.min(ev) <= 0:
            raise SingularMetricError(f"metric not positive definite (min eig {np.min(ev):.3e})")

    @classmethod
    def identity(cls, orientation=1):
        return cls(np.eye(4), orientation)

    @property
    def inv(self):
        return np.linalg.inv(self.g)

    @property
    def sqrt_det(self):
        return np.sqrt(np.linalg.det(self.g))

    def frame(self):
        """Columns form a g-orthonormal frame: F^T g F = I.

        Built from the Cholesky factor, so the map is orientation
        preserving; ``orientation == -1`` flips the last column.
        """
        g, batched = _as_batch(self.g, 2)
        f = np.linalg.inv(np.swapaxes(np.linalg.cholesky(g), -1, -2))
        if self.orientation < 0:
            f = f.copy()
            f[..., :, 3] = -f[..., :, 3]
        return _debatch(f, batched)


def curvature_symmetry_deviation(rm) -> float:
    """Worst absolute deviation from the algebraic curvature symmetries
    (both antisymmetries, pair symmetry, first Bianchi)."""
    rm, _ = _as_batch(rm, 4)
    scale = max(1.0, float(np.max(np.abs(rm))))
    devs = [
        np.max(np.abs(rm + rm.transpose(0, 2, 1, 3, 4))),
        np.max(np.abs(rm + rm.transpose(0, 1, 2, 4, 3))),
        np.max(np.abs(rm - rm.transpose(0, 3, 4, 1, 2))),
        np.max(np.abs(rm + rm.transpose(0, 1, 3, 4, 2) + rm.transpose(0, 1, 4, 2, 3))),
    ]
    return float(max(devs)) / scale


@dataclass(frozen=True)
class AlgebraicCurvature:
    """(0,4) tensor with all curvature symmetries, in some basis."""

    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "components", np.asarray(self.components, dtype=float))

    @classmethod
    def from_array(cls, rm, check=True, tol=_CURV_TOL):
        rm = np.asarray(rm, dtype=float)
        if check:
            dev = curvature_symmetry_deviation(rm)
            if dev > tol:
                raise ContractViolation(f"curvature symmetries violated (relative {dev:.3e})")
        return cls(rm)


def schouten(ric, scalar_curv, metric: Metric4):
    """P = (Ric - R g / 6) / 2, with the trace contract enforced.

    Raises ContractViolation when ``ric`` is not symmetric or when
    ``scalar_curv`` disagrees with trace(g^-1 ric) beyond 1e-9 relative.
    """
    ric = check_symmetric(ric, "ricci tensor")
    g = metric.g
    tr = np.einsum("...ik,...ik->...", np.linalg.inv(g), ric)
    if np.max(np.abs(tr - scalar_curv)) > 1e-9 * max(1.0, float(np.max(np.abs(scalar_curv)))):
        raise ContractViolation("scalar curvature does not match trace of the Ricci tensor")
    return 0.5 * (ric - np.asarray(scalar_curv)[..., None, None] / 6.0 * g)


def kulkarni_nomizu(h, k):
    """(h ^o k)_ijkl = h_ik k_jl + h_jl k_ik - h_il k_jk - h_jk k_il."""
    h = check_symmetric(h, "h")
    k = check_symmetric(k, "k")
    out = (np.einsum("...ik,...jl->...ijkl", h, k)
           + np.einsum("...jl,...ik->...ijkl", h, k)
           - np.einsum("...il,...jk->...ijkl", h, k)
           - np.einsum("...jk,...il->...ijkl", h, k))
    return out


def _inverse_frame_transform(rm_frame, f):
    """Push frame components back to the original basis (inverse of pulling
    back along frame columns F): contract all four slots with F^-1 rows."""
    finv_t = np.transpose(np.linalg.inv(f), (0, 2, 1))
    return _kernels.frame_transform(rm_frame, finv_t)


@dataclass(frozen=True)
class CurvatureDecomposition:
    """Full pointwise splitting of an algebraic curvature tensor.

    Tensor fields are in the basis of the input; scalars are invariant.
    ``w_plus_block``/``w_minus_block`` are the 3x3 operator blocks on the
    (anti-)self-dual two-form bundles in an oriented orthonormal frame.
    """

    g: np.ndarray
    orientation: int
    rm: np.ndarray
    scalar: np.ndarray          # R
    ric: np.ndarray
    e: np.ndarray               # trace-free Ricci
    p: np.ndarray               # Schouten-type tensor
    w: np.ndarray               # Weyl, (0,4)
    w_plus: np.ndarray          # self-dual part, (0,4)
    w_minus: np.ndarray
    w_plus_block: np.ndarray
    w_minus_block: np.ndarray
    b_block: np.ndarray         # mixed curvature-operator block (encodes E)
    norm2_w_plus: np.ndarray    # operator Frobenius norm squared
    norm2_w_minus: np.ndarray
    e2: np.ndarray              # |E|^2
    tr_e3: np.ndarray
    det_w_plus: np.ndarray
    det_w_minus: np.ndarray
    wee: np.ndarray             # W_ijkl E_ik E_jl
    w_plus_ee: np.ndarray
    w_minus_ee: np.ndarray
    sigma2: np.ndarray          # sigma_2 of g^-1 P
    f_plus: np.ndarray          # R - 2 sqrt(6) ||W+||
    f_plus_neg: np.ndarray      # min(F+, 0)
    batched: bool = field(repr=False, default=True)

    @property
    def norm2_w(self):
        return self.norm2_w_plus + self.norm2_w_minus


def decompose(rm, metric: Metric4, check=False) -> CurvatureDecomposition:
    """Split ``rm`` into scalar, trace-free Ricci and Weyl parts, and project
    the Weyl operator onto the oriented two-form bundles.

    Accepts a single tensor or a batch with one leading axis; ``metric.g``
    broadcasts the same way.  ``check=True`` validates the curvature
    symmetries first.
    """
    if isinstance(rm, AlgebraicCurvature):
        rm = rm.components
    rm, batched = _as_batch(rm, 4)
    if check:
        dev = curvature_symmetry_deviation(rm)
        if dev > _CURV_TOL:
            raise ContractViolation(f"curvature symmetries violated (relative {dev:.3e})")
    n = rm.shape[0]
    g, _ = _as_batch(metric.g, 2)
    g = np.broadcast_to(g, (n, 4, 4))

    identity_metric = bool(np.all(g == np.eye(4)))
    ginv = np.broadcast_to(np.eye(4), (n, 4, 4)) if identity_metric else np.linalg.inv(g)

    ric = np.einsum("nik,nijkl->njl", ginv, rm)
    scalar = np.einsum("njl,njl->n", ginv, ric)
    e = ric - scalar[:, None, None] / 4.0 * g
    p = 0.5 * (ric - scalar[:, None, None] / 6.0 * g)
    w4 = rm - kulkarni_nomizu(p, g)

    if identity_metric:
        f = np.broadcast_to(np.eye(4), (n, 4, 4))
        if metric.orientation < 0:
            f = f.copy()
            f[:, :, 3] = -f[:, :, 3]
        rm_f = rm if metric.orientation > 0 else _kernels.frame_transform(rm, f)
        w4_f = w4 if metric.orientation > 0 else _kernels.frame_transform(w4, f)
        e_f = e if metric.orientation > 0 else np.einsum("nia,nij,njb->nab", f, e, f)
        p_f = p if metric.orientation > 0 else np.einsum("nia,nij,njb->nab", f, p, f)
    else:
        f = np.linalg.inv(np.swapaxes(np.linalg.cholesky(g), -1, -2))
        if metric.orientation < 0:
            f = f.copy()
            f[:, :, 3] = -f[:, :, 3]
        rm_f = _kernels.frame_transform(rm, f)
        w4_f = _kernels.frame_transform(w4, f)
        e_f = np.einsum("nia,nij,njb->nab", f, e, f)
        p_f = np.einsum("nia,nij,njb->nab", f, p, f)

    op = _kernels.rm_to_op(rm_f)
    a_block = op[:, :3, :3]
    c_block = op[:, 3:, 3:]
    b_block = op[:, :3, 3:]
    wp_block = a_block - (scalar / 12.0)[:, None, None] * np.eye(3)
    wm_block = c_block - (scalar / 12.0)[:, None, None] * np.eye(3)

    wp4_f = _kernels.op_to_rm(_embed_block(wp_block, plus=True))
    wm4_f = _kernels.op_to_rm(_embed_block(wm_block, plus=False))

    if identity_metric and metric.orientation > 0:
        w_plus, w_minus = wp4_f, wm4_f
    else:
        w_plus = _inverse_frame_transform(wp4_f, f)
        w_minus = _inverse_frame_transform(wm4_f, f)

    norm2_wp = np.einsum("nab,nab->n", wp_block, wp_block)
    norm2_wm = np.einsum("nab,nab->n", wm_block, wm_block)
    e2 = np.einsum("nab,nab->n", e_f, e_f)
    tr_e3 = np.einsum("nab,nbc,nca->n", e_f, e_f, e_f)
    wee_val = _kernels.wee(w4_f, e_f)
    wp_ee = _kernels.wee(wp4_f, e_f)
    wm_ee = _kernels.wee(wm4_f, e_f)
    sigma2 = 0.5 * (np.einsum("naa->n", p_f) ** 2 - np.einsum("nab,nab->n", p_f, p_f))
    f_plus = scalar - 2.0 * SQRT6 * np.sqrt(norm2_wp)
    f_plus_neg = np.minimum(f_plus, 0.0)

    dec = CurvatureDecomposition(
        g=_debatch(g, batched), orientation=metric.orientation,
        rm=_debatch(rm, batched), scalar=_debatch(scalar, batched),
        ric=_debatch(ric, batched), e=_debatch(e, batched), p=_debatch(p, batched),
        w=_debatch(w4, batched), w_plus=_debatch(w_plus, batched),
        w_minus=_debatch(w_minus, batched),
        w_plus_block=_debatch(wp_block, batched), w_minus_block=_debatch(wm_block, batched),
        b_block=_debatch(b_block, batched),
        norm2_w_plus=_debatch(norm2_wp, batched), norm2_w_minus=_debatch(norm2_wm, batched),
        e2=_debatch(e2, batched), tr_e3=_debatch(tr_e3, batched),
        det_w_plus=_debatch(np.linalg.det(wp_block), batched),
        det_w_minus=_debatch(np.linalg.det(wm_block), batched),
        wee=_debatch(wee_val, batched), w_plus_ee=_debatch(wp_ee, batched),
        w_minus_ee=_debatch(wm_ee, batched),
        sigma2=_debatch(sigma2, batched),
        f_plus=_debatch(f_plus, batched), f_plus_neg=_debatch(f_plus_neg, batched),
        batched=batched,
    )
    return dec


def _embed_block(block3, plus: bool):
    n = block3.shape[0]
    op = np.zeros((n, 6, 6))
    if plus:
        op[:, :3, :3] = block3
    else:
        op[:, 3:, 3:] = block3
    return op


@dataclass(frozen=True)
class SingerThorpeBlocks:
    """Block form of the curvature operator on self-dual + anti-self-dual
    two-forms: diagonal blocks ``a = W+ + (R/12) Id`` and
    ``c = W- + (R/12) Id``, mixed block ``b``."""

    a: np.ndarray
    c: np.ndarray
    b: np.ndarray
    lam_plus: np.ndarray    # eigenvalues of the trace-free part of a, ascending
    lam_minus: np.ndarray
    b_singular: np.ndarray  # singular values of b, ascending

    @property
    def e2_from_b(self):
        """|E|^2 reconstructed from the mixed block: 4 * sum b_i^2."""
        return 4.0 * np.sum(self.b_singular ** 2, axis=-1)


def singer_thorpe_blocks(rm, metric: Metric4) -> SingerThorpeBlocks:
    """Extract the two-form operator blocks and their spectral data."""
    dec = rm if isinstance(rm, CurvatureDecomposition) else decompose(rm, metric)
    wp, wb = _as_batch(dec.w_plus_block, 2)
    wm, _ = _as_batch(dec.w_minus_block, 2)
    b, _ = _as_batch(dec.b_block, 2)
    scalar = np.atleast_1d(dec.scalar)
    a = wp + (scalar / 12.0)[:, None, None] * np.eye(3)
    c = wm + (scalar / 12.0)[:, None, None] * np.eye(3)
    lam_p = np.linalg.eigvalsh(wp)
    lam_m = np.linalg.eigvalsh(wm)
    bsv = np.sqrt(np.maximum(np.linalg.eigvalsh(b @ np.swapaxes(b, -1, -2)), 0.0))
    return SingerThorpeBlocks(
        a=_debatch(a, wb), c=_debatch(c, wb), b=_debatch(b, wb),
        lam_plus=_debatch(lam_p, wb), lam_minus=_debatch(lam_m, wb),
        b_singular=_debatch(bsv, wb),
    )


def g_k(dec: CurvatureDecomposition, k, r_bar):
    """Pinching aggregate |E|^k + |R - Rbar|^k + ||W-||^k + |min(F+,0)|^k."""
    if r_bar is None:
        raise ValueError("g_k requires the average scalar curvature r_bar")
    e_norm = np.sqrt(dec.e2)
    wm_norm = np.sqrt(dec.norm2_w_minus)
    return (e_norm ** k + np.abs(dec.scalar - r_bar) ** k
            + wm_norm ** k + np.abs(dec.f_plus_neg) ** k)


def scalars(dec: CurvatureDecomposition, r_bar=None):
    """Invariant scalar map of a decomposition.

    The pinching aggregates ``g2/g3/g4/g6`` are included only when the
    average scalar curvature ``r_bar`` is supplied.
    """
    out = {
        "norm_w_plus": np.sqrt(dec.norm2_w_plus),
        "norm_w_minus": np.sqrt(dec.norm2_w_minus),
        "norm2_w_plus": dec.norm2_w_plus,
        "norm2_w_minus": dec.norm2_w_minus,
        "norm2_w": dec.norm2_w,
        "e2": dec.e2,
        "tr_e3": dec.tr_e3,
        "det_w_plus": dec.det_w_plus,
        "det_w_minus": dec.det_w_minus,
        "wee": dec.wee,
        "w_plus_ee": dec.w_plus_ee,
        "w_minus_ee": dec.w_minus_ee,
        "sigma2": dec.sigma2,
        "f_plus": dec.f_plus,
        "f_plus_neg": dec.f_plus_neg,
    }
    if r_bar is not None:
        for k in (2, 3, 4, 6):
            out[f"g{k}"] = g_k(dec, k, r_bar)
    return out
