"""Pure-numpy implementations of the hot kernels.

All functions are batch-first: the leading axis enumerates samples or
quadrature nodes.  The compiled backend in ``_core`` exposes the same
signatures; :mod:`ricci_lab._kernels` picks one at import time.
"""

import numpy as np

BACKEND_NAME = "numpy"


def _two_form_basis() -> np.ndarray:
    """Oriented orthonormal basis of two-forms, self-dual triple first.

    omega[a] is the antisymmetric 4x4 component matrix of the a-th basis
    two-form, normalised so <w, w> = (1/2) w_ij w_ij = 1.  Ordering:
    (e0^e1 +- e2^e3, e0^e2 +- e3^e1, e0^e3 +- e1^e2) / sqrt(2).
    """
    def wedge(p, q):
        m = np.zeros((4, 4))
        m[p, q] = 1.0
        m[q, p] = -1.0
        return m

    s = 1.0 / np.sqrt(2.0)
    pairs = [((0, 1), (2, 3)), ((0, 2), (3, 1)), ((0, 3), (1, 2))]
    plus = [s * (wedge(*a) + wedge(*b)) for a, b in pairs]
    minus = [s * (wedge(*a) - wedge(*b)) for a, b in pairs]
    return np.stack(plus + minus)


OMEGA = _two_form_basis()
OMEGA.setflags(write=False)


def rm_to_op(rm: np.ndarray) -> np.ndarray:
    """Curvature operator on two-forms: op_ab = (1/4) Rm_ijkl w^a_ij w^b_kl.

    ``rm`` holds orthonormal-frame components, shape (n, 4, 4, 4, 4).
    """
    return 0.25 * np.einsum("nijkl,aij,bkl->nab", rm, OMEGA, OMEGA, optimize=True)


def op_to_rm(op: np.ndarray) -> np.ndarray:
    """Inverse of :func:`rm_to_op`: Rm_ijkl = op_ab w^a_ij w^b_kl."""
    return np.einsum("nab,aij,bkl->nijkl", op, OMEGA, OMEGA, optimize=True)


def wee(w4: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Contraction W_ijkl E_ik E_jl in an orthonormal frame."""
    return np.einsum("nijkl,nik,njl->n", w4, e, e, optimize=True)


def frame_transform(rm: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Pull a (0,4) tensor back along frame columns: Rm'_abcd = Rm_ijkl F_ia F_jb F_kc F_ld."""
    out = np.einsum("nijkl,nia->najkl", rm, f)
    out = np.einsum("najkl,njb->nabkl", out, f)
    out = np.einsum("nabkl,nkc->nabcl", out, f)
    return np.einsum("nabcl,nld->nabcd", out, f)


def riemann_from_derivs(g: np.ndarray, ginv: np.ndarray, dg: np.ndarray,
                        d2g: np.ndarray) -> np.ndarray:
    """(0,4) Riemann tensor from pointwise metric jets.

    Layout: dg[n,d,i,j] = d_d g_ij and d2g[n,d,e,i,j] = d_d d_e g_ij.
    Sign convention: Rm[n,i,j,i,j] > 0 on the round sphere (sectional
    curvature of coordinate planes, up to metric factors).
    """
    # Christoffel symbols of the first kind: Gl[m,i,j] = (1/2)(d_i g_mj + d_j g_mi - d_m g_ij)
    gl = 0.5 * (np.einsum("nimj->nmij", dg) + np.einsum("njmi->nmij", dg)
                - np.einsum("nmij->nmij", dg))
    gamma = np.einsum("nlm,nmij->nlij", ginv, gl)
    # d_k Gamma^l_ij = d_k(g^lm) Gl_mij + g^lm d_k Gl_mij
    dginv = -np.einsum("nla,nkab,nbm->nklm", ginv, dg, ginv)
    dgl = 0.5 * (np.einsum("nkimj->nkmij", d2g) + np.einsum("nkjmi->nkmij", d2g)
                 - np.einsum("nkmij->nkmij", d2g))
    dgamma = (np.einsum("nklm,nmij->nklij", dginv, gl)
              + np.einsum("nlm,nkmij->nklij", ginv, dgl))
    # R^l_kij = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_ia Gamma^a_jk - Gamma^l_ja Gamma^a_ik
    r_up = (np.einsum("niljk->nlkij", dgamma) - np.einsum("njlik->nlkij", dgamma)
            + np.einsum("nlia,najk->nlkij", gamma, gamma)
            - np.einsum("nlja,naik->nlkij", gamma, gamma))
    # Lower and reorder; overall sign fixed so coordinate-plane sectional
    # curvatures of the round sphere come out positive.
    r_low = np.einsum("nml,nlkij->nmkij", g, r_up)
    return -np.einsum("nlkij->nijkl", r_low)
