"""Randomized verification of the pointwise algebraic inequalities.

Samples are drawn with a counter-based generator (Philox) and an inverse-CDF
normal transform, consuming a fixed number of stream positions per sample.
Sample ``i`` of a campaign therefore depends only on ``(seed, i)``: chunked,
parallel and serial runs produce bitwise-identical results.

Curvature tensors are sampled directly in curvature-operator block form
(self-dual block, anti-self-dual block, mixed block, scalar part), which
satisfies every algebraic curvature symmetry by construction, then pushed
through the full decomposition so the checks exercise the same code path as
every other consumer.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import ndtri

from . import _kernels
from ._util import worker_count
from .curvature import SQRT6, Metric4, decompose, singer_thorpe_blocks
from .errors import ContractViolation

TENSOR_DRAWS = 26     # 6 + 6 + 9 normals, 1 scalar, 4 block amplitudes
SHARP33_DRAWS = 11    # 6 + 3 normals, 2 amplitudes
YOUNG_DRAWS = 3

_SLACK = 1e-12


@dataclass(frozen=True)
class FuzzConfig:
    seed: int
    samples: int
    scale: float = 1.0
    report_top_k: int = 5
    chunk: int = 20000

    def __post_init__(self):
        if self.samples < 1:
            raise ContractViolation("samples must be >= 1")
        if not self.scale >= 0:
            raise ContractViolation("scale must be non-negative")


_RNG_BLOCK = 4096


def _stream(seed, tag, start, count, width):
    """Uniform draws for samples [start, start+count), ``width`` per sample.

    Samples live in fixed blocks of 4096, each generated by a counter-based
    generator keyed on (seed, tag, block index); sample ``i`` is therefore a
    pure function of (seed, i) no matter how a campaign is chunked.
    """
    first = start // _RNG_BLOCK
    last = (start + count - 1) // _RNG_BLOCK
    parts = []
    for blk in range(first, last + 1):
        key = np.random.SeedSequence(entropy=int(seed),
                                     spawn_key=(int(tag), int(blk)))
        block = np.random.Generator(np.random.Philox(key)).random(
            (_RNG_BLOCK, width), dtype=np.float64)
        lo = max(start, blk * _RNG_BLOCK) - blk * _RNG_BLOCK
        hi = min(start + count, (blk + 1) * _RNG_BLOCK) - blk * _RNG_BLOCK
        parts.append(block[lo:hi])
    return np.concatenate(parts) if len(parts) > 1 else parts[0]


def _normals(u):
    return ndtri(np.clip(u, 1e-300, 1.0 - 1e-16))


def _sym3_from_six(vals):
    """Symmetric trace-free 3x3 from six normal draws (diag then upper)."""
    n = vals.shape[0]
    m = np.zeros((n, 3, 3))
    m[:, 0, 0], m[:, 1, 1], m[:, 2, 2] = vals[:, 0], vals[:, 1], vals[:, 2]
    m[:, 0, 1] = m[:, 1, 0] = vals[:, 3]
    m[:, 0, 2] = m[:, 2, 0] = vals[:, 4]
    m[:, 1, 2] = m[:, 2, 1] = vals[:, 5]
    tr = np.trace(m, axis1=1, axis2=2) / 3.0
    m[:, 0, 0] -= tr
    m[:, 1, 1] -= tr
    m[:, 2, 2] -= tr
    return m


def sample_blocks(seed, start, count, scale):
    """Curvature-operator blocks for samples [start, start+count)."""
    u = _stream(seed, 0, start, count, TENSOR_DRAWS)
    normals = _normals(u[:, :22])
    amps = scale * 10.0 ** (2.0 * u[:, 22:26] - 1.0)
    wp = _sym3_from_six(normals[:, 0:6]) * amps[:, 0, None, None]
    wm = _sym3_from_six(normals[:, 6:12]) * amps[:, 1, None, None]
    b = normals[:, 12:21].reshape(count, 3, 3) * amps[:, 2, None, None]
    r = normals[:, 21] * amps[:, 3]
    return wp, wm, b, r


def assemble(wp, wm, b, r):
    """Curvature tensor from operator blocks; exact symmetries by construction."""
    n = len(r)
    op = np.zeros((n, 6, 6))
    eye = np.eye(3)
    op[:, :3, :3] = wp + (r / 12.0)[:, None, None] * eye
    op[:, 3:, 3:] = wm + (r / 12.0)[:, None, None] * eye
    op[:, :3, 3:] = b
    op[:, 3:, :3] = np.swapaxes(b, 1, 2)
    return _kernels.op_to_rm(op)


def sample_curvature(seed, scale=1.0, index=0):
    """The curvature tensor of sample ``index`` of the ``seed`` stream."""
    wp, wm, b, r = sample_blocks(seed, index, 1, scale)
    return assemble(wp, wm, b, r)[0]


# ---------------------------------------------------------------------------
# individual checks

def check_wee(dec):
    """Margin of WEE <= (sqrt6/3)(||W+|| + ||W-||) |E|^2 (non-negative = holds)."""
    rhs = (SQRT6 / 3.0) * (np.sqrt(dec.norm2_w_plus)
                           + np.sqrt(dec.norm2_w_minus)) * dec.e2
    return rhs - dec.wee


def check_sharp33(a_mat, x, tol=1e-12):
    """Margin of |A(X,X)| <= (sqrt6/3) ||A|| |X|^2 for trace-free symmetric A."""
    a_mat = np.asarray(a_mat, dtype=float)
    x = np.asarray(x, dtype=float)
    tr = np.trace(np.atleast_3d(a_mat.reshape(-1, 3, 3)), axis1=1, axis2=2)
    if np.max(np.abs(tr)) > tol * max(1.0, float(np.max(np.abs(a_mat)))):
        raise ContractViolation("sharp33 requires a trace-free matrix")
    quad = np.abs(np.einsum("...i,...ij,...j->...", x, a_mat, x))
    norm = np.sqrt(np.einsum("...ij,...ij->...", a_mat, a_mat))
    x2 = np.einsum("...i,...i->...", x, x)
    return (SQRT6 / 3.0) * norm * x2 - quad


def sharp33_extremizer():
    """Closed-form equality case: spectrum pattern (2,-1,-1)/sqrt6 with X on
    the top eigenvector."""
    a = np.diag([2.0, -1.0, -1.0]) / SQRT6
    x = np.array([1.0, 0.0, 0.0])
    return a, x


def check_block_bound(blocks, dec):
    """Two-step bound through the operator blocks.

    Returns the margin of WEE <= 4 (sum lam+_i b_i^2 + sum lam-_i b_i^2)
    (eigenvalues and singular values both ascending), the margin of the
    second step chaining it to (sqrt6/3)(||W+||+||W-||)|E|^2, and the
    residual of the identity |E|^2 = 4 sum b_i^2.
    """
    b2 = blocks.b_singular ** 2
    paired = 4.0 * (np.sum(blocks.lam_plus * b2, axis=-1)
                    + np.sum(blocks.lam_minus * b2, axis=-1))
    chain_rhs = (SQRT6 / 3.0) * (np.sqrt(dec.norm2_w_plus)
                                 + np.sqrt(dec.norm2_w_minus)) * dec.e2
    return {
        "wee_margin": paired - dec.wee,
        "chain_margin": chain_rhs - paired,
        "e2_identity_residual": dec.e2 - 4.0 * np.sum(b2, axis=-1),
    }


def check_young(a, b, p, q, tol=1e-12):
    """Margin of a b <= a^p / p + b^q / q for conjugate exponents."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise ContractViolation("young requires non-negative arguments")
    p = float(p)
    q = float(q)
    if p <= 1.0 or abs(1.0 / p + 1.0 / q - 1.0) > tol:
        raise ContractViolation("young requires conjugate exponents with p > 1")
    return a ** p / p + b ** q / q - a * b


# ---------------------------------------------------------------------------
# campaigns

@dataclass
class InequalityResult:
    name: str
    checked: int
    min_margin: float
    min_margin_normalized: float
    max_violation: float          # max(0, -normalized margin)
    passed: bool
    witnesses: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


@dataclass
class FuzzReport:
    config: FuzzConfig
    backend: str
    results: dict

    def to_dict(self):
        return {"config": asdict(self.config), "backend": self.backend,
                "results": {k: v.to_dict() for k, v in self.results.items()}}

    def to_json(self, indent=None):
        return json.dumps(self.to_dict(), indent=indent)

    @property
    def passed(self):
        return all(r.passed for r in self.results.values())


def _merge(name, chunks, top_k, slack=_SLACK):
    margins = np.concatenate([c[0] for c in chunks])
    normalized = np.concatenate([c[1] for c in chunks])
    indices = np.concatenate([c[2] for c in chunks])
    order = np.argsort(margins, kind="stable")[:top_k]
    witnesses = [{"index": int(indices[i]), "margin": float(margins[i]),
                  "normalized_margin": float(normalized[i])} for i in order]
    min_norm = float(np.min(normalized))
    return InequalityResult(
        name=name, checked=len(margins),
        min_margin=float(np.min(margins)),
        min_margin_normalized=min_norm,
        max_violation=max(0.0, -min_norm),
        passed=bool(min_norm >= -slack),
        witnesses=witnesses,
    )


def _tensor_chunk(cfg, start, count):
    wp, wm, b, r = sample_blocks(cfg.seed, start, count, cfg.scale)
    rm = assemble(wp, wm, b, r)
    dec = decompose(rm, Metric4.identity())
    blocks = singer_thorpe_blocks(dec, None)
    idx = np.arange(start, start + count)

    def norm_to(margin, lhs, rhs):
        scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
        return margin / scale

    wee_rhs = (SQRT6 / 3.0) * (np.sqrt(dec.norm2_w_plus)
                               + np.sqrt(dec.norm2_w_minus)) * dec.e2
    m_wee = wee_rhs - dec.wee
    bb = check_block_bound(blocks, dec)
    paired = bb["wee_margin"] + dec.wee
    out = {
        "wee": (m_wee, norm_to(m_wee, dec.wee, wee_rhs), idx),
        "block_bound": (bb["wee_margin"], norm_to(bb["wee_margin"], dec.wee, paired), idx),
        "block_chain": (bb["chain_margin"], norm_to(bb["chain_margin"], paired, wee_rhs), idx),
        "block_identity": (-np.abs(bb["e2_identity_residual"]),
                           norm_to(-np.abs(bb["e2_identity_residual"]), dec.e2, dec.e2), idx),
    }
    return out


def _sharp33_chunk(cfg, start, count):
    u = _stream(cfg.seed, 1, start, count, SHARP33_DRAWS)
    normals = _normals(u[:, :9])
    amps = cfg.scale * 10.0 ** (2.0 * u[:, 9:11] - 1.0)
    a_mat = _sym3_from_six(normals[:, :6]) * amps[:, 0, None, None]
    x = normals[:, 6:9] * amps[:, 1, None]
    quad = np.abs(np.einsum("ni,nij,nj->n", x, a_mat, x))
    norm = np.sqrt(np.einsum("nij,nij->n", a_mat, a_mat))
    x2 = np.einsum("ni,ni->n", x, x)
    rhs = (SQRT6 / 3.0) * norm * x2
    margin = rhs - quad
    scale = np.maximum(1.0, np.maximum(quad, rhs))
    idx = np.arange(start, start + count)
    return {"sharp33": (margin, margin / scale, idx)}


_YOUNG_EXPONENTS = np.array([1.5, 2.0, 3.0])


def _young_chunk(cfg, start, count):
    u = _stream(cfg.seed, 2, start, count, YOUNG_DRAWS)
    a = cfg.scale * np.abs(_normals(u[:, 0]))
    b = cfg.scale * np.abs(_normals(u[:, 1]))
    p = _YOUNG_EXPONENTS[(u[:, 2] * len(_YOUNG_EXPONENTS)).astype(int) % 3]
    q = p / (p - 1.0)
    margin = a ** p / p + b ** q / q - a * b
    scale = np.maximum(1.0, np.maximum(a * b, a ** p / p + b ** q / q))
    idx = np.arange(start, start + count)
    return {"young": (margin, margin / scale, idx)}


_CAMPAIGNS = {
    "tensor": (_tensor_chunk, ("wee", "block_bound", "block_chain", "block_identity")),
    "sharp33": (_sharp33_chunk, ("sharp33",)),
    "young": (_young_chunk, ("young",)),
}


def run_campaign(cfg: FuzzConfig, families=("tensor", "sharp33", "young")) -> FuzzReport:
    """Run the configured number of samples for each inequality family.

    Chunks are dispatched to a thread pool (capped by RICCI_LAB_THREADS)
    and reduced in a fixed order, so results depend only on the config.
    """
    results = {}
    starts = list(range(0, cfg.samples, cfg.chunk))
    workers = worker_count()
    for family in families:
        runner, names = _CAMPAIGNS[family]
        per_name = {n: [] for n in names}

        def job(lo):
            return runner(cfg, lo, min(cfg.chunk, cfg.samples - lo))

        if workers > 1 and len(starts) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                chunk_outputs = list(pool.map(job, starts))
        else:
            chunk_outputs = [job(lo) for lo in starts]
        for out in chunk_outputs:
            for n in names:
                per_name[n].append(out[n])
        for n in names:
            results[n] = _merge(n, per_name[n], cfg.report_top_k)
    return FuzzReport(config=cfg, backend=_kernels.BACKEND, results=results)
