"""L^2(T^2) geometry of the subspaces: Gram matrices, orthonormal frames, kernels.

Kernels are stored as frames ``f_i = q_i / p``; the kernel value is
``K(z, w) = sum_i f_i(z) f_i(w)^*``.  With the convention used throughout,

    1 - phi(z) phi(w)^* = (1 - z1 conj(w1)) A2(z, w) + (1 - z2 conj(w2)) A1(z, w),

and the canonical pairs are (A1, A2) = (E1, F2) and (F1, E2).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NotAglerPair, NotNested, PoleHit
from .poly import Poly
from .subspaces import basis as subspace_basis
from .torus import boundary_gram, dense_stack, near_zero_angles, ring_verdicts, strict_gram, tail_correction

# below this ratio of min|p| to ||p|| on the torus the trapezoid rule converges
# too slowly and the iterated quadrature is used instead
NEAR_ZERO = 0.05
# initial FFT grid for Gram quadrature on strictly stable denominators (doubled until converged)
FFT_START = 64


@dataclass
class KernelRep:
    label: str
    frame: list  # list of numerator columns (lists of N Poly)
    p: Poly
    gram_residual: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def dim(self):
        return len(self.frame)

    @property
    def N(self):
        return len(self.frame[0]) if self.frame else self.info.get("N", 1)

    def values(self, z1, z2):
        """Frame values as an array (..., N, dim)."""
        z1 = np.asarray(z1, dtype=complex)
        z2 = np.asarray(z2, dtype=complex)
        shape = np.broadcast(z1, z2).shape
        if not self.frame:
            return np.zeros(shape + (self.N, 0), dtype=complex)
        pv = np.asarray(self.p(z1, z2))
        if np.any(np.abs(pv) < 1e-14 * max(self.p.norm(), 1e-300)):
            raise PoleHit("kernel frame evaluated at a zero of p")
        vals = np.array([[np.broadcast_to(q(z1, z2), shape) for q in col] for col in self.frame])
        vals = np.moveaxis(vals, (0, 1), (-1, -2))
        return vals / pv[..., None, None]

    def to_json(self):
        from .poly import poly_to_json

        return {"label": self.label, "dim": self.dim,
                "frame": [[poly_to_json(q) for q in col] for col in self.frame],
                "frame_text": [[str(q) for q in col] for col in self.frame],
                "denominator": str(self.p),
                "gram_residual": float(self.gram_residual)}


def gram(vectors, p, zeros=None, box=None):
    """Hermitian Gram matrix ``G[i, j] = <f_j, f_i>`` of ``f_i = vectors[i] / p``.

    ``zeros`` are torus zeros of p (angle pairs); when present the boundary
    quadrature with ring extrapolation is used.
    """
    if hasattr(vectors, "numerators"):
        vectors = vectors.numerators
    if not vectors:
        return np.zeros((0, 0), dtype=complex)
    if box is None:
        degs = [q.degree for v in vectors for q in v if q.degree is not None]
        box = tuple(max(d[i] for d in degs) for i in range(2)) if degs else (0, 0)
    num = dense_stack([[q.as_float() for q in v] for v in vectors], box)
    pd = p.as_float().to_dense()
    if zeros:
        G, rings = boundary_gram(num, pd, [z[0] for z in zeros])
        V, verdicts, _ = ring_verdicts(rings)
        G = G + tail_correction(rings, V, verdicts)
    else:
        breaks, rel = near_zero_angles(pd)
        if rel < NEAR_ZERO:
            G, _ = boundary_gram(num, pd, [], breaks=breaks)
        else:
            G, _ = strict_gram(num, pd, M0=FFT_START)
    return (G + G.conj().T) / 2


def _combine(vectors, C):
    """Columns ``sum_i C[i, k] vectors[i]`` for each column k of C."""
    N = len(vectors[0])
    fl = [[q.as_float() for q in v] for v in vectors]
    out = []
    for k in range(C.shape[1]):
        col = []
        for n in range(N):
            acc = Poly({})
            for i in range(C.shape[0]):
                c = complex(C[i, k])
                if abs(c) > 1e-15:
                    acc = acc + fl[i][n] * c
            col.append(acc.pruned(1e-13))
        out.append(col)
    return out


def _mgs(G, start=None, keep=None, drop_tol=1e-8):
    """Modified Gram-Schmidt (with one re-orthogonalization) in the metric G.

    Returns C with columns the coordinates of the orthonormal vectors.  ``start``
    is an initial orthonormal set (coordinates) that new vectors are made
    orthogonal to but that is not returned.  At most ``keep`` vectors are kept.
    """
    n = G.shape[0]
    basis = [] if start is None else [start[:, j] for j in range(start.shape[1])]
    base_count = len(basis)
    for i in range(n):
        if keep is not None and len(basis) - base_count >= keep:
            break
        v = np.zeros(n, dtype=complex)
        v[i] = 1.0
        norm0 = np.sqrt(max(np.real(v.conj() @ G @ v), 0.0))
        if norm0 == 0:
            continue
        for _ in range(2):
            for u in basis:
                v = v - (u.conj() @ G @ v) * u
        nv = np.sqrt(max(np.real(v.conj() @ G @ v), 0.0))
        if nv <= drop_tol * norm0:
            continue
        basis.append(v / nv)
    out = basis[base_count:]
    return np.array(out).T if out else np.zeros((n, 0), dtype=complex)


def _coords(big_dense, vec_dense):
    """Least-squares coordinates of vectors in the span of big (coefficient space)."""
    A = big_dense.reshape(big_dense.shape[0], -1).T
    b = vec_dense.reshape(vec_dense.shape[0], -1).T
    X, *_ = np.linalg.lstsq(A, b, rcond=None)
    res = np.linalg.norm(A @ X - b) / max(np.linalg.norm(b), 1e-300)
    return X, float(res)


def _shift(vec, j):
    e = (1, 0) if j == 1 else (0, 1)
    return [q.shift(e) for q in vec]


def orth_complement(big, small, shift=None, p=None, zeros=None, label="USER", G_big=None):
    """Orthonormal frame for span(big) minus span(Z_shift * small).

    ``big`` and ``small`` are SubspaceBasis objects (or lists of numerator
    columns over the same denominator ``p``).
    """
    bigv = getattr(big, "numerators", big)
    smallv = getattr(small, "numerators", small)
    if p is None:
        p = big.p
    N = len(bigv[0]) if bigv else (len(smallv[0]) if smallv else 1)
    if shift is not None:
        smallv = [_shift(v, shift) for v in smallv]
    if not bigv:
        if smallv:
            raise NotNested("small space is not contained in an empty space")
        return KernelRep(label, [], p, 0.0, {"N": N})
    degs = [q.degree for v in bigv + smallv for q in v if q.degree is not None]
    box = tuple(max(d[i] for d in degs) for i in range(2))
    bd = dense_stack([[q.as_float() for q in v] for v in bigv], box)
    if G_big is None:
        G_big = gram(bigv, p, zeros, box)
    if smallv:
        sd = dense_stack([[q.as_float() for q in v] for v in smallv], box)
        S, res = _coords(bd, sd)
        if res > 1e-8:
            raise NotNested(f"shifted small space leaves the big space (residual {res:.2e})", residual=res)
        Cs = _mgs(S.conj().T @ G_big @ S)
        start = S @ Cs
    else:
        start = np.zeros((len(bigv), 0), dtype=complex)
    C = _mgs(G_big, start=start, keep=len(bigv) - start.shape[1])
    frame = _combine(bigv, C)
    Gf = C.conj().T @ G_big @ C
    resid = float(np.abs(Gf - np.eye(C.shape[1])).max()) if C.shape[1] else 0.0
    return KernelRep(label, frame, p, resid, {"N": N})


def orthonormal_frame(b, zeros=None, label="G"):
    """Orthonormal frame for the span of a basis."""
    return orth_complement(b, [], p=b.p, zeros=zeros, label=label)


def canonical_kernels(phi, bases=None):
    """Frames for G (K), F1 (K1 - K), F2 (K2 - K), E1 (K1 - Z1 K), E2 (K2 - Z2 K)."""
    bases = bases or {w: subspace_basis(phi, w) for w in ("K", "K1", "K2")}
    zeros = phi.torus_zeros
    K, K1, K2 = bases["K"], bases["K1"], bases["K2"]
    G1 = gram(K1.numerators, phi.p, zeros, _box(K1)) if K1.dim else None
    G2 = gram(K2.numerators, phi.p, zeros, _box(K2)) if K2.dim else None
    out = {
        "G": orth_complement(K, [], p=phi.p, zeros=zeros, label="G"),
        "F1": orth_complement(K1, K, p=phi.p, zeros=zeros, label="F1", G_big=G1),
        "F2": orth_complement(K2, K, p=phi.p, zeros=zeros, label="F2", G_big=G2),
        "E1": orth_complement(K1, K, shift=1, p=phi.p, zeros=zeros, label="E1", G_big=G1),
        "E2": orth_complement(K2, K, shift=2, p=phi.p, zeros=zeros, label="E2", G_big=G2),
    }
    for k in out.values():
        k.info["N"] = phi.N
    return out


def _box(b):
    degs = [q.degree for v in b.numerators for q in v if q.degree is not None]
    return tuple(max(d[i] for d in degs) for i in range(2)) if degs else (0, 0)


def kernel_eval(k, z, w):
    """``sum_i f_i(z) f_i(w)^*`` for single points z, w (N x N)."""
    Fz = k.values(complex(z[0]), complex(z[1]))
    Fw = k.values(complex(w[0]), complex(w[1]))
    return Fz @ Fw.conj().T


def kernel_eval_many(k, Z, W):
    """Kernel values for arrays of points Z, W of shape (m, 2): result (m, N, N)."""
    Fz = k.values(Z[:, 0], Z[:, 1])
    Fw = k.values(W[:, 0], W[:, 1])
    return Fz @ np.conj(np.swapaxes(Fw, -1, -2))


def sample_pairs(n, seed=0, radius=0.95):
    """``n`` pairs (z, w) of points in the bidisk of the given radius, arrays (n, 2)."""
    rng = np.random.default_rng(seed)

    def draw():
        r = radius * np.sqrt(rng.random((n, 2)))
        t = 2 * np.pi * rng.random((n, 2))
        return r * np.exp(1j * t)

    return draw(), draw()


def agler_residuals(phi, A1, A2, Z, W, G=None):
    """Operator-norm residual of the Agler identity at each sample pair.

    With ``G`` given, checks the three-term form
    ``1 - phi phi^* = (1 - z2 w2*) A1 + (1 - z1 w1*) A2 + (1 - z1 w1*)(1 - z2 w2*) G``.
    """
    N = phi.N
    lhs = np.eye(N) - phi(Z[:, 0], Z[:, 1]) @ np.conj(np.swapaxes(phi(W[:, 0], W[:, 1]), -1, -2))
    x = (1 - Z[:, 0] * np.conj(W[:, 0]))[:, None, None]
    y = (1 - Z[:, 1] * np.conj(W[:, 1]))[:, None, None]
    rhs = x * kernel_eval_many(A2, Z, W) + y * kernel_eval_many(A1, Z, W)
    if G is not None:
        rhs = rhs + x * y * kernel_eval_many(G, Z, W)
    return np.linalg.norm(lhs - rhs, ord=2, axis=(-2, -1))


def agler_residual(phi, A1, A2, Z, W, G=None):
    """Max operator-norm residual of the Agler identity over the sample pairs."""
    return float(agler_residuals(phi, A1, A2, Z, W, G).max())


def user_kernel(columns, p, label="USER"):
    """KernelRep from arbitrary (not necessarily orthonormal) frame columns."""
    return KernelRep(label, [list(c) for c in columns], p, float("nan"), {"N": len(columns[0])})


def _block(k, pts):
    """Sampled block matrix [K(z_a, z_b)] of shape (m N, m N)."""
    F = k.values(pts[:, 0], pts[:, 1])  # (m, N, r)
    m, N, r = F.shape
    Fm = F.reshape(m * N, r)
    return Fm @ Fm.conj().T


def maxmin_check(phi, A1, A2, canon, pts, tol_psd=1e-7, tol_sum=1e-7, pre_tol=1e-6, seed=0):
    """Sampled check of the max/min characterization for the Agler pair (A1, A2).

    ``canon`` holds the canonical kernels.  ``G1 = (A1 - F1)/(1 - z1 w1*)``,
    ``G2 = (A2 - F2)/(1 - z2 w2*)``; both must be PSD and sum to G.
    """
    Z, W = sample_pairs(100, seed=seed)
    pre = agler_residual(phi, A1, A2, Z, W)
    if pre > pre_tol:
        raise NotAglerPair(f"Agler identity residual {pre:.2e} exceeds {pre_tol:g}", residual=pre)
    m, N = len(pts), phi.N
    x = 1 - np.outer(pts[:, 0], np.conj(pts[:, 0]))
    y = 1 - np.outer(pts[:, 1], np.conj(pts[:, 1]))
    ex = lambda M: np.kron(M, np.ones((N, N)))  # noqa: E731
    BA1, BA2 = _block(A1, pts), _block(A2, pts)
    BF1, BF2, BG = _block(canon["F1"], pts), _block(canon["F2"], pts), _block(canon["G"], pts)
    G1 = (BA1 - BF1) / ex(x)
    G2 = (BA2 - BF2) / ex(y)

    def min_eig_rel(M):
        M = (M + M.conj().T) / 2
        ev = np.linalg.eigvalsh(M)
        tr = max(np.real(np.trace(M)), 1e-300)
        return float(ev[0] / tr) if np.real(np.trace(M)) > 0 else float(ev[0])

    def rank(M):
        s = np.linalg.svd(M, compute_uv=False)
        return int(np.sum(s > 1e-9 * max(s[0], 1e-300))) if s.size else 0

    sum_err = float(np.abs(G1 + G2 - BG).max())
    e1, e2 = min_eig_rel(G1), min_eig_rel(G2)
    g1, g2 = phi.gdeg
    r1, r2 = rank(BA1), rank(BA2)
    return {
        "agler_residual": pre,
        "G1_min_eig_rel": e1,
        "G2_min_eig_rel": e2,
        "psd": bool(e1 >= -tol_psd and e2 >= -tol_psd),
        "sum_error": sum_err,
        "sum_matches_G": bool(sum_err <= tol_sum),
        "rank_A1": r1,
        "rank_A2": r2,
        "rank_bounds": bool(r1 >= g2 and r2 >= g1),
        "G1": G1,
        "G2": G2,
    }


def span_distance(a, b, box):
    """Distance between coefficient-space projectors of two frames (same denominator)."""
    def proj(frame):
        if not frame:
            return None
        A = dense_stack([[q.as_float() for q in v] for v in frame], box).reshape(len(frame), -1).T
        Qm, R = np.linalg.qr(A)
        return Qm @ Qm.conj().T

    if not a.frame and not b.frame:
        return 0.0
    if len(a.frame) != len(b.frame):
        return float("inf")
    return float(np.abs(proj(a.frame) - proj(b.frame)).max())


def sample_points(m, seed=0, radius=0.9):
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random((m, 2)))
    return r * np.exp(2j * np.pi * rng.random((m, 2)))


__all__ = ["KernelRep", "gram", "orth_complement", "orthonormal_frame", "canonical_kernels", "kernel_eval",
           "kernel_eval_many", "agler_residual", "agler_residuals", "maxmin_check", "user_kernel", "sample_pairs",
           "sample_points", "span_distance"]
