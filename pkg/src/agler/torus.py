"""Numerics on the torus: stability tests, torus-zero detection and L^2 quadrature.

Two quadrature engines are provided.  ``strict_gram`` uses the trapezoid rule
on a uniform grid (evaluated by FFT), which converges geometrically when the
denominator has no zeros on the torus.  ``boundary_gram`` handles denominators
with isolated torus zeros: the z2-integral is done exactly (H^2 norm of a
rational function in one variable, head sum plus an observability Gramian for
the tail) and the z1-integral adaptively, with dyadic rings around each zero.
The ring increments double as a divergence test.
"""

import numpy as np
from scipy import integrate, linalg, optimize

from .errors import QuadratureNonConvergent

IN, OUT, UNCERTAIN = "IN", "OUT", "UNCERTAIN"


def dense_stack(vectors, box):
    """Stack numerator vectors (lists of Poly) into an array (k, N, b1+1, b2+1)."""
    if not vectors:
        return np.zeros((0, 1) + tuple(b + 1 for b in box), dtype=complex)
    return np.array([[q.to_dense(box) for q in vec] for vec in vectors])


def fft_values(coeffs, M):
    """Values of dense coefficient arrays (last two axes) on the M x M torus grid.

    Entry ``[..., a, b]`` is the value at ``(exp(2 pi i a/M), exp(2 pi i b/M))``.
    """
    coeffs = np.asarray(coeffs)
    if coeffs.shape[-1] > M or coeffs.shape[-2] > M:
        raise ValueError("grid too coarse for the polynomial degree")
    return np.fft.ifft2(coeffs, s=(M, M)) * (M * M)


def torus_grid(M):
    th = 2 * np.pi * np.arange(M) / M
    return np.exp(1j * th)


# ---------------------------------------------------------------------------
# stability


def _slice_zero_counts(p, var, points, radius, contour):
    """Number of zeros of p in |z_var| <= radius with the other variable fixed at each point."""
    other = 1 - var
    dense = p.to_dense()
    if var == 1:
        dense = dense.T
    # coefficient arrays in z_var for every slice: shape (npts, deg+1)
    pw = np.power.outer(points, np.arange(dense.shape[1]))
    slices = pw @ dense.T
    deg = slices.shape[1] - 1
    if deg == 0:
        return np.zeros(len(points), dtype=int)
    s = radius * np.exp(2j * np.pi * np.arange(contour) / contour)
    vals = np.power.outer(s, np.arange(deg + 1)) @ slices.T  # (contour, npts)
    steps = np.angle(np.roll(vals, -1, axis=0) / vals)
    counts = np.rint(steps.sum(axis=0) / (2 * np.pi)).astype(int)
    bad = (np.abs(steps).max(axis=0) > np.pi / 4) | ~np.isfinite(steps).all(axis=0)
    for i in np.nonzero(bad)[0]:
        c = slices[i][::-1]
        nz = np.nonzero(np.abs(c) > 1e-14 * np.abs(c).max())[0]
        c = c[nz[0]:]
        roots = np.roots(c) if len(c) > 1 else np.array([])
        counts[i] = int(np.sum(np.abs(roots) <= radius))
    del other
    return counts


def stability_check(p, slices=257, contour=4096, eps=1e-7):
    """Check that p has no zeros in the open bidisk.

    For each variable, the zeros of the one-variable slices at ``slices`` torus
    points and at the origin are counted inside the disk of radius ``1 - eps``.
    Returns ``(ok, witness)``; the witness names the first offending slice.
    """
    if p.degree is None:
        return False, {"reason": "zero polynomial"}
    pts = np.concatenate([[0.0], np.exp(2j * np.pi * np.arange(slices) / slices)])
    for var in (0, 1):
        counts = _slice_zero_counts(p, var, pts, 1 - eps, contour)
        if counts.any():
            i = int(np.nonzero(counts)[0][0])
            return False, {"variable": f"z{var + 1}", "fixed": [pts[i].real, pts[i].imag],
                           "zeros_inside": int(counts[i])}
    return True, None


# ---------------------------------------------------------------------------
# torus zeros


def torus_zeros(p, grid=512, rtol=1e-6):
    """Locate zeros of p on the torus.

    Scans |p| on a ``grid x grid`` FFT grid, refines every local minimum below
    the gradient bound with a local optimizer, and keeps refined points with
    ``|p| < rtol * ||p||``.  Returns ``(zeros, min_modulus)`` where ``zeros`` is a
    list of angle pairs in [0, 2 pi).
    """
    dense = p.to_dense()
    scale = float(np.linalg.norm(dense))
    vals = np.abs(fft_values(dense, grid))
    j1, j2 = np.meshgrid(np.arange(dense.shape[0]), np.arange(dense.shape[1]), indexing="ij")
    lip = float(np.sum(np.abs(dense) * (j1 + j2))) * (2 * np.pi / grid)
    gmin = float(vals.min())
    loc = np.ones_like(vals, dtype=bool)
    for s1 in (-1, 0, 1):
        for s2 in (-1, 0, 1):
            if s1 or s2:
                loc &= vals <= np.roll(np.roll(vals, s1, 0), s2, 1)
    cand = np.argwhere(loc & (vals <= lip + rtol * scale))
    if len(cand) > 200:
        order = np.argsort(vals[cand[:, 0], cand[:, 1]])
        cand = cand[order[:200]]

    def f(th):
        z1, z2 = np.exp(1j * th[0]), np.exp(1j * th[1])
        return abs(p(z1, z2)) ** 2

    zeros = []
    best = gmin
    for a, b in cand:
        x0 = 2 * np.pi * np.array([a, b]) / grid
        res = optimize.minimize(f, x0, method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-30, "maxiter": 2000})
        val = np.sqrt(max(res.fun, 0.0))
        best = min(best, val)
        if val < rtol * scale:
            th = np.mod(res.x, 2 * np.pi)
            if not any(_angdist(th, z) < 1e-5 for z in zeros):
                zeros.append(th)
    zeros.sort(key=lambda t: (round(t[0], 8), round(t[1], 8)))
    return [tuple(float(x) for x in z) for z in zeros], best


def _angdist(a, b):
    d = np.abs(np.angle(np.exp(1j * (np.asarray(a) - np.asarray(b)))))
    return float(d.max())


# ---------------------------------------------------------------------------
# quadrature for denominators without torus zeros


def strict_gram(num, p_dense, M0=64, tol=1e-10, cap=4096, chunk=1 << 22):
    """Gram matrix ``G[i, j] = <f_j, f_i>`` of ``f_i = num[i] / p`` in L^2 of the torus.

    ``num`` is a dense stack ``(k, N, b1+1, b2+1)``.  The grid size doubles from
    ``M0`` until successive estimates agree to ``tol`` (relative).
    """
    k = num.shape[0]
    if k == 0:
        return np.zeros((0, 0), dtype=complex), 0
    M = max(M0, 4 * (max(num.shape[-2:]) + 1), 4 * (max(p_dense.shape) + 1))
    M = int(2 ** np.ceil(np.log2(M)))
    prev = _trap_gram(num, p_dense, M, chunk)
    while True:
        M *= 2
        if M > cap:
            raise QuadratureNonConvergent("trapezoid rule did not converge", grid=M // 2)
        cur = _trap_gram(num, p_dense, M, chunk)
        err = np.abs(cur - prev).max() / max(np.abs(cur).max(), 1e-300)
        if err < tol:
            return cur, M
        prev = cur


def _trap_gram(num, p_dense, M, chunk):
    k, N = num.shape[:2]
    pv = fft_values(p_dense, M)
    qv = fft_values(num, M)  # (k, N, M, M)
    G = np.zeros((k, k), dtype=complex)
    rows = max(1, chunk // max(1, k * N * M))
    for r0 in range(0, M, rows):
        w = qv[:, :, r0:r0 + rows, :] / pv[r0:r0 + rows, :]
        w = w.reshape(k, -1)
        G += w.conj() @ w.T
    G /= M * M
    return (G + G.conj().T) / 2


# ---------------------------------------------------------------------------
# quadrature for denominators with torus zeros


def near_zero_angles(p_dense, ratio=0.05, grid=256):
    """z1-angles where min over z2 of |p| dips below ``ratio * ||p||`` (local minima).

    Returns ``(angles, relative_min)``.
    """
    vals = np.abs(fft_values(p_dense, grid))
    prof = vals.min(axis=1)
    scale = float(np.linalg.norm(p_dense))
    rel = float(prof.min() / scale)
    loc = (prof <= np.roll(prof, 1)) & (prof <= np.roll(prof, -1)) & (prof < ratio * scale)
    refined = []
    for i in np.nonzero(loc)[0]:
        a = 2 * np.pi * i / grid
        res = optimize.minimize_scalar(lambda th: _slice_min(p_dense, th),
                                       bounds=(a - 2 * np.pi / grid, a + 2 * np.pi / grid),
                                       method="bounded", options={"xatol": 1e-10})
        refined.append(float(res.x))
    return refined, rel


def _slice_min(p_dense, th):
    h = _slice_coeffs(p_dense, np.exp(1j * th))
    s = np.exp(2j * np.pi * np.arange(512) / 512)
    return float(np.abs(np.polyval(h[::-1], s)).min())


def _slice_coeffs(dense, t):
    """Coefficients in z2 (ascending) of a dense bivariate array at z1 = t."""
    pw = t ** np.arange(dense.shape[-2])
    return np.tensordot(dense, pw, axes=([-2], [0]))


def h2_gram_rational(a, h):
    """H^2 Gram of rational functions ``a_i / h`` with h's roots outside the closed disk.

    ``a`` has shape (k, N, m_a) (ascending coefficients), ``h`` shape (m_h,).
    Returns ``G[i, j] = <a_j/h, a_i/h>``.
    """
    h = np.asarray(h, dtype=complex)
    nz = np.nonzero(np.abs(h) > 1e-14 * np.abs(h).max())[0]
    if len(nz) == 0:
        raise QuadratureNonConvergent("denominator slice vanishes identically")
    h = h[:nz[-1] + 1]
    m = len(h) - 1
    k, N, ma = a.shape
    if m == 0:
        c = a.reshape(k, -1) / h[0]
        return c.conj() @ c.T
    K = max(ma, m)
    c = np.zeros((k, N, K), dtype=complex)
    for j in range(K):
        acc = a[:, :, j].copy() if j < ma else np.zeros((k, N), dtype=complex)
        for l in range(1, min(j, m) + 1):
            acc -= h[l] * c[:, :, j - l]
        c[:, :, j] = acc / h[0]
    G = np.einsum("inj,knj->ik", c.conj(), c)
    # tail: c_k = w x_k with x_k = (c_{k-1}, ..., c_{k-m}), x_{k+1} = A x_k
    w = -h[1:] / h[0]
    A = np.zeros((m, m), dtype=complex)
    A[0] = w
    A[1:, :-1] = np.eye(m - 1)
    X = linalg.solve_discrete_lyapunov(A.conj().T, np.outer(w.conj(), w))
    idx = K - 1 - np.arange(m)
    x = np.where(idx >= 0, c[:, :, np.clip(idx, 0, None)], 0)  # (k, N, m)
    G += np.einsum("inu,uv,knv->ik", x.conj(), X, x)
    return G


def _inner_gram(num, p_dense, theta):
    t = np.exp(1j * theta)
    a = _slice_coeffs(num, t)
    h = _slice_coeffs(p_dense, t)
    return h2_gram_rational(a, h)


def _gl_interval(func, lo, hi, nodes):
    x, w = np.polynomial.legendre.leggauss(nodes)
    mid, half = (hi + lo) / 2, (hi - lo) / 2
    acc = 0
    for xi, wi in zip(x, w):
        acc = acc + wi * func(mid + half * xi)
    return acc * half


def boundary_gram(num, p_dense, zero_angles, levels=18, ring_nodes=20, width=0.5, epsrel=1e-12, breaks=()):
    """Gram matrix for a denominator with zeros on (or very near) the torus.

    ``zero_angles`` are the z1-angles of the torus zeros.  Without zeros the
    z1-integral is split at ``breaks`` (angles of near-zeros) and done
    adaptively.  Returns
    ``(G, rings)`` where ``rings`` is a list of ring-increment matrices per
    level (summed over zeros and sides), ordered from coarse to fine.  The
    value ``G`` includes a geometric tail extrapolation of the finest rings
    restricted to directions that appear convergent.
    """
    k = num.shape[0]
    f = lambda th: _inner_gram(num, p_dense, th) / (2 * np.pi)  # noqa: E731
    zs = sorted({round(float(np.mod(z, 2 * np.pi)), 10) for z in zero_angles})
    if not zs:
        edges = sorted({0.0, 2 * np.pi, *[float(np.mod(b, 2 * np.pi)) for b in breaks]})
        G = np.zeros((k, k), dtype=complex)
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi - lo > 1e-12:
                val, _ = integrate.quad_vec(f, lo, hi, epsrel=epsrel, epsabs=0, limit=400)
                G += val
        return (G + G.conj().T) / 2, []
    if len(zs) > 1:
        gaps = np.diff(zs + [zs[0] + 2 * np.pi])
        width = min(width, gaps.min() / 4)
    G = np.zeros((k, k), dtype=complex)
    for i, z in enumerate(zs):
        nxt = zs[(i + 1) % len(zs)] + (2 * np.pi if i + 1 == len(zs) else 0)
        lo, hi = z + width, nxt - width
        if hi > lo:
            val, _ = integrate.quad_vec(f, lo, hi, epsrel=epsrel, epsabs=0, limit=400)
            G += val
    rings = []
    s = width
    for _ in range(levels):
        R = np.zeros((k, k), dtype=complex)
        for z in zs:
            R += _gl_interval(f, z + s / 2, z + s, ring_nodes)
            R += _gl_interval(f, z - s, z - s / 2, ring_nodes)
        R = (R + R.conj().T) / 2
        rings.append(R)
        G += R
        s /= 2
    return (G + G.conj().T) / 2, rings


def ring_verdicts(rings, in_ratio=0.75, out_ratio=0.9):
    """Classify directions of the coefficient space by ring-increment decay.

    Returns ``(vectors, verdicts, ratios)``: the eigenvectors of the finest ring
    matrix (columns) with a verdict for each.  A direction is IN when the last
    increments shrink by a factor of at most ``in_ratio`` per level, OUT when
    they shrink by ``out_ratio`` or less (or grow).
    """
    R1, R2 = rings[-2], rings[-1]
    ev, V = np.linalg.eigh(R2)
    scale = max(np.abs(np.diag(rings[0])).max(), 1e-300)
    verdicts, ratios = [], []
    for j in range(V.shape[1]):
        v = V[:, j]
        e1 = float(np.real(v.conj() @ R1 @ v))
        e2 = float(np.real(v.conj() @ R2 @ v))
        if e2 <= 1e-15 * scale:
            r = 0.0
        else:
            r = e2 / max(e1, 1e-300)
        ratios.append(r)
        if r <= in_ratio:
            verdicts.append(IN)
        elif r >= out_ratio:
            verdicts.append(OUT)
        else:
            verdicts.append(UNCERTAIN)
    return V, verdicts, ratios


def tail_correction(rings, V, verdicts):
    """Geometric extrapolation of the remaining ring contributions on IN directions."""
    R1, R2 = rings[-2], rings[-1]
    P = V[:, [i for i, v in enumerate(verdicts) if v == IN]]
    if P.shape[1] == 0:
        return np.zeros_like(R2)
    B1 = P.conj().T @ R1 @ P
    B2 = P.conj().T @ R2 @ P
    r = np.clip(np.real(np.trace(B2)) / max(np.real(np.trace(B1)), 1e-300), 0.0, 0.75)
    tail = B2 * (r / (1 - r))
    return P @ tail @ P.conj().T
