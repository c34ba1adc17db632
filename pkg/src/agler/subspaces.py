"""Bases for the finite-dimensional spaces K, K1, K2 of a rational inner function.

An element of these spaces has the form q/p where q is a column of N
polynomials with degree at most a bound B and Q~ q = p r for some column r of
degree at most B.  The pairs (q, r) form the nullspace of a linear map on
coefficient vectors.  Both q/p and r/p must lie in L^2 of the torus, which is
automatic when p has no torus zeros and is tested numerically otherwise.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConditionalReport, NumericalRankAmbiguity
from .poly import GaussRat, Poly, gradlex_key, grid_monomials
from .torus import IN, OUT, UNCERTAIN, boundary_gram, dense_stack, ring_verdicts

BOUNDS = {"K": (-1, -1), "K1": (0, -1), "K2": (-1, 0)}


def degree_bound(phi, which):
    off = BOUNDS[which]
    return tuple(d + o for d, o in zip(phi.d, off))


@dataclass
class SubspaceBasis:
    which: str
    numerators: list
    r_parts: list
    degree_bound: tuple
    flags: list
    p: Poly
    N: int
    singular_values: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)

    @property
    def dim(self):
        return len(self.numerators)

    def dense(self, box=None):
        box = box or tuple(max(b, 0) for b in self.degree_bound)
        return dense_stack(self.numerators, box)

    def coefficient_projector(self, box):
        """Orthogonal projector onto the span of the numerator coefficient vectors."""
        A = self.dense(box).reshape(self.dim, -1).T
        if A.shape[1] == 0:
            return np.zeros((A.shape[0], A.shape[0]), dtype=complex)
        Qm, _ = np.linalg.qr(A)
        return Qm @ Qm.conj().T

    def to_json(self):
        from .poly import poly_to_json

        return {
            "which": self.which,
            "dim": self.dim,
            "degree_bound": list(self.degree_bound),
            "basis": [[poly_to_json(q) for q in vec] for vec in self.numerators],
            "basis_text": [[str(q) for q in vec] for vec in self.numerators],
            "flags": list(self.flags),
        }


def _conv_block(a, box, out_shape):
    """Matrix of u -> a*u for u in box, embedded into out_shape."""
    ushape = tuple(b + 1 for b in box)
    cols = []
    for idx in np.ndindex(*ushape):
        out = np.zeros(out_shape, dtype=complex)
        sl = tuple(slice(i, i + n) for i, n in zip(idx, a.shape))
        out[sl] = a
        cols.append(out.ravel())
    return np.array(cols).T


def _system(phi, B):
    """Coefficient matrix of (q, r) -> Q~ q - p r, columns ordered q then r."""
    N = phi.N
    d = phi.d
    dp = phi.p.degree
    out_shape = tuple(max(x, y) + b + 1 for x, y, b in zip(d, dp, B))
    Qt = phi.Qt.to_dense(d)
    pd = phi.p.to_dense()
    nb = int(np.prod([b + 1 for b in B]))
    rows = []
    for i in range(N):
        blocks = [_conv_block(Qt[i, n], B, out_shape) for n in range(N)]
        rblocks = [np.zeros((int(np.prod(out_shape)), nb), dtype=complex) for _ in range(N)]
        rblocks[i] = -_conv_block(pd, B, out_shape)
        rows.append(np.hstack(blocks + rblocks))
    return np.vstack(rows)


def _ordering(N, B):
    """Permutation of the q-columns so that monomials come in ascending graded-lex order."""
    monos = list(np.ndindex(*[b + 1 for b in B]))
    pos = {m: i for i, m in enumerate(monos)}
    nb = len(monos)
    order = []
    for m in sorted(monos, key=gradlex_key):
        for n in range(N):
            order.append(n * nb + pos[m])
    return order


def _rref_float(X, npivot_cols, tol=1e-9):
    """Row-reduce the rows of X using pivots among the first ``npivot_cols`` columns."""
    X = np.array(X, dtype=complex)
    k = X.shape[0]
    scale = max(np.abs(X).max(), 1e-300)
    row = 0
    for col in range(npivot_cols):
        if row == k:
            break
        piv = row + int(np.argmax(np.abs(X[row:, col])))
        if abs(X[piv, col]) <= tol * scale:
            continue
        X[[row, piv]] = X[[piv, row]]
        X[row] /= X[row, col]
        for i in range(k):
            if i != row:
                X[i] -= X[i, col] * X[row]
        X[row, col] = 1.0
        row += 1
    X[np.abs(X) < 1e-13 * scale] = 0
    return X[:row]


def _rref_exact(rows, ncols):
    """Exact reduced row echelon form of a list of GaussRat rows."""
    A = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = GaussRat(1) / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    return A[:r], pivots


def _nullspace_exact(M):
    """Exact nullspace (list of GaussRat vectors) of a GaussRat matrix given as rows."""
    ncols = len(M[0]) if M else 0
    R, piv = _rref_exact(M, ncols)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [GaussRat(0)] * ncols
        v[f] = GaussRat(1)
        for row, pc in zip(R, piv):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def _system_exact(phi, B):
    """Same system as :func:`_system` with exact coefficients (rows as lists)."""
    N = phi.N
    monos = list(np.ndindex(*[b + 1 for b in B]))
    nb = len(monos)
    eqs = {}
    zero = GaussRat(0)

    def add(i, k, col, c):
        key = (i, k)
        if key not in eqs:
            eqs[key] = {}
        eqs[key][col] = eqs[key].get(col, zero) + c

    for i in range(N):
        for n in range(N):
            for k, c in phi.Qt[i, n].coeffs.items():
                for j, m in enumerate(monos):
                    add(i, (k[0] + m[0], k[1] + m[1]), n * nb + j, c)
        for k, c in phi.p.coeffs.items():
            for j, m in enumerate(monos):
                add(i, (k[0] + m[0], k[1] + m[1]), (N + i) * nb + j, -c)
    ncols = 2 * N * nb
    rows = []
    for key in sorted(eqs):
        row = [zero] * ncols
        for col, c in eqs[key].items():
            row[col] = c
        if any(row):
            rows.append(row)
    return rows, ncols


def _vectors_to_polys(X, N, B):
    """Split rows (q part then r part, natural monomial order) into Poly columns."""
    monos = list(np.ndindex(*[b + 1 for b in B]))
    nb = len(monos)
    qs, rs = [], []
    for row in X:
        q = [Poly({m: row[n * nb + j] for j, m in enumerate(monos)}) for n in range(N)]
        r = [Poly({m: row[(N + n) * nb + j] for j, m in enumerate(monos)}) for n in range(N)]
        qs.append(q)
        rs.append(r)
    return qs, rs


def raw_basis(phi, which, tol_rank=1e-9, gap=1e3, exact=None):
    """Nullspace of the divisibility system, canonicalized by RREF.

    Returns ``(qs, rs, singular_values)``.  No membership filtering.
    """
    B = degree_bound(phi, which)
    N = phi.N
    if min(B) < 0:
        return [], [], []
    if exact is None:
        exact = phi.is_exact
    nb = int(np.prod([b + 1 for b in B]))
    order = _ordering(N, B)
    perm = order + [N * nb + i for i in order]
    if exact:
        rows, ncols = _system_exact(phi, B)
        # permute columns so the RREF favours low monomials
        rows_p = [[row[c] for c in perm] for row in rows]
        null = _nullspace_exact(rows_p) if rows_p else [
            [GaussRat(int(i == j)) for i in range(ncols)] for j in range(ncols)]
        R, _ = _rref_exact(null, N * nb)
        inv = np.argsort(perm)
        X = [[row[i] for i in inv] for row in R]
        qs, rs = _vectors_to_polys(X, N, B)
        return qs, rs, []
    A = _system(phi, B)[:, perm]
    _, s, vh = np.linalg.svd(A)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol_rank * smax)) if smax > 0 else 0
    if 0 < rank < min(A.shape):
        lo = s[rank]
        if lo > 0 and s[rank - 1] / lo < gap:
            raise NumericalRankAmbiguity(
                f"singular values {s[rank - 1]:.3g} and {lo:.3g} straddle the rank cutoff",
                which=which, sigma=[float(x) for x in s])
    null = vh[rank:].conj()
    if null.shape[0] == 0:
        return [], [], [float(x) for x in s]
    R = _rref_float(null, N * nb)
    inv = np.argsort(perm)
    X = R[:, inv]
    qs, rs = _vectors_to_polys(X, N, B)
    return ([[q.pruned(1e-12) for q in v] for v in qs],
            [[r.pruned(1e-12) for r in v] for v in rs], [float(x) for x in s])


def _combine(vectors, coeffs):
    """Linear combinations sum_i coeffs[i] * vectors[i] of Poly columns."""
    N = len(vectors[0])
    out = []
    for c in coeffs:
        col = []
        for n in range(N):
            acc = Poly({})
            for ci, v in zip(c, vectors):
                if abs(ci) > 0:
                    acc = acc + v[n].as_float() * complex(ci)
            col.append(acc)
        out.append(col)
    return out


def membership_filter(qs, rs, phi, box, levels=18):
    """Keep the directions of span(q) along which q/p and r/p are square integrable.

    Returns ``(qs, rs, flags, info)``.
    """
    if not qs or not phi.torus_zeros:
        return qs, rs, [IN] * len(qs), {}
    zeros = [z[0] for z in phi.torus_zeros]
    pd = phi.p.as_float().to_dense()
    _, rq = boundary_gram(dense_stack(qs, box), pd, zeros, levels=levels)
    _, rr = boundary_gram(dense_stack(rs, box), pd, zeros, levels=levels)
    rings = [a + b for a, b in zip(rq, rr)]
    V, verdicts, ratios = ring_verdicts(rings)
    keep_in = [V[:, j] for j, v in enumerate(verdicts) if v == IN]
    keep_unc = [V[:, j] for j, v in enumerate(verdicts) if v == UNCERTAIN]
    info = {"ratios": [float(r) for r in ratios], "verdicts": verdicts}
    out_q, out_r, flags = [], [], []
    for group, flag in ((keep_in, IN), (keep_unc, UNCERTAIN)):
        if not group:
            continue
        C = np.array(group)  # rows: coefficient vectors over the candidates
        nq = _combine(qs, C)
        nr = _combine(rs, C)
        # canonicalize the group by RREF of the q-coefficients
        flat = np.hstack([dense_stack(nq, box).reshape(len(nq), -1),
                          dense_stack(nr, box).reshape(len(nr), -1)])
        N = len(qs[0])
        nb = int(np.prod([b + 1 for b in box]))
        order = _ordering(N, box)
        perm = order + [N * nb + i for i in order]
        R = _rref_float(flat[:, perm], N * nb)[:, np.argsort(perm)]
        gq, gr = _vectors_to_polys(R, N, box)
        out_q += [[q.pruned(1e-12) for q in v] for v in gq]
        out_r += [[r.pruned(1e-12) for r in v] for v in gr]
        flags += [flag] * len(gq)
    return out_q, out_r, flags, info


def basis(phi, which, tol_rank=1e-9, exact=None):
    """Basis of K (which="K"), K1 or K2 as a :class:`SubspaceBasis`."""
    if which not in BOUNDS:
        raise ValueError(f"unknown space {which!r}")
    B = degree_bound(phi, which)
    qs, rs, s = raw_basis(phi, which, tol_rank=tol_rank, exact=exact)
    verdicts = {}
    if qs and phi.torus_zeros:
        qs, rs, flags, verdicts = membership_filter(qs, rs, phi, B)
    else:
        flags = [IN] * len(qs)
    return SubspaceBasis(which, qs, rs, B, flags, phi.p, phi.N, s, verdicts)


def l2_membership(q, p, zeros=None, levels=18):
    """IN / OUT / UNCERTAIN verdict for the vector q/p (q a list of Poly)."""
    from .torus import torus_zeros

    if isinstance(q, Poly):
        q = [q]
    if zeros is None:
        zeros, _ = torus_zeros(p)
    if not zeros:
        return IN
    box = tuple(max((x.degree or (0, 0))[i] for x in q) for i in range(2))
    _, rings = boundary_gram(dense_stack([q], box), p.as_float().to_dense(), [z[0] for z in zeros],
                             levels=levels)
    _, verdicts, _ = ring_verdicts(rings)
    return verdicts[0]


@dataclass
class DimReport:
    dim_K: int
    dim_K1: int
    dim_K2: int
    dim_K1_minus_K: int
    dim_K2_minus_K: int
    deg1_gtilde: int
    deg2_gtilde: int
    match: bool
    conditional: bool = False

    def to_dict(self):
        return dict(self.__dict__)


def dims_check(phi, bases=None, strict=True):
    """Compare dim(K1 - K), dim(K2 - K) with (deg2, deg1) of the reduced determinant numerator.

    With ``strict=True`` a report that depends on UNCERTAIN memberships raises
    :class:`ConditionalReport`; otherwise it is returned marked conditional.
    """
    bases = bases or {w: basis(phi, w) for w in ("K", "K1", "K2")}
    dK, d1, d2 = (bases[w].dim for w in ("K", "K1", "K2"))
    g1, g2 = phi.gdeg
    cond = any(UNCERTAIN in bases[w].flags for w in bases)
    rep = DimReport(dK, d1, d2, d1 - dK, d2 - dK, g1, g2, (d1 - dK, d2 - dK) == (g2, g1), cond)
    if cond and strict:
        raise ConditionalReport("dimension report depends on uncertain memberships", **rep.to_dict())
    return rep


def monomial_oracle(m, n, which):
    """Fourier-support description of the spaces for phi = z1^m z2^n."""
    lim = {"K": (m - 1, n - 1), "K1": (m, n - 1), "K2": (m - 1, n)}[which]
    if min(lim) < 0:
        return []
    return [k for k in grid_monomials(lim)]


__all__ = ["SubspaceBasis", "DimReport", "basis", "raw_basis", "l2_membership", "dims_check",
           "degree_bound", "monomial_oracle", "IN", "OUT", "UNCERTAIN"]
