"""Three-variable Agler decompositions for polynomials of degree (n, 1, 1).

Pipeline: split p = a + b z3, write |a|^2 - |b|^2 = |E1|^2 + |E2|^2 on the
torus, assemble the 3x3 inner function V with V [p; z3 E] = [p~; E], realize
V^t by a unitary and read off H1, H2 so that

    |p|^2 - |p~|^2 = (1-|z1|^2)|H1|^2 + (1-|z2|^2)|H2|^2 + (1-|z3|^2)|E|^2.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky
from scipy.optimize import least_squares, minimize

from .errors import (DegreeViolation, FactorizationStall, FinalIdentityFailed, InexactDivision,
                     InfeasibleSplit)
from .poly import MatPoly, Poly, poly_divide, reflect

CONTOUR = 256


def _bi(coeffs):
    return Poly(coeffs, nvars=2)


def split(p):
    """Coefficient split ``p = a(z1, z2) + b(z1, z2) z3``; returns ``(a, b, n)``."""
    if p.nvars != 3:
        raise DegreeViolation("expected a polynomial in three variables")
    deg = p.degree
    if deg is None:
        raise DegreeViolation("p is the zero polynomial")
    if deg[2] > 1:
        raise DegreeViolation(f"z3-degree {deg[2]} exceeds 1", degree=list(deg))
    if deg[1] > 1:
        raise DegreeViolation(f"z2-degree {deg[1]} exceeds 1", degree=list(deg))
    a = _bi({(i, j): c for (i, j, k), c in p.coeffs.items() if k == 0})
    b = _bi({(i, j): c for (i, j, k), c in p.coeffs.items() if k == 1})
    return a, b, deg[0]


# ----------------------------------------------------------------------
# two squares


def _z2_blocks(a, b, n):
    """Trigonometric coefficients of t = |a|^2 - |b|^2 split by powers of z2.

    Returns ``(t0, t1)`` as arrays indexed by z1 exponent -n..n, with
    t = t0(z1) + t1(z1) z2 + conj(t1(z1)) conj(z2) on the torus.
    """
    A = a.as_float().to_dense((n, 1))
    B = b.as_float().to_dense((n, 1))
    t0 = np.zeros(2 * n + 1, dtype=complex)
    t1 = np.zeros(2 * n + 1, dtype=complex)
    for X, sign in ((A, 1.0), (B, -1.0)):
        for j in range(2):
            for k in range(2):
                # X[:, j] X[:, k]^* contributes to z2^(j - k)
                c = sign * np.convolve(X[:, j], np.conj(X[::-1, k]))  # z1 exponents -n..n
                if j == k:
                    t0 += c
                elif j - k == 1:
                    t1 += c
    return t0, t1


def _alpha_from_params(x, n):
    """Real trigonometric polynomial coefficients (indexed -n..n) from 2n+1 reals."""
    c = np.zeros(2 * n + 1, dtype=complex)
    c[n] = x[0]
    for k in range(1, n + 1):
        c[n + k] = x[2 * k - 1] + 1j * x[2 * k]
        c[n - k] = x[2 * k - 1] - 1j * x[2 * k]
    return c


def _lambda_min(x, n, t0v, t1v, pw):
    al = (pw @ _alpha_from_params(x, n)).real
    return (t0v.real - np.sqrt((2 * al - t0v.real) ** 2 + 4 * np.abs(t1v) ** 2)) / 2


def choose_alpha(t0, t1, n, contour=CONTOUR):
    """Chebyshev-centre choice of alpha: maximize the minimum eigenvalue of M on the circle."""
    s = np.exp(2j * np.pi * np.arange(contour) / contour)
    pw = s[:, None] ** np.arange(-n, n + 1)[None, :]
    t0v, t1v = pw @ t0, pw @ t1
    x0 = np.zeros(2 * n + 1)
    x0[0] = t0[n].real / 2
    for k in range(1, n + 1):
        x0[2 * k - 1], x0[2 * k] = t0[n + k].real / 2, t0[n + k].imag / 2
    lam0 = _lambda_min(x0, n, t0v, t1v, pw).min()
    y0 = np.append(x0, lam0)
    res = minimize(lambda y: -y[-1], y0, method="SLSQP",
                   constraints=[{"type": "ineq", "fun": lambda y: _lambda_min(y[:-1], n, t0v, t1v, pw) - y[-1]}],
                   options={"maxiter": 500, "ftol": 1e-14})
    y = res.x if res.success and res.x[-1] >= lam0 else y0
    return _alpha_from_params(y[:-1], n), float(_lambda_min(y[:-1], n, t0v, t1v, pw).min())


def _bauer(Mk, n, blocks=None):
    """Factor sum_k M_k z^k (k = -n..n, M_{-k} = M_k^*) as L(z)^* L(z) by Toeplitz Cholesky."""
    m = Mk[n].shape[0]
    if blocks is None:
        blocks = 60 * (n + 1)
    T = np.zeros((blocks * m, blocks * m), dtype=complex)
    for i in range(blocks):
        for j in range(max(0, i - n), min(blocks, i + n + 1)):
            T[i * m:(i + 1) * m, j * m:(j + 1) * m] = Mk[n + (j - i)]
    C = cholesky(T, lower=True)
    last = C[-m:, :]
    # last block row: C[N-1, N-1-k] = D_k, with L_k = D_k^*
    return [last[:, (blocks - 1 - k) * m:(blocks - k) * m].conj().T for k in range(n + 1)]


def _fr_residual(Ls, Mk, n):
    out = []
    for s in range(n + 1):
        acc = sum(Ls[j].conj().T @ Ls[j + s] for j in range(n + 1 - s))
        out.append(acc - Mk[n + s])
    return out


def _polish(Ls, Mk, n, scale):
    m = Ls[0].shape[0]

    def unpack(x):
        z = x[:len(x) // 2] + 1j * x[len(x) // 2:]
        return [z[k * m * m:(k + 1) * m * m].reshape(m, m) for k in range(n + 1)]

    def fun(x):
        r = np.concatenate([e.ravel() for e in _fr_residual(unpack(x), Mk, n)]) / scale
        return np.concatenate([r.real, r.imag])

    z = np.concatenate([L.ravel() for L in Ls])
    sol = least_squares(fun, np.concatenate([z.real, z.imag]), xtol=1e-15, ftol=1e-15, gtol=1e-15,
                        max_nfev=2000)
    return unpack(sol.x)


def matrix_fejer_riesz(Mk, n, tol=1e-12):
    """Analytic 2x2 L of degree n with L^* L = sum_k M_k z^k on the circle."""
    scale = max(np.abs(M).max() for M in Mk)
    try:
        Ls = _bauer(Mk, n)
    except np.linalg.LinAlgError as exc:
        raise FactorizationStall(f"Toeplitz Cholesky failed ({exc})") from exc
    err = max(np.abs(e).max() for e in _fr_residual(Ls, Mk, n)) / scale
    if err > tol:
        Ls = _polish(Ls, Mk, n, scale)
        err = max(np.abs(e).max() for e in _fr_residual(Ls, Mk, n)) / scale
    if not np.isfinite(err) or err > 1e-6:
        raise FactorizationStall(f"spectral factorization residual {err:.2e}", residual=float(err))
    return Ls, float(err)


def sos_residual(a, b, E, grid=64):
    """max over a torus grid of | |a|^2 - |b|^2 - |E|^2 | relative to max |a|^2."""
    th = 2 * np.pi * np.arange(grid) / grid
    Z1, Z2 = np.meshgrid(np.exp(1j * th), np.exp(1j * th), indexing="ij")
    av, bv = a(Z1, Z2), b(Z1, Z2)
    ev = sum(np.abs(e(Z1, Z2)) ** 2 for e in E)
    t = np.abs(av) ** 2 - np.abs(bv) ** 2
    return float(np.abs(t - ev).max() / max(np.abs(av).max() ** 2, 1e-300)), float(t.min())


def _matrix_coeffs(alpha, t0, t1, n):
    """Coefficients M_k (k = -n..n) of [[alpha, t1], [conj t1, t0 - alpha]] on the circle."""
    Mk = []
    for k in range(-n, n + 1):
        a_k = alpha[n + k]
        Mk.append(np.array([[a_k, t1[n + k]], [np.conj(t1[n - k]), t0[n + k] - a_k]]))
    return Mk


@dataclass
class TwoSquares:
    E: list
    n: int
    residual: float
    min_eig: float
    regularized: bool = False
    delta: float = 0.0
    info: dict = field(default_factory=dict)


def sos_two_squares(a, b, n=None, delta=1e-9, feas_tol=1e-10):
    """Two polynomials E1, E2 of degree <= (n, 1) with |E1|^2 + |E2|^2 = |a|^2 - |b|^2 on the torus.

    When the best 2x2 positive matrix has no margin (inputs touching the
    boundary) and the factorization stalls, the target is regularized by
    ``delta`` relative to its size and the result is flagged.
    """
    if n is None:
        degs = [q.degree for q in (a, b) if q.degree is not None]
        n = max(d[0] for d in degs)
    if b.is_zero:
        return TwoSquares([a.as_float(), _bi({})], n, 0.0, float("nan"))
    t0, t1 = _z2_blocks(a, b, n)
    scale = np.abs(t0).max()
    alpha, lam = choose_alpha(t0, t1, n)
    if lam < -feas_tol * scale:
        raise InfeasibleSplit(f"no positive 2x2 completion: min eigenvalue {lam:.3e}", min_eig=lam)
    regularized = False
    try:
        Ls, err = matrix_fejer_riesz(_matrix_coeffs(alpha, t0, t1, n), n)
    except FactorizationStall:
        if lam >= 1e-8 * scale or delta <= 0:
            raise
        # no margin: factor the regularized target t + delta instead
        t0 = t0.copy()
        t0[n] += delta * scale
        alpha, lam = choose_alpha(t0, t1, n)
        Ls, err = matrix_fejer_riesz(_matrix_coeffs(alpha, t0, t1, n), n)
        regularized = True
    E = []
    for i in range(2):
        coeffs = {}
        for k in range(n + 1):
            for j in range(2):
                coeffs[(k, j)] = complex(Ls[k][i, j])
        E.append(_bi(coeffs).pruned(1e-15))
    res, _ = sos_residual(a, b, E)
    return TwoSquares(E, n, res, lam / scale, regularized, delta if regularized else 0.0,
                      {"factorization_residual": err})


# ----------------------------------------------------------------------
# the 3x3 inner function


@dataclass
class VData:
    V: object  # RationalInner
    a: Poly
    b: Poly
    a_t: Poly
    b_t: Poly
    E: list
    E_t: list
    n: int
    exact_division: bool
    residuals: dict = field(default_factory=dict)


def _bidisk_points(m, rng, radius=0.95):
    r = radius * np.sqrt(rng.random((m, 3)))
    return r * np.exp(2j * np.pi * rng.random((m, 3)))


def build_V(a, b, E, n, tol=1e-10, points=200, seed=0, tol_div=1e-9):
    """Assemble the 3x3 inner function V with V [p; z3 E] = [p~; E].

    The lower-right block (E E~^t - a(a~ + b) I)/(a + b~) is kept as a
    polynomial quotient when the division is exact; otherwise V is written
    over the common denominator a (a + b~).
    """
    from .inner import validate

    d = (n, 1)
    a, b = a.as_float(), b.as_float()
    E = [e.as_float() for e in E]
    at, bt = reflect(a, d), reflect(b, d)
    Et = [reflect(e, d) for e in E]
    s = a + bt
    c = a * (at + b)
    low = [[E[i] * Et[j] - (c if i == j else _bi({})) for j in range(2)] for i in range(2)]
    quo, rems = [], []
    for i in range(2):
        row = []
        for j in range(2):
            q, r = poly_divide(low[i][j], s)
            row.append(q)
            rems.append(r)
        quo.append(row)
    exact = max(rems) < tol_div
    if exact:
        Q = MatPoly([[bt, Et[0], Et[1]], [E[0], quo[0][0], quo[0][1]], [E[1], quo[1][0], quo[1][1]]])
        den = a
    else:
        Q = MatPoly([[bt * s, Et[0] * s, Et[1] * s],
                     [E[0] * s, low[0][0], low[0][1]],
                     [E[1] * s, low[1][0], low[1][1]]])
        den = a * s
    Q = Q.map(lambda e: e.pruned(1e-15))
    hint = (at * (at + b), a * s)
    V = validate(Q, den, tol=tol, det_hint=hint)
    out = VData(V, a, b, at, bt, E, Et, n, exact, {"division_remainder": float(max(rems))})
    rng = np.random.default_rng(seed)
    Z = _bidisk_points(points, rng)
    out.residuals["property"] = property_residual(out, Z)
    out.residuals["determinant"] = determinant_residual(out, Z)
    return out


def _p_and_reflection(vd, z1, z2, z3):
    av, bv = vd.a(z1, z2), vd.b(z1, z2)
    atv, btv = vd.a_t(z1, z2), vd.b_t(z1, z2)
    # p~ = z^(n,1,1) conj p(1/conj z) = b~ + a~ z3
    return av + bv * z3, btv + atv * z3


def property_residual(vd, Z):
    """max | V [p; z3 E] - [p~; E] | over sample points Z of shape (m, 3)."""
    z1, z2, z3 = Z[:, 0], Z[:, 1], Z[:, 2]
    Vv = vd.V(z1, z2)
    pv, ptv = _p_and_reflection(vd, z1, z2, z3)
    Ev = np.stack([e(z1, z2) for e in vd.E], axis=1)
    left = np.einsum("mij,mj->mi", Vv, np.concatenate([pv[:, None], z3[:, None] * Ev], axis=1))
    right = np.concatenate([ptv[:, None], Ev], axis=1)
    return float(np.abs(left - right).max() / max(np.abs(right).max(), 1e-300))


def determinant_residual(vd, Z):
    """max | det V - a~(a~ + b)/(a(a + b~)) | over sample points."""
    z1, z2 = Z[:, 0], Z[:, 1]
    dv = np.linalg.det(vd.V(z1, z2))
    av, bv, atv, btv = vd.a(z1, z2), vd.b(z1, z2), vd.a_t(z1, z2), vd.b_t(z1, z2)
    target = atv * (atv + bv) / (av * (av + btv))
    return float(np.abs(dv - target).max())


# ----------------------------------------------------------------------
# decomposition


@dataclass
class TriVarCertificate:
    p: Poly
    p_t: Poly
    n: int
    vdata: VData
    squares: TwoSquares
    U: object  # Realization of V^t
    H1: list
    H2: list
    residuals: dict
    boundary: bool = False

    @property
    def counts(self):
        return [len(self.H1), len(self.H2), len(self.squares.E)]

    @property
    def E(self):
        return self.squares.E

    def sos(self, z):
        """Values (SOS1, SOS2, SOS3) at points z of shape (m, 3)."""
        return tuple(sum(np.abs(h(*z.T)) ** 2 for h in H) for H in (self.H1, self.H2, _lift3(self.E)))

    def to_json(self):
        from .poly import poly_to_json

        vd = self.vdata
        return {
            "p": poly_to_json(self.p), "p_tilde": poly_to_json(self.p_t), "n": self.n,
            "a": poly_to_json(vd.a), "b": poly_to_json(vd.b),
            "a_tilde": poly_to_json(vd.a_t), "b_tilde": poly_to_json(vd.b_t),
            "E": [poly_to_json(e) for e in self.E],
            "E_text": [str(e) for e in self.E],
            "V": vd.V.to_json(),
            "U": self.U.to_json(),
            "H1": [poly_to_json(h) for h in self.H1],
            "H2": [poly_to_json(h) for h in self.H2],
            "counts": self.counts,
            "boundary": self.boundary,
            "regularized": self.squares.regularized,
            "delta": self.squares.delta,
            "residuals": {k: float(v) for k, v in self.residuals.items()},
        }


def _lift3(polys):
    return [Poly({k + (0,): c for k, c in e.coeffs.items()}, nvars=3) for e in polys]


def _fit_bivariate(values, Z, box):
    """Least-squares polynomial with exponents in ``box`` matching values at points Z (m, 2)."""
    from .poly import grid_monomials

    monos = grid_monomials(box)
    A = np.stack([Z[:, 0] ** i * Z[:, 1] ** j for i, j in monos], axis=1)
    coef, *_ = np.linalg.lstsq(A, values, rcond=None)
    fit = A @ coef
    res = float(np.abs(fit - values).max() / max(np.abs(values).max(), 1e-300))
    return monos, coef, res


def _polynomial_parts(G, Y0, Y1, Z, box, check):
    """Fit the entries of G Y0 and G Y1 as polynomials; return TriPolys H = G Y0 + z3 G Y1."""
    from .realization import sobol_points

    H, worst = [], 0.0
    GY0 = np.einsum("mij,mj->mi", G(Z), Y0(Z))
    GY1 = np.einsum("mij,mj->mi", G(Z), Y1(Z))
    Zc = sobol_points(64, seed=99, radius=0.9)
    GY0c = np.einsum("mij,mj->mi", G(Zc), Y0(Zc))
    GY1c = np.einsum("mij,mj->mi", G(Zc), Y1(Zc))
    for i in range(GY0.shape[1]):
        coeffs = {}
        for k3, vals, valc in ((0, GY0[:, i], GY0c[:, i]), (1, GY1[:, i], GY1c[:, i])):
            monos, coef, res = _fit_bivariate(vals, Z, box)
            A = np.stack([Zc[:, 0] ** a * Zc[:, 1] ** b for a, b in monos], axis=1)
            res = max(res, float(np.abs(A @ coef - valc).max() / max(np.abs(valc).max(), 1e-300)))
            worst = max(worst, res)
            for (a, b), c in zip(monos, coef):
                coeffs[(a, b, k3)] = complex(c)
        H.append(Poly(coeffs, nvars=3).pruned(1e-12))
    if worst > check:
        raise InexactDivision(f"G Y is not polynomial to tolerance (fit residual {worst:.2e})", residual=worst)
    return H, worst


def verification_grid(k=32):
    """k points in the closed disk per coordinate; the 3-D grid is their product."""
    r = np.linspace(0.0, 1.0, k) ** 0.5
    th = 2 * np.pi * ((np.arange(k) * 0.6180339887498949) % 1.0)
    return r * np.exp(1j * th)


def final_identity_residual(p, p_t, H1, H2, E, k=32):
    """Worst relative residual of the three-variable Agler identity on a k^3 grid."""
    w = verification_grid(k)
    worst, where = 0.0, None
    E3 = _lift3(E)
    for z3 in w:
        Z1, Z2 = np.meshgrid(w, w, indexing="ij")
        Z3 = np.full_like(Z1, z3)
        lhs = np.abs(p(Z1, Z2, Z3)) ** 2 - np.abs(p_t(Z1, Z2, Z3)) ** 2
        rhs = ((1 - np.abs(Z1) ** 2) * sum(np.abs(h(Z1, Z2, Z3)) ** 2 for h in H1)
               + (1 - np.abs(Z2) ** 2) * sum(np.abs(h(Z1, Z2, Z3)) ** 2 for h in H2)
               + (1 - abs(z3) ** 2) * sum(np.abs(e(Z1, Z2, Z3)) ** 2 for e in E3))
        scale = max(np.abs(p(Z1, Z2, Z3)).max() ** 2, 1e-300)
        err = np.abs(lhs - rhs) / scale
        i = np.unravel_index(np.argmax(err), err.shape)
        if err[i] > worst:
            worst, where = float(err[i]), (complex(Z1[i]), complex(Z2[i]), complex(z3))
    return worst, where


def stability_3(p, grid=33, contour=1024):
    """Per-slice winding check of p over a z2 x z3 torus grid, plus a closed-polydisk scan.

    Returns ``(ok, min_modulus_on_torus_relative)``.
    """
    th = 2 * np.pi * np.arange(grid) / grid
    s = np.exp(2j * np.pi * np.arange(contour) / contour)
    pf = p.as_float()
    worst = np.inf
    for r in (1.0, 0.5, 0.0):
        for t2 in th:
            for t3 in th:
                z2, z3 = r * np.exp(1j * t2), r * np.exp(1j * t3)
                v = pf(s, np.full_like(s, z2), np.full_like(s, z3))
                if r == 1.0:
                    worst = min(worst, np.abs(v).min())
                if np.abs(v).min() < 1e-9 * pf.norm():
                    continue
                wind = np.angle(np.roll(v, -1) / v).sum() / (2 * np.pi)
                if round(wind) != 0:
                    return False, float(worst / pf.norm())
    return True, float(worst / pf.norm())


def decompose(p, grid=32, seed=0, tol_fit=1e-7, tol_identity=1e-7):
    """Three-variable Agler decomposition of a stable polynomial of degree (n, 1, 1)."""
    from .errors import UnstableDenominator
    from .inner import validate
    from .hilbert import canonical_kernels
    from .realization import realize, sobol_points

    p = p.as_float()
    a, b, n = split(p)
    ok, mn = stability_3(p)
    if not ok:
        raise UnstableDenominator("p has zeros in the open tridisk")
    boundary = mn < 1e-6
    sq = sos_two_squares(a, b, n)
    vd = build_V(a, b, sq.E, n, tol=max(1e-10, 10 * sq.residual), seed=seed)
    V = vd.V
    Vt = validate(V.Q.T, V.p, tol=max(1e-10, 10 * sq.residual), det_hint=V.det_fraction)
    canon = canonical_kernels(Vt)
    # boundary-quadrature frames are accurate to about 1e-8, so the sampled isometry
    # certificate gets a looser gate there; the final identity is still checked
    boundary = boundary or sq.regularized or V.stability != "strict"
    U = realize(Vt, raw=True, seed=seed, canon=canon, tol_cert=1e-5 if boundary else 1e-7)
    p_t = reflect(p, (n, 1, 1))
    E = sq.E

    # U [I; z1 G1; z2 G2] = [V; G1; G2] with G1, G2 the transposed E2 and F1 frames of V^t
    def frame_t(label):
        return lambda Z: np.swapaxes(canon[label].values(Z[:, 0], Z[:, 1]), 1, 2)

    frames = (frame_t("E2"), frame_t("F1"))
    Y0 = lambda Z: np.stack([a(Z[:, 0], Z[:, 1])] + [np.zeros(len(Z), complex)] * 2, axis=1)  # noqa: E731
    Y1 = lambda Z: np.stack([b(Z[:, 0], Z[:, 1])] + [e(Z[:, 0], Z[:, 1]) for e in E], axis=1)  # noqa: E731
    box = (2 * n, 2)
    nfit = 4 * (box[0] + 1) * (box[1] + 1)
    Zs = sobol_points(max(nfit, 64), seed=seed + 7, radius=0.9)
    H1, r1 = _polynomial_parts(frames[0], Y0, Y1, Zs, box, tol_fit)
    H2, r2 = _polynomial_parts(frames[1], Y0, Y1, Zs, box, tol_fit)
    worst, where = final_identity_residual(p, p_t, H1, H2, E, grid)
    res = {"sos": sq.residual, "property": vd.residuals["property"], "determinant": vd.residuals["determinant"],
           "fit_H1": r1, "fit_H2": r2, "final_identity": worst,
           "realization_transfer": U.residuals.get("transfer", float("nan"))}
    if worst > tol_identity:
        raise FinalIdentityFailed(f"final identity residual {worst:.2e}", residual=worst,
                                  point=[[z.real, z.imag] for z in where])
    return TriVarCertificate(p, p_t, n, vd, sq, U, H1, H2, res, boundary)


def trivar_from_json(obj, exact=False):
    """Read ``{"p": <polynomial in three variables>}``."""
    from .errors import SchemaError
    from .poly import poly_from_json

    if not isinstance(obj, dict) or "p" not in obj:
        raise SchemaError("trivariate input: missing field 'p'", field="p")
    p = poly_from_json(obj["p"], "p", exact=exact)
    if p.nvars != 3:
        raise SchemaError("p.vars: expected 3", field="p.vars")
    return p


__all__ = ["split", "sos_two_squares", "build_V", "decompose", "TriVarCertificate", "TwoSquares", "VData",
           "matrix_fejer_riesz", "choose_alpha", "final_identity_residual", "verification_grid",
           "property_residual", "determinant_residual", "sos_residual", "stability_3", "trivar_from_json"]
