"""Unitary transfer-function realizations built by the lurking isometry argument.

With E an orthonormal frame of K2 - Z2 K (d1 functions) and F one of K1 - K
(d2 functions), the Agler decomposition rearranges to

    I + z1 w1* E(z)E(w)^* + z2 w2* F(z)F(w)^* = phi(z)phi(w)^* + E(z)E(w)^* + F(z)F(w)^*,

so the map sending L(z) = [I; z1 E(z)^t; z2 F(z)^t] to R(z) = [phi(z)^t; E(z)^t; F(z)^t]
extends to a unitary U.  That U realizes phi^t; its transpose realizes phi.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc, unitary_group

from .errors import GramMismatch, NearSingularResolvent, RankDeficiency, ValidationFailed
from .hilbert import canonical_kernels
from .inner import validate
from .poly import MatPoly, const, det, lowest_terms, poly_divide, var


@dataclass
class Realization:
    N: int
    d1: int
    d2: int
    U: np.ndarray
    raw: bool = False
    residuals: dict = field(default_factory=dict)

    @property
    def size(self):
        return self.N + self.d1 + self.d2

    @property
    def A(self):
        return self.U[:self.N, :self.N]

    @property
    def B(self):
        return self.U[:self.N, self.N:]

    @property
    def C(self):
        return self.U[self.N:, :self.N]

    @property
    def D(self):
        return self.U[self.N:, self.N:]

    def transpose(self):
        return Realization(self.N, self.d1, self.d2, self.U.T.copy(), not self.raw, dict(self.residuals))

    def to_json(self):
        return {"N": self.N, "d": [self.d1, self.d2],
                "U": [[{"re": float(x.real), "im": float(x.imag)} for x in row] for row in self.U],
                "residuals": {k: float(v) for k, v in self.residuals.items()}}


def realization_from_json(obj):
    from .errors import SchemaError

    try:
        N = int(obj["N"])
        d1, d2 = (int(x) for x in obj["d"])
        U = np.array([[complex(e.get("re", 0.0), e.get("im", 0.0)) for e in row] for row in obj["U"]])
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise SchemaError(f"realization: malformed input ({exc})") from exc
    if U.shape != (N + d1 + d2, N + d1 + d2):
        raise SchemaError("realization: U has the wrong shape", field="U")
    return Realization(N, d1, d2, U)


def sobol_points(m, seed=0, radius=0.9):
    """``m`` low-discrepancy points of the bidisk of the given radius, shape (m, 2)."""
    k = int(np.ceil(np.log2(max(m, 2))))
    u = qmc.Sobol(d=4, scramble=True, seed=seed).random_base2(k)[:m]
    r = radius * np.sqrt(u[:, :2])
    return r * np.exp(2j * np.pi * u[:, 2:])


def _phase_fix(Q):
    """Make the first nonzero entry of each column real and positive."""
    Q = Q.copy()
    for j in range(Q.shape[1]):
        col = Q[:, j]
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        if len(nz):
            c = col[nz[0]]
            Q[:, j] = col * (abs(c) / c)
    return Q


def _range_basis(M, tol=1e-9):
    Uu, s, _ = np.linalg.svd(M, full_matrices=True)
    r = int(np.sum(s > tol * max(s[0], 1e-300))) if s.size else 0
    return Uu[:, :r], Uu[:, r:], r


def realize(phi, raw=False, seed=0, canon=None, tol_cert=1e-7, max_rounds=4):
    """Minimal unitary realization of phi (or of phi^t when ``raw``)."""
    canon = canon or canonical_kernels(phi)
    E, F = canon["E2"], canon["F1"]
    N = phi.N
    g1, g2 = phi.gdeg
    d1, d2 = E.dim, F.dim
    if (d1, d2) != (g1, g2):
        raise GramMismatch(f"frame sizes {(d1, d2)} differ from determinant degrees {(g1, g2)}",
                           frames=[d1, d2], degrees=[g1, g2])
    n = N + d1 + d2
    m = 4 * n * n
    for attempt in range(max_rounds):
        Z = sobol_points(m, seed=seed + attempt)
        Ev = E.values(Z[:, 0], Z[:, 1])  # (m, N, d1)
        Fv = F.values(Z[:, 0], Z[:, 1])
        Pv = phi(Z[:, 0], Z[:, 1])
        T = lambda X: np.swapaxes(X, -1, -2)  # noqa: E731
        L = np.concatenate([np.broadcast_to(np.eye(N), (m, N, N)),
                            Z[:, 0, None, None] * T(Ev), Z[:, 1, None, None] * T(Fv)], axis=1)
        R = np.concatenate([T(Pv), T(Ev), T(Fv)], axis=1)
        Lm = np.concatenate(list(L), axis=1)  # (n, m N)
        Rm = np.concatenate(list(R), axis=1)
        GL, GR = Lm.conj().T @ Lm, Rm.conj().T @ Rm
        cert = float(np.abs(GL - GR).max() / max(np.abs(GL).max(), 1e-300))
        if cert > tol_cert:
            raise GramMismatch(f"isometry certificate residual {cert:.2e} exceeds {tol_cert:g}", residual=cert)
        QL, QLc, rL = _range_basis(Lm)
        QR, QRc, rR = _range_basis(Rm)
        if rL == n or attempt == max_rounds - 1:
            break
        m *= 2
    if rL != rR:
        raise RankDeficiency(f"left span rank {rL} differs from right span rank {rR}")
    if rL < n and attempt == max_rounds - 1 and rL == 0:
        raise RankDeficiency("sampled span is trivial")
    # isometry on the range of L
    X = Rm @ np.linalg.pinv(Lm, rcond=1e-10)
    U = X @ QL @ QL.conj().T
    if rL < n:
        U = U + _phase_fix(QRc) @ _phase_fix(QLc).conj().T
    W, _, Vh = np.linalg.svd(U)
    Up = W @ Vh
    fit = float(np.abs(U @ Lm - Rm).max() / max(np.abs(Rm).max(), 1e-300))
    res = {
        "certificate": cert,
        "fit": fit,
        "unitarity": float(np.abs(Up.conj().T @ Up - np.eye(n)).max()),
        "polar_correction": float(np.abs(Up - U).max()),
        "samples": m,
        "span_rank": rL,
    }
    out = Realization(N, d1, d2, Up, raw=True, residuals=res)
    if not raw:
        out = out.transpose()
    Zt = sobol_points(64, seed=seed + 1000, radius=0.95)
    out.residuals["transfer"] = transfer_residual(out, phi, Zt)
    return out


def eval_transfer(r, z):
    """``A + B d(z) (I - D d(z))^{-1} C`` at a point z."""
    z1, z2 = complex(z[0]), complex(z[1])
    dz = np.diag(np.concatenate([np.full(r.d1, z1), np.full(r.d2, z2)]))
    k = r.d1 + r.d2
    if k == 0:
        return r.A.copy()
    M = np.eye(k) - r.D @ dz
    if max(abs(z1), abs(z2)) > 1 and np.linalg.cond(M) > 1e12:
        raise NearSingularResolvent("I - D d(z) is nearly singular", point=[z1.real, z1.imag, z2.real, z2.imag])
    return r.A + r.B @ dz @ np.linalg.solve(M, r.C)


def transfer_residual(r, phi, Z):
    """Max deviation between the realization (of phi, or phi^t if raw) and phi at points Z."""
    worst = 0.0
    for z in Z:
        v = eval_transfer(r, z)
        target = phi(z[0], z[1])
        if r.raw:
            target = target.T
        worst = max(worst, float(np.abs(v - target).max()))
    return worst


def _adjugate(M):
    """Adjugate of a square MatPoly by cofactors."""
    n = M.shape[0]
    if n == 1:
        return MatPoly([[const(1.0)]])
    ents = M.entries
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = MatPoly([[ents[r][c] for c in range(n) if c != j] for r in range(n) if r != i])
            cof = det(minor)
            out[j][i] = cof if (i + j) % 2 == 0 else -cof
    return MatPoly(out)


def _common_factor(p, entries):
    """Largest common factor of p and all entries (approximate gcd)."""
    h = p
    for e in entries:
        if e.is_zero or h.degree == (0, 0):
            continue
        _, g = lowest_terms(e, h)
        q, res = poly_divide(h, g)
        if res > 1e-8:
            continue
        h = q
    return h


def synthesize(U, N, d1, d2, tol=1e-10, validate_kw=None):
    """Rational inner function ``(Q, p)`` with transfer function given by U."""
    U = np.asarray(U, dtype=complex)
    n = N + d1 + d2
    if U.shape != (n, n):
        raise ValidationFailed(f"U must be {n}x{n}")
    if np.abs(U.conj().T @ U - np.eye(n)).max() > tol:
        raise ValidationFailed("U is not unitary within tolerance")
    A, B, C, D = U[:N, :N], U[:N, N:], U[N:, :N], U[N:, N:]
    k = d1 + d2
    z1, z2 = var(1).as_float(), var(2).as_float()
    if k == 0:
        Q = MatPoly([[const(complex(A[i, j])) for j in range(N)] for i in range(N)])
        return validate(Q, const(1.0), **(validate_kw or {}))
    dvars = [z1] * d1 + [z2] * d2
    M = MatPoly([[const(float(i == j)) - dvars[j] * complex(D[i, j]) for j in range(k)] for i in range(k)])
    p = det(M).pruned(1e-14)
    adj = _adjugate(M)
    Bd = MatPoly([[dvars[j] * complex(B[i, j]) for j in range(k)] for i in range(N)])
    Cm = MatPoly([[const(complex(C[i, j])) for j in range(N)] for i in range(k)])
    Q = (Bd @ adj) @ Cm + MatPoly([[p * complex(A[i, j]) for j in range(N)] for i in range(N)])
    Q = Q.map(lambda e: e.pruned(1e-13))
    h = _common_factor(p, [e for row in Q.entries for e in row])
    if h.degree not in (None, (0, 0)):
        p, _ = poly_divide(p, h)
        Q = Q.map(lambda e: poly_divide(e, h)[0] if not e.is_zero else e)
    # normalize p to leading constant term 1 for readability
    c0 = complex(p.coeffs.get((0, 0), 0))
    if abs(c0) > 1e-12:
        p = p * (1 / c0)
        Q = Q * (1 / c0)
    Q = Q.map(lambda e: e.pruned(1e-13))
    try:
        return validate(Q, p.pruned(1e-13), **(validate_kw or {}))
    except Exception as exc:  # noqa: BLE001 - any validation failure is reported uniformly
        raise ValidationFailed(f"synthesized pair failed validation: {exc}") from exc


def haar_unitary(n, rng):
    return unitary_group.rvs(n, random_state=rng) if n > 1 else np.array([[np.exp(2j * np.pi * rng.random())]])


__all__ = ["Realization", "realize", "eval_transfer", "synthesize", "transfer_residual", "sobol_points",
           "realization_from_json", "haar_unitary"]
