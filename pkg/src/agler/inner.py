"""Matrix rational inner functions phi = Q/p on the bidisk."""

import numpy as np

from .errors import NotInner, NotSquare, PoleHit, SchemaError, SingularityHit, UnstableDenominator, ZeroDenominator
from .poly import (MatPoly, Poly, det, lowest_terms, matpoly_from_json, matpoly_to_json,
                   poly_from_json, poly_to_json, reflect, torus_product)
from .torus import stability_check, torus_zeros

STRICT, BOUNDARY, INVALID = "strict", "boundary", "invalid"


class RationalInner:
    """A validated pair (Q, p).  Construct with :func:`validate`."""

    def __init__(self, Q, p, d, Qt, pt, det_fraction, stability, zeros, min_modulus, inner_residual):
        self.Q = Q
        self.p = p
        self.d = tuple(d)
        self.N = Q.shape[0]
        self.Qt = Qt
        self.pt = pt
        self.det_fraction = det_fraction
        self.stability = stability
        self.torus_zeros = zeros
        self.min_modulus = min_modulus
        self.inner_residual = inner_residual

    @property
    def g_tilde(self):
        return self.det_fraction[0]

    @property
    def g(self):
        return self.det_fraction[1]

    @property
    def gdeg(self):
        """(deg1, deg2) of the reduced determinant numerator g_tilde."""
        return self.g_tilde.degree or (0, 0)

    @property
    def is_exact(self):
        return self.Q.is_exact and self.p.is_exact

    @property
    def p_scale(self):
        return self.p.norm()

    def __call__(self, z1, z2):
        """phi at points of the closed bidisk (broadcasting); shape ``(..., N, N)``."""
        return _ratio(self.Q, self.p, z1, z2)

    def phi_tilde(self, z1, z2):
        return _ratio(self.Qt, self.p, z1, z2)

    def to_json(self):
        return {"N": self.N, "Q": matpoly_to_json(self.Q), "p": poly_to_json(self.p), "d": list(self.d)}

    def report(self):
        gt, g = self.det_fraction
        return {
            "inner": True,
            "stability": self.stability,
            "N": self.N,
            "d": list(self.d),
            "det": {"g_tilde": str(gt), "g": str(g), "deg_g_tilde": list(self.gdeg)},
            "torus_zeros": [[float(a), float(b)] for a, b in self.torus_zeros],
            "min_torus_modulus": float(self.min_modulus),
            "inner_residual": float(self.inner_residual),
        }

    def __repr__(self):
        return f"RationalInner(N={self.N}, d={self.d}, {self.stability})"


def _ratio(Q, p, z1, z2):
    pv = np.asarray(p(z1, z2))
    scale = max(p.norm(), 1e-300)
    if np.any(np.abs(pv) < 1e-14 * scale):
        raise PoleHit("denominator vanishes at an evaluation point")
    return Q(z1, z2) / pv[..., None, None]


def inner_residual(Q, p):
    """Largest Laurent coefficient of Q Q^* - |p|^2 I and Q^t conj(Q) - |p|^2 I on the torus.

    Returns ``(residual, witness)`` where the witness names the worst entry.
    """
    pp = torus_product(p, p)
    worst, witness = 0.0, None
    for label, M in (("QQ*", Q), ("Q^t conj(Q)", Q.T)):
        prod = torus_product(M, M)
        for i, row in enumerate(prod):
            for j, lp in enumerate(row):
                diff = lp - pp if i == j else lp
                if not diff.coeffs:
                    continue
                k = diff.argmax()
                v = abs(complex(diff.coeffs[k]))
                if v > worst:
                    worst, witness = v, {"product": label, "entry": [i, j], "exponent": list(k)}
    return worst, witness


def validate(Q, p, d=None, tol=1e-10, slices=257, contour=4096, zero_grid=512, det_hint=None):
    """Validate (Q, p) as a matrix rational inner function.

    Innerness is checked as a Laurent identity (exactly for exact inputs,
    otherwise to ``tol * ||p||^2``); stability by slice winding numbers; torus
    zeros by a grid scan with local refinement.  ``det_hint`` may supply a
    candidate ``(g_tilde, g)``; it is accepted only if it reproduces
    ``det Q / p^N``.
    """
    if isinstance(Q, Poly):
        Q = MatPoly([[Q]])
    r, c = Q.shape
    if r != c:
        raise NotSquare(f"Q is {r}x{c}")
    if p.is_zero:
        raise ZeroDenominator("p is the zero polynomial")
    if Q.nvars != 2 or p.nvars != 2:
        raise SchemaError("inner functions are bivariate")
    if not (Q.is_exact and p.is_exact):
        Q, p = Q.as_float(), p.as_float()
    if d is not None:
        Q = Q.with_degree(d)
    d = Q.declared_degree or (0, 0)
    Q = Q.with_degree(d)

    res, witness = inner_residual(Q, p)
    bound = 0.0 if (Q.is_exact and p.is_exact) else tol * p.norm() ** 2
    if res > bound:
        raise NotInner(f"Q*Q - |p|^2 I has a Laurent coefficient of size {res:.3g}",
                       residual=res, witness=witness)

    ok, wit = stability_check(p, slices=slices, contour=contour)
    if not ok:
        raise UnstableDenominator("p has zeros in the open bidisk", witness=wit)
    zeros, mn = torus_zeros(p, grid=zero_grid)
    stability = BOUNDARY if zeros else STRICT

    Qt = reflect(Q, d)
    pt = reflect(p, p.degree)
    N = r
    detQ = det(Q)
    pN = p ** N
    frac = None
    if det_hint is not None:
        gt, g = det_hint
        chk = (detQ * g - pN * gt)
        if chk.max_coeff() <= 1e-8 * max(detQ.max_coeff() * g.max_coeff(), 1e-300):
            frac = (gt, g)
    if frac is None:
        frac = lowest_terms(detQ, pN)
    return RationalInner(Q, p, d, Qt, pt, frac, stability, zeros, mn, res)


def evaluate(phi, z):
    """``Q(z)/p(z)`` at a single point."""
    return phi(complex(z[0]), complex(z[1]))


def eval_exterior(phi, z):
    """phi on the exterior bidisk via ``phi(z) = (phi(1/conj z)^*)^{-1}``."""
    z1, z2 = complex(z[0]), complex(z[1])
    if abs(z1) <= 1 or abs(z2) <= 1:
        raise ValueError("eval_exterior needs |z1| > 1 and |z2| > 1")
    w = phi(1 / np.conj(z1), 1 / np.conj(z2))
    m = w.conj().T
    s = np.linalg.svd(m, compute_uv=False)
    if s[-1] <= 1e-12 * max(s[0], 1e-300):
        raise SingularityHit("phi(1/conj z) is singular", point=[z1.real, z1.imag, z2.real, z2.imag])
    return np.linalg.inv(m)


def from_json(obj, exact=False, **kw):
    """Build and validate a RationalInner from the JSON encoding ``{"N", "Q", "p", "d"?}``."""
    if not isinstance(obj, dict):
        raise SchemaError("inner function: expected a JSON object")
    for key in ("Q", "p"):
        if key not in obj:
            raise SchemaError(f"inner function: missing field '{key}'", field=key)
    Q = matpoly_from_json(obj["Q"], "Q", exact=exact)
    p = poly_from_json(obj["p"], "p", exact=exact)
    if "N" in obj and obj["N"] != Q.shape[0]:
        raise SchemaError("N does not match Q", field="N")
    d = obj.get("d")
    if d is not None and (not isinstance(d, list) or len(d) != 2
                          or not all(isinstance(x, int) and x >= 0 for x in d)):
        raise SchemaError("d must be a pair of non-negative integers", field="d")
    return validate(Q, p, d=d, **kw)


def check_det_fraction(phi):
    """Residual of det Q * g - p^N * g_tilde relative to the coefficient scale."""
    gt, g = phi.det_fraction
    lhs = det(phi.Q) * g
    rhs = (phi.p ** phi.N) * gt
    return (lhs - rhs).max_coeff() / max(lhs.max_coeff(), 1e-300)


__all__ = ["RationalInner", "validate", "evaluate", "eval_exterior", "from_json", "inner_residual",
           "check_det_fraction", "STRICT", "BOUNDARY", "INVALID"]
