"""Built-in inner functions and trivariate polynomials used by the battery and tests."""

from fractions import Fraction

from .poly import GaussRat, MatPoly, Poly, const, var

z1, z2 = var(1), var(2)
HALF = GaussRat(Fraction(1, 2))


def monomial(m, n):
    """phi = z1^m z2^n."""
    return MatPoly([[Poly({(m, n): GaussRat(1)})]]), const(GaussRat(1))


def example_10_1():
    """Matrix example with K = {0} and det phi = z1^2 z2."""
    Q = MatPoly([[z1 * (z1 + z2) * HALF, z1 * (z1 - z2) * HALF],
                 [(z1 - z2) * HALF, (z1 + z2) * HALF]])
    return Q, const(GaussRat(1))


def diagonal_example():
    """diag(phi1, z1^2 z2^2) over p = 3 - z1 - z2 with phi1 = (3 z1 z2 - z1 - z2)/p."""
    p = 3 - z1 - z2
    zero = Poly({})
    Q = MatPoly([[3 * z1 * z2 - z1 - z2, zero], [zero, z1 ** 2 * z2 ** 2 * p]])
    return Q, p


def boundary_scalar():
    """phi = (2 z1 z2 - z1 - z2)/(2 - z1 - z2), with a torus zero of p at (1, 1)."""
    p = 2 - z1 - z2
    return MatPoly([[2 * z1 * z2 - z1 - z2]]), p


def strict_scalar():
    """phi = (3 z1 z2 - z1 - z2)/(3 - z1 - z2)."""
    p = 3 - z1 - z2
    return MatPoly([[3 * z1 * z2 - z1 - z2]]), p


def degree_21_scalar():
    """phi = p~/p with p = 4 - z1^2 - z2 (strictly stable, degree (2, 1))."""
    p = 4 - z1 ** 2 - z2
    pt = 4 * z1 ** 2 * z2 - z2 - z1 ** 2
    return MatPoly([[pt]]), p


INNER = {
    "monomial_z1sq_z2": lambda: monomial(2, 1),
    "example_10_1": example_10_1,
    "diagonal": diagonal_example,
    "boundary_scalar": boundary_scalar,
    "strict_scalar": strict_scalar,
    "degree_21_scalar": degree_21_scalar,
}

STRICT_BATTERY = ["monomial_z1sq_z2", "example_10_1", "diagonal", "strict_scalar", "degree_21_scalar"]


def _tri(coeffs):
    return Poly({k: GaussRat(v) for k, v in coeffs.items()}, nvars=3)


TRIVAR = {
    "p_4_minus_sum": lambda: _tri({(0, 0, 0): 4, (1, 0, 0): -1, (0, 1, 0): -1, (0, 0, 1): -1}),
    "p_8_minus_z1sq": lambda: _tri({(0, 0, 0): 8, (2, 0, 0): -1, (0, 1, 0): -1, (0, 0, 1): -1}),
    "p_3_minus_sum": lambda: _tri({(0, 0, 0): 3, (1, 0, 0): -1, (0, 1, 0): -1, (0, 0, 1): -1}),
}
