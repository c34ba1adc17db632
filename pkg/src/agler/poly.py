"""Sparse polynomials in two or three complex variables.

Coefficients are either Python ``complex`` (float mode) or :class:`GaussRat`
(exact Gaussian rationals).  A polynomial is exact when every stored
coefficient is a ``GaussRat``; mixing an exact and a float polynomial yields a
float polynomial.

The monomial order used for normalization and for listing terms is graded
lexicographic with z1 > z2 > z3.
"""

from fractions import Fraction
from functools import lru_cache
from itertools import product
from numbers import Number

import numpy as np

from .errors import DegreeExceeded, NotSquare, SchemaError, ShapeMismatch, ZeroDenominator

__all__ = [
    "GaussRat", "Poly", "MatPoly", "LaurentPoly",
    "bipoly", "tripoly", "var", "const",
    "reflect", "torus_product", "det", "lowest_terms", "poly_divide",
    "poly_to_json", "poly_from_json", "matpoly_to_json", "matpoly_from_json",
    "gradlex_key",
]


class GaussRat:
    """Exact complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, x):
        if isinstance(x, GaussRat):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x)
        return None

    def _other(self, other):
        o = GaussRat.coerce(other)
        if o is None:
            return complex(other)
        return o

    def __add__(self, other):
        o = self._other(other)
        if isinstance(o, complex):
            return complex(self) + o
        return GaussRat(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._other(other)
        if isinstance(o, complex):
            return complex(self) * o
        return GaussRat(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if isinstance(o, complex):
            return complex(self) / o
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("GaussRat division by zero")
        num = self * o.conjugate()
        return GaussRat(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        o = self._other(other)
        if isinstance(o, complex):
            return o / complex(self)
        return o / self

    def __pow__(self, k):
        out = GaussRat(1)
        for _ in range(int(k)):
            out = out * self
        return out

    def conjugate(self):
        return GaussRat(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        return abs(complex(self))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = GaussRat.coerce(other)
        if o is None:
            return isinstance(other, Number) and complex(self) == complex(other)
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        if self.im == 0:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}j)"


def _is_exact(c):
    return isinstance(c, GaussRat)


def _to_exact(c):
    if isinstance(c, GaussRat):
        return c
    if isinstance(c, (int, Fraction)):
        return GaussRat(c)
    c = complex(c)
    return GaussRat(Fraction(repr(c.real)), Fraction(repr(c.imag)))


def _is_zero(c, tol=0.0):
    if _is_exact(c):
        return not c
    return abs(c) <= tol


def gradlex_key(exps):
    return (sum(exps), tuple(exps))


class Poly:
    """Polynomial in ``nvars`` variables stored as ``{exponent tuple: coefficient}``.

    Instances are treated as immutable values.
    """

    __slots__ = ("nvars", "coeffs")

    def __init__(self, coeffs=None, nvars=2, prune=0.0):
        self.nvars = nvars
        clean = {}
        for k, c in (coeffs or {}).items():
            k = tuple(int(e) for e in k)
            if len(k) != nvars:
                raise ShapeMismatch(f"exponent {k} does not have {nvars} entries")
            if min(k) < 0:
                raise ValueError(f"negative exponent {k} in a polynomial")
            if not _is_exact(c):
                if isinstance(c, (int, Fraction)):
                    c = GaussRat(c)
                else:
                    c = complex(c)
            if not _is_zero(c, prune):
                clean[k] = clean[k] + c if k in clean else c
        self.coeffs = {k: c for k, c in clean.items() if not _is_zero(c)}

    # construction -----------------------------------------------------
    @classmethod
    def from_dense(cls, arr, tol=0.0):
        arr = np.asarray(arr)
        return cls({idx: complex(v) for idx, v in np.ndenumerate(arr) if abs(v) > tol}, nvars=arr.ndim)

    def to_dense(self, box=None):
        """Dense coefficient array of shape ``box + 1`` (box defaults to the degree)."""
        if box is None:
            box = self.degree or (0,) * self.nvars
        shape = tuple(b + 1 for b in box)
        arr = np.zeros(shape, dtype=complex)
        for k, c in self.coeffs.items():
            if any(e > b for e, b in zip(k, box)):
                raise DegreeExceeded(f"term {k} outside box {box}")
            arr[k] = complex(c)
        return arr

    # properties -------------------------------------------------------
    @property
    def degree(self):
        if not self.coeffs:
            return None
        return tuple(max(k[i] for k in self.coeffs) for i in range(self.nvars))

    @property
    def is_zero(self):
        return not self.coeffs

    @property
    def is_exact(self):
        return all(_is_exact(c) for c in self.coeffs.values())

    def norm(self):
        return float(np.sqrt(sum(abs(complex(c)) ** 2 for c in self.coeffs.values())))

    def max_coeff(self):
        return max((abs(complex(c)) for c in self.coeffs.values()), default=0.0)

    def leading(self, rtol=0.0):
        """(exponent, coefficient) of the graded-lex leading term."""
        cut = rtol * self.max_coeff()
        keys = [k for k, c in self.coeffs.items() if abs(complex(c)) > cut]
        if not keys:
            return None, 0
        k = max(keys, key=gradlex_key)
        return k, self.coeffs[k]

    def as_float(self):
        return Poly({k: complex(c) for k, c in self.coeffs.items()}, self.nvars)

    def as_exact(self):
        return Poly({k: _to_exact(c) for k, c in self.coeffs.items()}, self.nvars)

    def pruned(self, rtol=1e-13):
        cut = rtol * self.max_coeff()
        return Poly({k: c for k, c in self.coeffs.items() if _is_exact(c) or abs(c) > cut}, self.nvars)

    # arithmetic -------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ShapeMismatch("polynomials in different numbers of variables")
            return other
        return Poly({(0,) * self.nvars: other}, self.nvars)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return Poly(out, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Poly({k: -c for k, c in self.coeffs.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly({k: c * other for k, c in self.coeffs.items()}, self.nvars)
        other = self._lift(other)
        out = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                v = c1 * c2
                out[k] = out[k] + v if k in out else v
        return Poly(out, self.nvars)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, Poly):
            raise TypeError("use poly_divide for polynomial division")
        if _is_exact(scalar) or isinstance(scalar, (int, Fraction)):
            inv = GaussRat(1) / GaussRat.coerce(scalar)
            if not self.is_exact:
                inv = complex(inv)
            return self * inv
        return self * (1.0 / complex(scalar))

    def __pow__(self, k):
        out = Poly({(0,) * self.nvars: GaussRat(1)}, self.nvars)
        for _ in range(int(k)):
            out = out * self
        return out

    def shift(self, exps):
        return Poly({tuple(a + b for a, b in zip(k, exps)): c for k, c in self.coeffs.items()}, self.nvars)

    def conj_coeffs(self):
        return Poly({k: c.conjugate() for k, c in self.coeffs.items()}, self.nvars)

    def __eq__(self, other):
        if isinstance(other, Number) or _is_exact(other):
            other = self._lift(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.nvars, frozenset(self.coeffs.items())))

    def allclose(self, other, tol=1e-10):
        diff = self - self._lift(other)
        return diff.max_coeff() <= tol

    # evaluation -------------------------------------------------------
    def __call__(self, *z):
        z = [np.asarray(v, dtype=complex) for v in z]
        if len(z) != self.nvars:
            raise ShapeMismatch(f"expected {self.nvars} coordinates")
        out = np.zeros(np.broadcast(*z).shape, dtype=complex)
        for k, c in self.coeffs.items():
            term = complex(c)
            for v, e in zip(z, k):
                if e:
                    term = term * v ** e
            out = out + term
        return out if out.ndim else complex(out)

    def partial(self, var, value):
        """Univariate coefficient array (ascending) after fixing all variables but ``var``.

        ``value`` is the tuple of the remaining coordinates in order.
        """
        deg = self.degree
        if deg is None:
            return np.zeros(1, dtype=complex)
        others = [i for i in range(self.nvars) if i != var]
        out = np.zeros(deg[var] + 1, dtype=complex)
        for k, c in self.coeffs.items():
            term = complex(c)
            for i, v in zip(others, value):
                term *= complex(v) ** k[i]
            out[k[var]] += term
        return out

    # display ----------------------------------------------------------
    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k in sorted(self.coeffs, key=gradlex_key, reverse=True):
            c = self.coeffs[k]
            mono = " ".join(
                f"z{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(k) if e
            )
            parts.append(_format_term(c, mono))
        s = " + ".join(parts).replace("+ -", "- ")
        return s

    def __repr__(self):
        return f"Poly({self})"


def _format_term(c, mono):
    if _is_exact(c):
        if c.im == 0:
            r = c.re
            if mono and r == 1:
                return mono
            if mono and r == -1:
                return "-" + mono
            txt = str(r)
        else:
            txt = f"({c.re}{'+' if c.im >= 0 else '-'}{abs(c.im)}i)"
    else:
        c = complex(c)
        if abs(c.imag) <= 1e-14 * max(1.0, abs(c.real)):
            txt = f"{c.real:.12g}"
            if mono and txt == "1":
                return mono
            if mono and txt == "-1":
                return "-" + mono
        else:
            txt = f"({c.real:.12g}{'+' if c.imag >= 0 else '-'}{abs(c.imag):.12g}i)"
    return f"{txt} {mono}" if mono else txt


def bipoly(coeffs):
    return Poly(coeffs, nvars=2)


def tripoly(coeffs):
    return Poly(coeffs, nvars=3)


def var(i, nvars=2):
    k = [0] * nvars
    k[i - 1] = 1
    return Poly({tuple(k): GaussRat(1)}, nvars)


def const(c, nvars=2):
    return Poly({(0,) * nvars: c}, nvars)


class MatPoly:
    """Matrix of polynomials with a declared degree (used by reflection)."""

    __slots__ = ("entries", "declared_degree", "nvars")

    def __init__(self, entries, deg=None):
        rows = [list(r) for r in entries]
        if not rows or not rows[0]:
            raise ShapeMismatch("empty matrix polynomial")
        if any(len(r) != len(rows[0]) for r in rows):
            raise ShapeMismatch("ragged matrix polynomial")
        nvars = next(e.nvars for r in rows for e in r if isinstance(e, Poly)) if any(
            isinstance(e, Poly) for r in rows for e in r) else 2
        self.nvars = nvars
        self.entries = tuple(
            tuple(e if isinstance(e, Poly) else Poly({(0,) * nvars: e}, nvars) for e in r) for r in rows
        )
        ed = self.entry_degree
        if deg is None:
            deg = ed
        else:
            deg = tuple(int(x) for x in deg)
            if ed is not None and any(a > b for a, b in zip(ed, deg)):
                raise DegreeExceeded(f"entries of degree {ed} exceed declared degree {deg}")
        self.declared_degree = deg

    @property
    def shape(self):
        return len(self.entries), len(self.entries[0])

    @property
    def entry_degree(self):
        degs = [e.degree for r in self.entries for e in r if e.degree is not None]
        if not degs:
            return None
        return tuple(max(d[i] for d in degs) for i in range(self.nvars))

    @property
    def is_exact(self):
        return all(e.is_exact for r in self.entries for e in r)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @property
    def T(self):
        r, c = self.shape
        return MatPoly([[self.entries[i][j] for i in range(r)] for j in range(c)], self.declared_degree)

    def map(self, f, deg=None):
        return MatPoly([[f(e) for e in r] for r in self.entries], deg)

    def with_degree(self, deg):
        return MatPoly(self.entries, deg)

    def __add__(self, other):
        if self.shape != other.shape:
            raise ShapeMismatch("shape mismatch in addition")
        return MatPoly([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)])

    def __sub__(self, other):
        if self.shape != other.shape:
            raise ShapeMismatch("shape mismatch in subtraction")
        return MatPoly([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)])

    def __mul__(self, scalar):
        return MatPoly([[e * scalar for e in r] for r in self.entries])

    __rmul__ = __mul__

    def __matmul__(self, other):
        (r, k), (k2, c) = self.shape, other.shape
        if k != k2:
            raise ShapeMismatch(f"cannot multiply {self.shape} by {other.shape}")
        zero = Poly({}, self.nvars)
        out = []
        for i in range(r):
            row = []
            for j in range(c):
                acc = zero
                for l in range(k):
                    acc = acc + self.entries[i][l] * other.entries[l][j]
                row.append(acc)
            out.append(row)
        return MatPoly(out)

    def __eq__(self, other):
        return isinstance(other, MatPoly) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def as_float(self):
        return self.map(Poly.as_float, self.declared_degree)

    def as_exact(self):
        return self.map(Poly.as_exact, self.declared_degree)

    def to_dense(self, box=None):
        box = box or self.declared_degree or (0,) * self.nvars
        r, c = self.shape
        arr = np.zeros((r, c) + tuple(b + 1 for b in box), dtype=complex)
        for i in range(r):
            for j in range(c):
                arr[i, j] = self.entries[i][j].to_dense(box)
        return arr

    @classmethod
    def from_dense(cls, arr, deg=None, tol=0.0):
        arr = np.asarray(arr)
        return cls([[Poly.from_dense(arr[i, j], tol) for j in range(arr.shape[1])]
                    for i in range(arr.shape[0])], deg)

    def __call__(self, *z):
        r, c = self.shape
        vals = [[np.asarray(self.entries[i][j](*z)) for j in range(c)] for i in range(r)]
        out = np.array(vals, dtype=complex)
        return np.moveaxis(out, (0, 1), (-2, -1)) if out.ndim > 2 else out

    def max_coeff(self):
        return max(e.max_coeff() for r in self.entries for e in r)

    def __repr__(self):
        body = "; ".join(", ".join(str(e) for e in r) for r in self.entries)
        return f"MatPoly[{body}] deg={self.declared_degree}"


class LaurentPoly:
    """Finitely supported Laurent polynomial (exponents in Z^n)."""

    __slots__ = ("nvars", "coeffs")

    def __init__(self, coeffs=None, nvars=2):
        self.nvars = nvars
        out = {}
        for k, c in (coeffs or {}).items():
            k = tuple(int(e) for e in k)
            out[k] = out[k] + c if k in out else c
        self.coeffs = {k: c for k, c in out.items() if not _is_zero(c)}

    @classmethod
    def from_poly(cls, p):
        return cls(dict(p.coeffs), p.nvars)

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return LaurentPoly(out, self.nvars)

    def __neg__(self):
        return LaurentPoly({k: -c for k, c in self.coeffs.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-other)

    def max_abs(self):
        return max((abs(complex(c)) for c in self.coeffs.values()), default=0.0)

    def argmax(self):
        if not self.coeffs:
            return None
        return max(self.coeffs, key=lambda k: abs(complex(self.coeffs[k])))

    def is_zero(self, tol=0.0):
        return self.max_abs() <= tol

    @property
    def is_exact(self):
        return all(_is_exact(c) for c in self.coeffs.values())

    def is_hermitian(self, tol=0.0):
        for k, c in self.coeffs.items():
            m = tuple(-e for e in k)
            d = c - self.coeffs.get(m, 0).conjugate() if m in self.coeffs else c
            if abs(complex(d)) > tol:
                return False
        return True

    def __call__(self, *z):
        z = [np.asarray(v, dtype=complex) for v in z]
        out = np.zeros(np.broadcast(*z).shape, dtype=complex)
        for k, c in self.coeffs.items():
            term = complex(c)
            for v, e in zip(z, k):
                term = term * v ** e
            out = out + term
        return out if out.ndim else complex(out)

    def __eq__(self, other):
        return isinstance(other, LaurentPoly) and self.coeffs == other.coeffs

    def __repr__(self):
        return f"LaurentPoly({self.coeffs})"


# ---------------------------------------------------------------------------
# operations


def reflect(q, d):
    """Return ``z^d q(1/conj z)^*``.

    For a scalar polynomial this conjugates coefficients and maps each exponent
    ``j`` to ``d - j``; a matrix is additionally transposed.
    """
    d = tuple(int(x) for x in d)
    if isinstance(q, MatPoly):
        r, c = q.shape
        ents = [[reflect(q.entries[i][j], d) for i in range(r)] for j in range(c)]
        return MatPoly(ents, d)
    out = {}
    for k, c in q.coeffs.items():
        if len(k) != len(d):
            raise ShapeMismatch("reflection degree has wrong length")
        if any(a > b for a, b in zip(k, d)):
            raise DegreeExceeded(f"term z^{k} exceeds reflection degree {d}")
        out[tuple(b - a for a, b in zip(k, d))] = c.conjugate()
    return Poly(out, q.nvars)


def _laurent_conj(p):
    return LaurentPoly({tuple(-e for e in k): c.conjugate() for k, c in p.coeffs.items()}, p.nvars)


def _laurent_mul(a, b):
    out = {}
    for k1, c1 in a.coeffs.items():
        for k2, c2 in b.coeffs.items():
            k = tuple(x + y for x, y in zip(k1, k2))
            v = c1 * c2
            out[k] = out[k] + v if k in out else v
    return LaurentPoly(out, a.nvars)


def torus_product(f, g, conj_second=True):
    """Laurent expansion on the torus of ``f g^*`` (or ``f g``).

    On the torus ``conj(z) = 1/z``, so ``g^*`` is the conjugate transpose with
    coefficients conjugated and exponents negated.  Scalars return a
    :class:`LaurentPoly`, matrices a list of lists of them.
    """
    scalar = isinstance(f, Poly) and isinstance(g, Poly)
    F = MatPoly([[f]]) if isinstance(f, Poly) else f
    G = MatPoly([[g]]) if isinstance(g, Poly) else g
    (r, k), (s, k2) = F.shape, G.shape
    if conj_second:
        if k != k2:
            raise ShapeMismatch(f"f g* needs equal column counts, got {F.shape} and {G.shape}")
        Gc = [[_laurent_conj(G.entries[j][l]) for l in range(k)] for j in range(s)]
        out = []
        for i in range(r):
            row = []
            for j in range(s):
                acc = LaurentPoly({}, F.nvars)
                for l in range(k):
                    acc = acc + _laurent_mul(LaurentPoly.from_poly(F.entries[i][l]), Gc[j][l])
                row.append(acc)
            out.append(row)
    else:
        if k != s:
            raise ShapeMismatch(f"cannot multiply {F.shape} by {G.shape}")
        out = [[LaurentPoly.from_poly((F @ G).entries[i][j]) for j in range(k2)] for i in range(r)]
    return out[0][0] if scalar else out


def det(M):
    """Determinant of a square matrix polynomial by memoized cofactor expansion."""
    r, c = M.shape
    if r != c:
        raise NotSquare(f"determinant of a {r}x{c} matrix")
    ents = M.entries
    nvars = M.nvars

    @lru_cache(maxsize=None)
    def minor(row, cols):
        if row == r:
            return Poly({(0,) * nvars: GaussRat(1)}, nvars)
        acc = Poly({}, nvars)
        sign = 1
        for j in cols:
            e = ents[row][j]
            if not e.is_zero:
                rest = tuple(x for x in cols if x != j)
                term = e * minor(row + 1, rest)
                acc = acc + term if sign > 0 else acc - term
            sign = -sign
        return acc

    return minor(0, tuple(range(c)))


# ---------------------------------------------------------------------------
# division and gcd


def _conv_matrix(a, box):
    """Matrix of ``u -> a*u`` for ``u`` supported in ``box`` (dense arrays)."""
    a = np.asarray(a)
    ushape = tuple(b + 1 for b in box)
    oshape = tuple(x + y - 1 for x, y in zip(a.shape, ushape))
    cols = []
    for idx in np.ndindex(*ushape):
        out = np.zeros(oshape, dtype=complex)
        sl = tuple(slice(i, i + n) for i, n in zip(idx, a.shape))
        out[sl] = a
        cols.append(out.ravel())
    if not cols:
        return np.zeros((int(np.prod(oshape)), 0), dtype=complex), oshape
    return np.array(cols).T, oshape


def _fit_box(arr, shape):
    out = np.zeros(shape, dtype=complex)
    sl = tuple(slice(0, min(a, b)) for a, b in zip(arr.shape, shape))
    out[sl] = arr[sl]
    return out


def poly_divide(num, den, tol=1e-9):
    """Quotient and relative remainder of ``num / den`` (least squares on coefficients).

    Exact inputs use exact multivariate division.  Returns ``(quotient, residual)``
    where ``residual`` is the relative coefficient norm of ``num - den*quotient``.
    """
    if den.is_zero:
        raise ZeroDenominator("division by the zero polynomial")
    if num.is_zero:
        return Poly({}, num.nvars), 0.0
    if num.is_exact and den.is_exact:
        q, r = _sympy_div(num, den)
        return q, (0.0 if r.is_zero else r.norm() / num.norm())
    dn, dd = num.degree, den.degree
    box = tuple(a - b for a, b in zip(dn, dd))
    if min(box) < 0:
        return Poly({}, num.nvars), 1.0
    A, oshape = _conv_matrix(den.to_dense(), box)
    b = _fit_box(num.to_dense(), oshape).ravel()
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    res = np.linalg.norm(A @ x - b) / np.linalg.norm(b)
    q = Poly.from_dense(x.reshape(tuple(k + 1 for k in box)), tol=0.0).pruned(1e-14)
    return q, float(res)


def _nullity(a, b, e, cutoff):
    da = a.shape
    db = b.shape
    ubox = tuple(y - 1 - k for y, k in zip(db, e))
    vbox = tuple(x - 1 - k for x, k in zip(da, e))
    Au, oshape = _conv_matrix(a, ubox)
    Bv, oshape2 = _conv_matrix(b, vbox)
    assert oshape == oshape2
    S = np.hstack([Au, -Bv])
    s = np.linalg.svd(S, compute_uv=False)
    ncols = S.shape[1]
    smax = s[0] if s.size else 1.0
    rank = int(np.sum(s > cutoff * smax))
    return ncols - rank, S, ubox, vbox


def _approx_cofactors(a, b, cutoff=1e-9):
    """Return ``(v, u)`` with ``a/b = v/u`` in lowest terms (dense arrays)."""
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    a = a / na
    b = b / nb
    top = tuple(min(x, y) - 1 for x, y in zip(a.shape, b.shape))
    e1 = 0
    while e1 + 1 <= top[0] and _nullity(a, b, (e1 + 1, 0), cutoff)[0] > 0:
        e1 += 1
    e2 = 0
    while e2 + 1 <= top[1] and _nullity(a, b, (e1, e2 + 1), cutoff)[0] > 0:
        e2 += 1
    n, S, ubox, vbox = _nullity(a, b, (e1, e2), cutoff)
    _, s, vh = np.linalg.svd(S)
    x = vh[-1].conj()
    nu = int(np.prod([k + 1 for k in ubox]))
    u = x[:nu].reshape(tuple(k + 1 for k in ubox))
    v = x[nu:].reshape(tuple(k + 1 for k in vbox)) * (na / nb)
    return v, u, (e1, e2), n


def lowest_terms(num, den, exact=None, rtol=1e-8):
    """Reduce ``num/den`` to ``(g_tilde, g)`` with no common factor.

    ``g`` is normalized to have graded-lex leading coefficient 1.  Exact inputs
    (or ``exact=True``) use an exact gcd; float inputs use an approximate gcd
    read off the nullspace of a Sylvester-type multiplication matrix, checked by
    polynomial division.
    """
    from .errors import NumericalRankAmbiguity

    if den.is_zero:
        raise ZeroDenominator("lowest_terms with zero denominator")
    nvars = num.nvars
    if num.is_zero:
        return Poly({}, nvars), Poly({(0,) * nvars: GaussRat(1)}, nvars)
    if exact is None:
        exact = num.is_exact and den.is_exact
    if exact:
        h = _sympy_gcd(num.as_exact(), den.as_exact())
        gt, _ = _sympy_div(num.as_exact(), h)
        g, _ = _sympy_div(den.as_exact(), h)
    else:
        if num.degree == (0,) * nvars or den.degree == (0,) * nvars:
            gt, g = num.as_float(), den.as_float()
        else:
            v, u, e, n = _approx_cofactors(num.to_dense(), den.to_dense())
            gt = Poly.from_dense(v).pruned(1e-12)
            g = Poly.from_dense(u).pruned(1e-12)
            # cross-check: num = h*gt and den = h*g for a common h
            h, r1 = poly_divide(num.as_float(), gt)
            r2 = (h * g - den.as_float()).norm() / den.norm() if not h.is_zero else 1.0
            if r1 > rtol or r2 > rtol:
                raise NumericalRankAmbiguity(
                    "approximate gcd failed the division cross-check",
                    residual_num=float(r1), residual_den=float(r2))
    _, lc = g.leading(rtol=0.0 if exact else 1e-10)
    if exact:
        return gt / lc, g / lc
    lc = complex(lc)
    return (gt * (1 / lc)).pruned(1e-12), (g * (1 / lc)).pruned(1e-12)


# exact gcd/division via sympy over the Gaussian rationals


def _sympy_syms(nvars):
    import sympy

    return sympy.symbols(" ".join(f"z{i + 1}" for i in range(nvars)))


def _to_sympy(p):
    import sympy
    from sympy.polys.domains import QQ_I

    syms = _sympy_syms(p.nvars)
    expr = sympy.Integer(0)
    for k, c in p.coeffs.items():
        c = _to_exact(c)
        coef = sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(
            c.im.numerator, c.im.denominator)
        term = coef
        for s, e in zip(syms, k):
            term = term * s ** e
        expr += term
    return sympy.Poly(expr, *syms, domain=QQ_I)


def _from_sympy(P, nvars):
    import sympy

    out = {}
    for monom, coef in P.terms():
        re, im = sympy.re(coef), sympy.im(coef)
        out[tuple(monom)] = GaussRat(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))
    return Poly(out, nvars)


def _sympy_gcd(a, b):
    return _from_sympy(_to_sympy(a).gcd(_to_sympy(b)), a.nvars)


def _sympy_div(a, b):
    q, r = _to_sympy(a).div(_to_sympy(b))
    return _from_sympy(q, a.nvars), _from_sympy(r, a.nvars)


# ---------------------------------------------------------------------------
# JSON


def _coef_to_json(c):
    if _is_exact(c) and c.re.denominator == 1 and c.im.denominator == 1:
        return {"re": c.re.numerator, "im": c.im.numerator}
    if _is_exact(c):
        return {"re_num": c.re.numerator, "re_den": c.re.denominator,
                "im_num": c.im.numerator, "im_den": c.im.denominator}
    c = complex(c)
    return {"re": c.real, "im": c.imag}


def _coef_from_json(obj, path, exact):
    if "re_num" in obj:
        try:
            return GaussRat(Fraction(int(obj["re_num"]), int(obj.get("re_den", 1))),
                            Fraction(int(obj.get("im_num", 0)), int(obj.get("im_den", 1))))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"{path}: bad exact coefficient ({exc})", field=path) from exc
    if "re" not in obj and "im" not in obj:
        raise SchemaError(f"{path}: coefficient needs 're'/'im' or exact fields", field=path)
    re, im = obj.get("re", 0), obj.get("im", 0)
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in (re, im)):
        raise SchemaError(f"{path}: 're'/'im' must be numbers", field=path)
    if exact or (isinstance(re, int) and isinstance(im, int)):
        return GaussRat(Fraction(repr(re)), Fraction(repr(im)))
    return complex(re, im)


def poly_to_json(p):
    terms = [dict(k=list(k), **_coef_to_json(p.coeffs[k]))
             for k in sorted(p.coeffs, key=gradlex_key, reverse=True)]
    return {"vars": p.nvars, "coeffs": terms}


def poly_from_json(obj, path="poly", exact=False):
    """Parse the polynomial encoding.  Integer-valued coefficients are kept exact."""
    if not isinstance(obj, dict) or "coeffs" not in obj:
        raise SchemaError(f"{path}: expected an object with 'coeffs'", field=path)
    nvars = obj.get("vars", 2)
    if nvars not in (1, 2, 3):
        raise SchemaError(f"{path}.vars: must be 1, 2 or 3", field=f"{path}.vars")
    terms = obj["coeffs"]
    if not isinstance(terms, list):
        raise SchemaError(f"{path}.coeffs: expected a list", field=f"{path}.coeffs")
    out = {}
    for i, t in enumerate(terms):
        tp = f"{path}.coeffs[{i}]"
        if not isinstance(t, dict) or "k" not in t:
            raise SchemaError(f"{tp}: expected an object with 'k'", field=tp)
        k = t["k"]
        if (not isinstance(k, list) or len(k) != nvars
                or not all(isinstance(e, int) and not isinstance(e, bool) and e >= 0 for e in k)):
            raise SchemaError(f"{tp}.k: expected {nvars} non-negative integers", field=f"{tp}.k")
        c = _coef_from_json(t, tp, exact)
        key = tuple(k)
        out[key] = out[key] + c if key in out else c
    p = Poly(out, nvars)
    if not exact and not all(_is_exact(c) for c in out.values()):
        p = p.as_float()
    return p


def matpoly_to_json(M):
    r, c = M.shape
    return {"rows": r, "cols": c,
            "entries": [[poly_to_json(e) for e in row] for row in M.entries],
            "deg": list(M.declared_degree) if M.declared_degree is not None else None}


def matpoly_from_json(obj, path="Q", exact=False):
    if not isinstance(obj, dict) or "entries" not in obj:
        raise SchemaError(f"{path}: expected an object with 'entries'", field=path)
    ents = obj["entries"]
    if not isinstance(ents, list) or not ents or not all(isinstance(r, list) for r in ents):
        raise SchemaError(f"{path}.entries: expected a non-empty list of rows", field=f"{path}.entries")
    rows = [[poly_from_json(e, f"{path}.entries[{i}][{j}]", exact) for j, e in enumerate(r)]
            for i, r in enumerate(ents)]
    if "rows" in obj and obj["rows"] != len(rows):
        raise SchemaError(f"{path}.rows: does not match entries", field=f"{path}.rows")
    if "cols" in obj and any(len(r) != obj["cols"] for r in rows):
        raise SchemaError(f"{path}.cols: does not match entries", field=f"{path}.cols")
    if any(len(r) != len(rows[0]) for r in rows):
        raise SchemaError(f"{path}.entries: ragged rows", field=f"{path}.entries")
    if not all(e.is_exact for r in rows for e in r):
        rows = [[e.as_float() for e in r] for r in rows]
    deg = obj.get("deg")
    try:
        return MatPoly(rows, deg)
    except DegreeExceeded as exc:
        raise SchemaError(f"{path}.deg: {exc}", field=f"{path}.deg") from exc


def unify_exactness(*items):
    """Convert every argument to float unless all are exact."""
    if all(x.is_exact for x in items):
        return items
    return tuple(x.as_float() for x in items)


def grid_monomials(box):
    """All exponent tuples in the box, in ascending graded-lex order."""
    return sorted(product(*[range(b + 1) for b in box]), key=gradlex_key)
