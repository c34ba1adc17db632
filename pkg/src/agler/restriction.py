"""Slices f -> f(t, .) of the wandering subspaces and one-variable model spaces.

For a frame of K1 - K or K1 - Z1 K the slice at z1 = t is compared with the
model space H^2 - phi(t, .) H^2; for K2 - K and K2 - Z2 K the roles of the
variables are swapped (slice at z2 = t).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ExceptionalSlice, WindingAmbiguous

SPACES = {
    "K1_minus_K": ("F1", 0),
    "K1_minus_Z1K": ("E1", 0),
    "K2_minus_K": ("F2", 1),
    "K2_minus_Z2K": ("E2", 1),
}


@dataclass
class SliceReport:
    t: complex
    which_space: str
    gram_error: float
    membership_error: float
    rank: int
    onevar_dim: int
    exceptional: bool
    grid: int = 0
    fourier_checked: int = 0

    def to_dict(self):
        t = complex(self.t)
        return {"t": [t.real, t.imag], "which_space": self.which_space,
                "gram_error": None if self.gram_error is None else float(self.gram_error),
                "membership_error": None if self.membership_error is None else float(self.membership_error),
                "rank": self.rank, "onevar_dim": self.onevar_dim,
                "exceptional": bool(self.exceptional), "grid": self.grid,
                "fourier_checked": self.fourier_checked}


def _slice(poly, var, t):
    """Coefficients (ascending) of the one-variable polynomial obtained by fixing z_{var+1} = t."""
    other = 1 - var
    return poly.partial(other, (t,))


def _trim(c, rtol=1e-12):
    c = np.asarray(c, dtype=complex)
    nz = np.nonzero(np.abs(c) > rtol * max(np.abs(c).max(), 1e-300))[0]
    return c[:nz[-1] + 1] if len(nz) else np.zeros(1, dtype=complex)


def _roots(c):
    c = _trim(c)
    return np.roots(c[::-1]) if len(c) > 1 else np.zeros(0, dtype=complex)


def is_exceptional(phi, t, var=0, tol=1e-6):
    """True when p restricted to the slice nearly vanishes on the closed disk."""
    h = _slice(phi.p.as_float(), var, t)
    r = _roots(h)
    return bool(np.any(np.abs(r) <= 1 + tol))


def _cancel(num_roots, den_roots, tol):
    num, den = list(num_roots), list(den_roots)
    i = 0
    while i < len(num):
        j = next((k for k, s in enumerate(den) if abs(num[i] - s) < tol), None)
        if j is None:
            i += 1
        else:
            num.pop(i)
            den.pop(j)
    return np.array(num, dtype=complex), np.array(den, dtype=complex)


def onevar_model_dim(phi, t, var=0, contour=4096, tol=1e-6):
    """Blaschke degree of det phi restricted to the slice, as a winding number.

    Common roots of the reduced determinant numerator and denominator on the
    slice (within ``tol``) are cancelled first, so slices through torus zeros
    of p give the degree of the reduced one-variable function.
    """
    gt, g = phi.det_fraction
    a = _roots(_slice(gt.as_float(), var, t))
    b = _roots(_slice(g.as_float(), var, t))
    a, b = _cancel(a, b, tol)
    s = np.exp(2j * np.pi * np.arange(contour) / contour)
    num = np.prod(s[:, None] - a[None, :], axis=1) if len(a) else np.ones(contour, dtype=complex)
    den = np.prod(s[:, None] - b[None, :], axis=1) if len(b) else np.ones(contour, dtype=complex)
    if len(a) and np.min(np.abs(np.abs(a) - 1)) < tol:
        raise WindingAmbiguous("reduced determinant has a zero on the unit circle", t=[t.real, t.imag])
    if len(b) and np.min(np.abs(np.abs(b) - 1)) < tol:
        raise WindingAmbiguous("reduced determinant has a pole on the unit circle", t=[t.real, t.imag])
    v = num / den
    if np.abs(v).min() < tol * np.abs(v).max():
        raise WindingAmbiguous("contour passes too close to zero", t=[t.real, t.imag])
    steps = np.angle(np.roll(v, -1) / v)
    return int(np.rint(steps.sum() / (2 * np.pi)))


def _slice_values(frame, phi, var, t, M):
    s = np.exp(2j * np.pi * np.arange(M) / M)
    tt = np.full(M, t)
    z1, z2 = (tt, s) if var == 0 else (s, tt)
    F = frame.values(z1, z2)  # (M, N, r)
    P = phi(z1, z2)  # (M, N, N)
    return F, P


def slice_isometry(phi, which_space, t, kernels=None, bound=None, tol=1e-12, m0=64, cap=1 << 16,
                   raise_exceptional=False):
    """Slice an orthonormal frame of ``which_space`` at a torus point.

    The sliced Gram is compared with the identity (the two-variable Gram of
    the frame) and the slices are tested for membership in the one-variable
    model space.  Exceptional slices are reported with ``exceptional=True``
    and no Gram data, or raise :class:`ExceptionalSlice` on request.
    """
    if which_space not in SPACES:
        raise KeyError(f"unknown space {which_space!r}; expected one of {sorted(SPACES)}")
    label, var = SPACES[which_space]
    t = complex(t)
    try:
        dim = onevar_model_dim(phi, t, var)
        ambiguous = False
    except WindingAmbiguous:
        dim, ambiguous = -1, True
    if ambiguous or is_exceptional(phi, t, var):
        rep = SliceReport(t, which_space, None, None, 0, dim, True)
        if raise_exceptional:
            raise ExceptionalSlice(f"slice at t={t} is exceptional", report=rep.to_dict())
        return rep
    if kernels is None:
        from .hilbert import canonical_kernels

        kernels = canonical_kernels(phi)
    frame = kernels[label]
    r = frame.dim
    if bound is None:
        bound = max(phi.d)
    M = m0
    prev = None
    while True:
        F, P = _slice_values(frame, phi, var, t, M)
        G = np.einsum("mnj,mnk->jk", F.conj(), F) / M
        if prev is not None and np.abs(G - prev).max() < tol:
            break
        if M >= cap:
            break
        prev = G
        M *= 2
    G = (G + G.conj().T) / 2
    gram_error = float(np.linalg.norm(G - np.eye(r), 2)) if r else 0.0
    # phi(t, .)^* f(t, .) must have no Fourier coefficients of index 0..2*bound
    g = np.einsum("mnk,mnj->mkj", P.conj(), F)  # (M, N, r)
    coef = np.fft.fft(g, axis=0) / M
    mem = float(np.abs(coef[:2 * bound + 1]).max()) if r else 0.0
    s = np.linalg.svd(G, compute_uv=False) if r else np.zeros(0)
    rank = int(np.sum(s > 1e-8)) if r else 0
    return SliceReport(t, which_space, gram_error, mem, rank, dim, False, M, 2 * bound)


def random_torus_points(n, seed=0):
    rng = np.random.default_rng(seed)
    return np.exp(2j * np.pi * rng.random(n))


__all__ = ["SliceReport", "slice_isometry", "onevar_model_dim", "is_exceptional", "random_torus_points",
           "SPACES"]
