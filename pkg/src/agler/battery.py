"""Pass/fail sweep over the built-in fixtures."""

import numpy as np

from .errors import AglerError
from .fixtures import INNER, STRICT_BATTERY, TRIVAR, monomial
from .hilbert import agler_residual, canonical_kernels, sample_pairs
from .inner import STRICT, validate
from .realization import realize
from .restriction import onevar_model_dim, random_torus_points, slice_isometry
from .subspaces import basis, dims_check
from .trivar import decompose

# final-identity thresholds for the trivariate fixtures
TRIVAR_TOL = {"p_4_minus_sum": 1e-8, "p_8_minus_z1sq": 1e-7, "p_3_minus_sum": 1e-6}


def _guard(checks, name, fn):
    """Record ``fn()`` as a boolean check; failures with an error count as False."""
    try:
        checks[name] = bool(fn())
    except AglerError as exc:
        checks[name] = False
        return f"{name}: {type(exc).__name__}: {exc}"
    return None


def bivariate_checks(name, Q, p, seed=0, samples=100, tol_residual=1e-8, tol_rank=1e-9, exact=False):
    checks, notes, values = {}, [], {}
    try:
        phi = validate(Q, p) if exact else validate(Q.as_float(), p.as_float())
    except AglerError as exc:
        return {"fixture": name, "checks": {"validate": False}, "pass": False,
                "notes": [f"validate: {type(exc).__name__}: {exc}"], "values": {}}
    checks["validate"] = True
    bases = {}

    def dims():
        for w in ("K", "K1", "K2"):
            bases[w] = basis(phi, w, tol_rank=tol_rank, exact=exact or None)
        rep = dims_check(phi, bases)
        values["dims"] = [rep.dim_K, rep.dim_K1_minus_K, rep.dim_K2_minus_K]
        values["deg_g_tilde"] = [rep.deg1_gtilde, rep.deg2_gtilde]
        return rep.match

    notes.append(_guard(checks, "dims", dims))
    if not checks["dims"]:
        return {"fixture": name, "checks": checks, "pass": False, "notes": [n for n in notes if n],
                "values": values}
    if exact:
        def float_agree():
            return all(basis(phi, w, tol_rank=tol_rank, exact=False).dim == bases[w].dim for w in bases)

        notes.append(_guard(checks, "exact_float_agree", float_agree))
        fb = {w: basis(phi, w, tol_rank=tol_rank, exact=False) for w in bases}
    else:
        fb = bases
    can = {}

    def agler():
        can.update(canonical_kernels(phi, fb))
        Z, W = sample_pairs(samples, seed=seed)
        r = max(agler_residual(phi, can["E1"], can["F2"], Z, W),
                agler_residual(phi, can["F1"], can["E2"], Z, W),
                agler_residual(phi, can["F1"], can["F2"], Z, W, G=can["G"]))
        values["agler_residual_ok"] = bool(r <= tol_residual)
        return r <= tol_residual

    notes.append(_guard(checks, "agler", agler))

    def real():
        r = realize(phi, seed=seed, canon=can or None)
        return r.residuals["transfer"] <= max(tol_residual, 1e-7) and r.size == phi.N + sum(phi.gdeg)

    notes.append(_guard(checks, "realize", real))

    def slices():
        if phi.stability == STRICT:
            ts = random_torus_points(10, seed=seed)
            for space in ("K1_minus_K", "K1_minus_Z1K", "K2_minus_K", "K2_minus_Z2K"):
                for t in ts:
                    s = slice_isometry(phi, space, t, kernels=can)
                    if not s.exceptional and (s.gram_error > 1e-6 or s.rank != s.onevar_dim):
                        return False
            return True
        # boundary fixtures: every torus zero gives an exceptional slice with a dropped model dimension
        ok = True
        for th1, _ in phi.torus_zeros:
            t = np.exp(1j * th1)
            s = slice_isometry(phi, "K1_minus_K", t, kernels=can)
            ok = ok and s.exceptional and onevar_model_dim(phi, t) < phi.gdeg[1]
        return ok

    notes.append(_guard(checks, "slices", slices))
    return {"fixture": name, "checks": checks, "pass": all(checks.values()), "notes": [n for n in notes if n],
            "values": values}


def trivar_checks(name, p, seed=0):
    checks, values = {}, {}
    note = None
    try:
        cert = decompose(p, seed=seed)
        n = cert.n
        checks["counts"] = cert.counts == [2 * n, 2, 2]
        checks["identity"] = cert.residuals["final_identity"] <= TRIVAR_TOL.get(name, 1e-7)
        checks["property"] = cert.residuals["property"] <= (1e-8 if not cert.boundary else 1e-6)
        values = {"counts": cert.counts, "boundary": cert.boundary}
    except AglerError as exc:
        checks["identity"] = False
        note = f"decompose: {type(exc).__name__}: {exc}"
    return {"fixture": name, "checks": checks, "pass": all(checks.values()), "notes": [note] if note else [],
            "values": values}


def run_battery(seed=0, samples=100, tol_residual=1e-8, tol_rank=1e-9, exact=False, trivariate=True):
    """Run every fixture through the applicable checks; returns a list of row dicts."""
    rows = []
    fixtures = [(name, INNER[name]) for name in STRICT_BATTERY + ["boundary_scalar"]]
    fixtures += [(f"monomial_{m}_{n}", (lambda m=m, n=n: monomial(m, n))) for m in (1, 3) for n in (1, 2)]
    for name, make in fixtures:
        Q, p = make()
        use_exact = exact and name.startswith("monomial")
        rows.append(bivariate_checks(name, Q, p, seed=seed, samples=samples, tol_residual=tol_residual,
                                     tol_rank=tol_rank, exact=use_exact))
    if trivariate:
        for name, make in TRIVAR.items():
            rows.append(trivar_checks(name, make(), seed=seed))
    return rows
