"""Figures and delimited output for command-line reports.

Every figure is written with the non-interactive Agg backend; callers pass
the output directory and receive the list of files written.
"""

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

PAIR_HEADER = ["z1_re", "z1_im", "z2_re", "z2_im", "w1_re", "w1_im", "w2_re", "w2_im", "residual"]
SLICE_HEADER = ["t", "space", "gram_error", "onevar_dim", "exceptional"]
GRID_HEADER = ["z1_re", "z1_im", "z2_re", "z2_im", "z3_re", "z3_im", "residual"]


def _save(fig, outdir, name):
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, name)
    fig.savefig(path, dpi=120, bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    return path


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return path


def flatten(obj, prefix=""):
    """Key/value rows of a nested JSON-like report."""
    rows = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            rows += flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and obj and all(isinstance(x, (dict, list)) for x in obj):
        for i, v in enumerate(obj):
            rows += flatten(v, f"{prefix}[{i}]")
    else:
        rows.append((prefix, obj if not isinstance(obj, list) else " ".join(map(str, obj))))
    return rows


def pair_rows(Z, W, res):
    return [[z[0].real, z[0].imag, z[1].real, z[1].imag, w[0].real, w[0].imag, w[1].real, w[1].imag, r]
            for z, w, r in zip(Z, W, res)]


def plot_torus_modulus(p, outdir, grid=256):
    """log10 |p| over the torus, showing where the denominator approaches zero."""
    th = 2 * np.pi * np.arange(grid) / grid
    Z1, Z2 = np.meshgrid(np.exp(1j * th), np.exp(1j * th), indexing="ij")
    v = np.log10(np.abs(p.as_float()(Z1, Z2)) + 1e-16)
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(v.T, origin="lower", extent=[0, 2 * np.pi, 0, 2 * np.pi], cmap="viridis", aspect="auto")
    fig.colorbar(im, ax=ax, label="log10 |p|")
    ax.set_xlabel("arg z1")
    ax.set_ylabel("arg z2")
    ax.set_title("denominator modulus on the torus")
    return [_save(fig, outdir, "torus_modulus.png")]


def plot_singular_values(sv, cutoff, outdir, which):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    sv = np.asarray(sv, dtype=float)
    if sv.size:
        ax.semilogy(np.arange(1, sv.size + 1), np.maximum(sv, 1e-18), "o-", ms=3)
        ax.axhline(cutoff * sv[0], color="r", ls="--", label="rank cutoff")
        ax.legend()
    ax.set_xlabel("index")
    ax.set_ylabel("singular value")
    ax.set_title(f"divisibility system for {which}")
    return [_save(fig, outdir, f"singular_values_{which}.png")]


def plot_residuals(residuals, outdir, name="kernel_residuals.png", title="Agler identity residuals"):
    """Histogram of log10 residuals, one series per label."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, r in residuals.items():
        r = np.log10(np.maximum(np.asarray(r, dtype=float), 1e-18))
        ax.hist(r, bins=30, alpha=0.6, label=label)
    ax.set_xlabel("log10 residual")
    ax.set_ylabel("count")
    ax.set_title(title)
    ax.legend()
    return [_save(fig, outdir, name)]


def plot_unitary(U, outdir):
    fig, ax = plt.subplots(figsize=(4.5, 4))
    im = ax.imshow(np.abs(U), cmap="magma", vmin=0, vmax=1)
    fig.colorbar(im, ax=ax, label="|U_ij|")
    ax.set_title("realization unitary")
    return [_save(fig, outdir, "unitary.png")]


def plot_slices(reports, outdir):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for space in sorted({r.which_space for r in reports}):
        pts = [(np.angle(r.t) % (2 * np.pi), r.gram_error) for r in reports
               if r.which_space == space and not r.exceptional]
        if pts:
            a, e = zip(*pts)
            ax.semilogy(a, np.maximum(e, 1e-18), "o", ms=4, label=space)
    for r in reports:
        if r.exceptional:
            ax.axvline(np.angle(r.t) % (2 * np.pi), color="k", ls=":", lw=1)
    ax.set_xlabel("arg t")
    ax.set_ylabel("sliced Gram error")
    ax.set_title("slice isometry")
    if any(not r.exceptional for r in reports):
        ax.legend()
    return [_save(fig, outdir, "slice_gram_error.png")]


def plot_trivar(cert, outdir, grid=64):
    """Final identity residual over a torus-interior slice z3 = 0.5 and the torus values of |E|^2."""
    w = np.exp(2j * np.pi * np.arange(grid) / grid)
    r = np.linspace(0, 1, grid)
    R1, T1 = np.meshgrid(r, 2 * np.pi * np.arange(grid) / grid, indexing="ij")
    Z1 = R1 * np.exp(1j * T1)
    Z2 = np.full_like(Z1, 0.7 * w[grid // 8])
    Z3 = np.full_like(Z1, 0.5)
    Z = np.stack([Z1.ravel(), Z2.ravel(), Z3.ravel()], axis=1)
    s1, s2, s3 = cert.sos(Z)
    pv, ptv = cert.p(*Z.T), cert.p_t(*Z.T)
    lhs = np.abs(pv) ** 2 - np.abs(ptv) ** 2
    rhs = (1 - np.abs(Z[:, 0]) ** 2) * s1 + (1 - np.abs(Z[:, 1]) ** 2) * s2 + (1 - np.abs(Z[:, 2]) ** 2) * s3
    err = np.log10(np.abs(lhs - rhs) / np.abs(pv).max() ** 2 + 1e-18).reshape(Z1.shape)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    im = axes[0].imshow(err, origin="lower", extent=[0, 2 * np.pi, 0, 1], aspect="auto", cmap="viridis")
    fig.colorbar(im, ax=axes[0], label="log10 relative residual")
    axes[0].set_xlabel("arg z1")
    axes[0].set_ylabel("|z1|")
    axes[0].set_title("identity residual, z2, z3 fixed")
    W1, W2 = np.meshgrid(w, w, indexing="ij")
    e2 = sum(np.abs(e(W1, W2)) ** 2 for e in cert.E)
    im = axes[1].imshow(e2.T, origin="lower", extent=[0, 2 * np.pi, 0, 2 * np.pi], aspect="auto", cmap="magma")
    fig.colorbar(im, ax=axes[1], label="|E1|^2 + |E2|^2")
    axes[1].set_xlabel("arg z1")
    axes[1].set_ylabel("arg z2")
    axes[1].set_title("two squares on the torus")
    return [_save(fig, outdir, "trivar.png")]


def plot_battery(rows, outdir):
    """Pass/fail matrix: fixtures down, checks across."""
    checks = sorted({c for r in rows for c in r["checks"]})
    names = [r["fixture"] for r in rows]
    M = np.full((len(names), len(checks)), np.nan)
    for i, r in enumerate(rows):
        for j, c in enumerate(checks):
            if c in r["checks"]:
                M[i, j] = 1.0 if r["checks"][c] else 0.0
    fig, ax = plt.subplots(figsize=(1 + 0.6 * len(checks), 1 + 0.4 * len(names)))
    ax.imshow(M, cmap="RdYlGn", vmin=0, vmax=1, aspect="auto")
    ax.set_xticks(range(len(checks)))
    ax.set_xticklabels(checks, rotation=60, ha="right")
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names)
    ax.set_title("battery")
    return [_save(fig, outdir, "battery.png")]
