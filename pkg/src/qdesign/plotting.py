"""Figure rendering for the CLI report paths.

Every plot function takes already-computed data (the same arrays that went
into the CSV output) and writes a PNG next to it. Rendering uses the Agg
backend so the CLI works headless.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLES = {
    "threshold": dict(color="tab:blue", ls="-"),
    "sine": dict(color="tab:green", ls="-"),
    "dither": dict(color="tab:orange", ls="--"),
    "aupl": dict(color="tab:red", ls="-", lw=2.2),
}


def save_sweep_figure(path, rows):
    """Worst-case Fisher information vs noise scale, one curve per quantizer.

    rows: iterables of (sigma, quantizer_name, min_fisher_info, phi).
    """
    fig, ax = plt.subplots(figsize=(7, 5))
    by_name: dict[str, list] = {}
    for sigma, name, mfi, _ in rows:
        by_name.setdefault(name, []).append((sigma, mfi))
    for name, pts in by_name.items():
        pts.sort()
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        ax.semilogx(xs, ys, label=name, **_STYLES.get(name, {}))
    ax.axhline(math.pi**2 / 4.0, color="gray", ls=":", lw=1,
               label=r"zero-noise limit $\pi^2/4$")
    ax.set_xlabel(r"noise standard deviation $\sigma$")
    ax.set_ylabel(r"worst-case Fisher information $\phi^{-1}$")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_shape_figure(path, xs, gammas, title="quantizer response"):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(xs, gammas, color="tab:red")
    ax.set_xlabel("x")
    ax.set_ylabel(r"$\gamma(x) = P(S_1 \mid x)$")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_g_figure(path, thetas, gs, title="induced response probability"):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(thetas, gs, color="tab:purple")
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel(r"$g(\theta)$")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_crb_figure(path, thetas, crbs, phi):
    fig, ax = plt.subplots(figsize=(7, 4))
    finite = np.isfinite(crbs)
    ax.plot(np.asarray(thetas)[finite], np.asarray(crbs)[finite], color="tab:blue")
    if math.isfinite(phi):
        ax.axhline(phi, color="gray", ls=":", lw=1, label=f"worst case {phi:.4g}")
        ax.legend()
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel(r"CRB$(\theta)$")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
