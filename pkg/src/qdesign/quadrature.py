"""Adaptive composite Gauss-Legendre integration.

Panels carry a 15-point rule and are bisected until the change between a
panel's estimate and the sum over its halves drops below the share of the
absolute tolerance assigned to the panel (proportional to its width). The
integrand is evaluated on whole batches of panel nodes at once, so it must
accept numpy arrays. Panel sums are accumulated in left-to-right order,
which makes results independent of the refinement schedule.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(15)

_MAX_LEVELS = 48


class QuadratureError(Exception):
    """Adaptive refinement failed to converge."""


def _panel_values(f, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """15-point Gauss-Legendre estimates for a batch of panels."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    return half * (y @ _WEIGHTS)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-10,
    breakpoints: Iterable[float] = (),
) -> float:
    """Integrate f over [a, b] to absolute tolerance tol.

    Known kinks of the integrand can be passed as breakpoints; panels are
    split there up front so every panel sees a smooth function.
    """
    if not b > a:
        return 0.0
    edges = [a] + sorted(p for p in set(float(p) for p in breakpoints) if a < p < b) + [b]
    lo = np.asarray(edges[:-1])
    hi = np.asarray(edges[1:])
    coarse = _panel_values(f, lo, hi)
    total_width = b - a

    done: list[tuple[float, float]] = []  # (left edge, panel integral)
    for _ in range(_MAX_LEVELS):
        mid = 0.5 * (lo + hi)
        left = _panel_values(f, lo, mid)
        right = _panel_values(f, mid, hi)
        fine = left + right
        err = np.abs(fine - coarse)
        ok = err <= tol * (hi - lo) / total_width
        for i in np.nonzero(ok)[0]:
            done.append((lo[i], fine[i]))
        keep = ~ok
        if not np.any(keep):
            break
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        coarse = np.concatenate([left[keep], right[keep]])
    else:
        raise QuadratureError(
            f"no convergence after {_MAX_LEVELS} bisection levels on [{a}, {b}]"
        )
    done.sort(key=lambda t: t[0])
    return float(sum(v for _, v in done))
