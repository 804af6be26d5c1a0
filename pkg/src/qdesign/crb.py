"""Estimation-performance metrics for one-bit quantizers.

For a quantizer ``gamma`` and noise density ``f``, a sensor observing
``x = theta + w`` emits symbol S1 with probability

    g(theta) = int gamma(x) f(x - theta) dx,

a Bernoulli channel whose single-sensor Fisher information is
``I(theta) = g'(theta)**2 / (g(theta) (1 - g(theta)))``. The worst-case
Cramer-Rao bound ``phi = max_theta 1/I(theta)`` over the parameter range
[-1, 1] is the minimax design metric. Antisymmetric quantizers with
symmetric noise give a symmetric bound, so everything is evaluated on the
half grid theta_l = -l/L, l = 0..L.

Saturated tails of gamma are handled in closed form through the noise cdf;
only the non-trivial part of the support is integrated. Known closed forms
(threshold rule, zero noise) bypass the integrator entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .noise import NoiseDensity
from .quadrature import QuadratureError, integrate
from .quantizers import Quantizer, ThresholdQuantizer

DEGENERATE_EPS = 1e-12

_DEFAULT_TOL = 1e-10


class NumericalFailure(Exception):
    """Quadrature did not converge."""


class DegenerateProbability(Exception):
    """g(theta) saturated at 0 or 1 where a finite bound was required."""


class OptimizationFailure(Exception):
    """A numerical search did not produce a usable result."""


def _core_window(q: Quantizer, d: NoiseDensity, theta: float, eps: float):
    lo, hi = q.support()
    w = d.tail_radius(eps)
    return max(lo, theta - w), min(hi, theta + w), hi


def _g_generic(q: Quantizer, d: NoiseDensity, theta: float, tol: float) -> float:
    a, b, hi = _core_window(q, d, theta, eps=2e-13)
    val = 0.0
    if b > a:
        kinks = tuple(q.breakpoints()) + (theta,)
        try:
            val = integrate(
                lambda x: q.evaluate(x) * d.pdf(x - theta), a, b, tol, breakpoints=kinks
            )
        except QuadratureError as exc:
            raise NumericalFailure(str(exc)) from exc
    val += 1.0 - d.cdf(hi - theta)  # saturated upper tail, exact
    return min(max(val, 0.0), 1.0)


def g_of_theta(q: Quantizer, d: NoiseDensity, theta: float, tol: float = _DEFAULT_TOL) -> float:
    """Probability of emitting S1 at parameter value theta."""
    if not d.has_density:
        return float(q.evaluate(theta))
    if isinstance(q, ThresholdQuantizer):
        return float(d.cdf(theta))
    return _g_generic(q, d, theta, tol)


def g_antisymmetric_form(
    q: Quantizer, d: NoiseDensity, theta: float, tol: float = _DEFAULT_TOL
) -> float:
    """g via the reduced form F(theta) + int_{-1}^{0} gamma(x) xi(theta, x) dx.

    Valid for antisymmetric unit-support quantizers with symmetric noise,
    where xi(theta, x) = f(x - theta) - f(x + theta). Kept as an independent
    route for cross-checking the direct integral.
    """
    d._require_density()
    kinks = tuple(p for p in q.breakpoints() if -1.0 < p < 0.0) + (theta, -theta)
    try:
        corr = integrate(
            lambda x: q.evaluate(x) * (d.pdf(x - theta) - d.pdf(x + theta)),
            -1.0,
            0.0,
            tol,
            breakpoints=kinks,
        )
    except QuadratureError as exc:
        raise NumericalFailure(str(exc)) from exc
    return float(d.cdf(theta)) + corr


def g_prime(q: Quantizer, d: NoiseDensity, theta: float, tol: float = _DEFAULT_TOL) -> float:
    """Derivative of g. Positive for admissible quantizers.

    Uses the analytic form -int gamma(x) f'(x - theta) dx plus the saturated
    boundary term when the noise is differentiable (beta > 1); the Laplacian
    falls back to a central difference of g with a tightened tolerance.
    """
    if not d.has_density:
        return float(q.slope(theta))
    if isinstance(q, ThresholdQuantizer):
        return float(d.pdf(theta))  # g == F exactly
    if d.beta > 1.0:
        a, b, hi = _core_window(q, d, theta, eps=1e-16)
        val = 0.0
        if b > a:
            kinks = tuple(q.breakpoints()) + (theta,)
            try:
                val = -integrate(
                    lambda x: q.evaluate(x) * d.pdf_derivative(x - theta),
                    a,
                    b,
                    tol,
                    breakpoints=kinks,
                )
            except QuadratureError as exc:
                raise NumericalFailure(str(exc)) from exc
        return val + float(d.pdf(hi - theta))
    # density kink at the origin: differentiate g numerically
    h = 1e-4 * max(d.sigma, 1e-2)
    fine = min(tol, 1e-13)
    return (g_of_theta(q, d, theta + h, fine) - g_of_theta(q, d, theta - h, fine)) / (2.0 * h)


def fisher_information(
    q: Quantizer, d: NoiseDensity, theta: float, tol: float = _DEFAULT_TOL
) -> float:
    """Single-sensor Fisher information of the induced Bernoulli channel."""
    g = g_of_theta(q, d, theta, tol)
    if not (DEGENERATE_EPS < g < 1.0 - DEGENERATE_EPS):
        raise DegenerateProbability(f"g({theta}) = {g} saturates; bound is infinite")
    gp = g_prime(q, d, theta, tol)
    return gp * gp / (g * (1.0 - g))


def crb(q: Quantizer, d: NoiseDensity, theta: float, tol: float = _DEFAULT_TOL) -> float:
    return 1.0 / fisher_information(q, d, theta, tol)


@dataclass(frozen=True)
class CrbProfile:
    """CRB(theta) sampled on the half grid, plus its worst case.

    thetas ascend from -1 to 0; saturated grid points carry an infinite
    bound. phi is the maximum over the grid, except that saturation exactly
    at theta = -1 (the continuity endpoint of the open parameter interval)
    is excluded rather than reported as infinite.
    """

    thetas: np.ndarray
    g_values: np.ndarray
    crb_values: np.ndarray
    phi: float
    argmax_theta: float
    L: int

    def to_csv(self) -> str:
        lines = ["theta,g,crb"]
        for t, g, c in zip(self.thetas, self.g_values, self.crb_values):
            lines.append(f"{float(t)!r},{float(g)!r},{float(c)!r}")
        return "\n".join(lines) + "\n"

    def sidecar(self) -> dict:
        return {"phi": self.phi, "argmax_theta": self.argmax_theta, "L": self.L}


def max_crb(q: Quantizer, d: NoiseDensity, L: int, tol: float = _DEFAULT_TOL) -> CrbProfile:
    """Evaluate CRB on theta_l = -l/L for l = 0..L and take the worst case.

    Interior saturation makes phi infinite (the quantizer is unusable inside
    the parameter range); saturation at the -1 endpoint only drops that
    point. Raises DegenerateProbability when no grid point is usable.
    """
    if L < 10:
        raise ValueError(f"grid size L must be at least 10, got {L}")
    gs = np.empty(L + 1)
    crbs = np.full(L + 1, np.inf)
    usable = np.zeros(L + 1, dtype=bool)
    for l in range(L + 1):
        th = -l / L
        g = g_of_theta(q, d, th, tol)
        gs[l] = g
        if DEGENERATE_EPS < g < 1.0 - DEGENERATE_EPS:
            gp = g_prime(q, d, th, tol)
            usable[l] = True
            if gp != 0.0:
                crbs[l] = g * (1.0 - g) / (gp * gp)
    if not usable.any():
        raise DegenerateProbability("g saturates at every grid point")
    phi = -math.inf
    arg = 0.0
    for l in range(L + 1):
        if not usable[l]:
            if l < L:  # saturation strictly inside the parameter range
                phi = math.inf
                arg = -l / L
                break
            continue  # continuity endpoint: excluded from the sup
        if crbs[l] > phi:
            phi = crbs[l]
            arg = -l / L
    order = slice(None, None, -1)  # store ascending in theta
    return CrbProfile(
        thetas=-np.arange(L + 1)[order] / L,
        g_values=gs[order],
        crb_values=crbs[order],
        phi=float(phi),
        argmax_theta=arg,
        L=L,
    )


def is_admissible(q: Quantizer, d: NoiseDensity, L: int, tol: float = _DEFAULT_TOL) -> bool:
    """True when g is increasing over the theta grid.

    Grid increments may be arbitrarily small for genuinely admissible rules
    (noise tails), so the check allows 1e-10 of roundoff slack rather than
    demanding a positive margin.
    """
    th = -np.arange(L + 1)[::-1] / L
    g = np.array([g_of_theta(q, d, t, tol) for t in th])
    return bool(np.all(np.diff(g) > -1e-10))


def dominates(
    q1: Quantizer, q2: Quantizer, d: NoiseDensity, L: int, tol: float = _DEFAULT_TOL
) -> bool:
    """True when CRB of q1 is pointwise no larger than that of q2 on the grid.

    Both quantizers are assumed admissible under d.
    """
    p1 = max_crb(q1, d, L, tol)
    p2 = max_crb(q2, d, L, tol)
    return bool(np.all(p1.crb_values <= p2.crb_values + 1e-9))


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def critical_sigma(
    beta: float,
    search: tuple[float, float] = (0.05, 3.0),
    tol: float = 1e-4,
    L: int = 200,
) -> float:
    """Noise scale minimizing the threshold rule's worst-case bound.

    Golden-section search over sigma. Dithering pads ambient noise up to
    this scale; below it the threshold rule only gets worse.
    """
    from .noise import generalized_gaussian

    def phi(sig: float) -> float:
        return max_crb(ThresholdQuantizer(), generalized_gaussian(beta, sig * sig), L).phi

    a, b = search
    c = b - _INV_PHI * (b - a)
    e = a + _INV_PHI * (b - a)
    fc, fe = phi(c), phi(e)
    while b - a > tol:
        if fc < fe:
            b, e, fe = e, c, fc
            c = b - _INV_PHI * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, e, fe
            e = a + _INV_PHI * (b - a)
            fe = phi(e)
    sig = 0.5 * (a + b)
    lo, hi = search
    if sig - lo < 10 * tol or hi - sig < 10 * tol:
        raise OptimizationFailure(
            f"no interior minimum: search ended at sigma = {sig:.6g} on [{lo}, {hi}]"
        )
    return sig


def sine_high_snr_limit(beta: float) -> float:
    """Vanishing-noise limit of the half-sine quantizer's boundary CRB.

    Closed form (8/pi^2) * Gamma(1/b) Gamma(3/b) / Gamma(2/b)^2; always above
    8/pi^2, twice the zero-noise optimum 4/pi^2.
    """
    g = math.gamma
    return 8.0 / math.pi**2 * g(1.0 / beta) * g(3.0 / beta) / g(2.0 / beta) ** 2


def sine_limit_from_one_sided_mean(d: NoiseDensity) -> float:
    """Same limit through the normalized one-sided mean mu1: (4/pi^2)/(2 mu1^2)."""
    mu1 = d.normalized_one_sided_mean()
    return 4.0 / math.pi**2 / (2.0 * mu1 * mu1)


def default_grid_size(d: NoiseDensity) -> int:
    """Grid-size rule ceil(10/sigma), clamped to [100, 2000]."""
    if d.sigma2 <= 0.0:
        return 2000
    return int(min(max(math.ceil(10.0 / d.sigma), 100), 2000))
