"""Minimax design of antisymmetric unit-support piecewise-linear quantizers.

The decision variable is the slope vector m of a piecewise-linear gamma on
the K uniform cells of [-1, 0]. For such a quantizer both g and g' are
linear in m:

    g(theta_l)  = a_l . m + F_l,      g'(theta_l) = c_l . m + f_l,

with coefficients assembled from per-cell integrals of
xi(theta, x) = f(x - theta) - f(x + theta) and x*xi against the noise
density (a = J q + r, c = J q' + r'; J is upper-triangular with diagonal
K..1 and ones above). The worst-case bound over the parameter grid
theta_l = -l/L, l = 0..L, is then

    phi(m) = max_l  (a_l.m + F_l)(1 - a_l.m - F_l) / (c_l.m + f_l)^2,

minimized subject to the probability constraints 0 <= sum_{j<=k} m_j <= K
and the continuity constraint sum m = K/2. The max is handled in epigraph
form (minimize t with t >= every term) and solved by SLSQP from several
feasible starting points; the slope-space constraints are linear, so a
feasible start keeps every iterate inside the probability polytope.

All per-cell integrals have closed forms through the noise cdf and partial
first moment, so coefficient assembly is exact; the returned design is
re-validated against the independent quadrature path in crb.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .crb import CrbProfile, OptimizationFailure, max_crb
from .noise import NoiseDensity
from .quantizers import PiecewiseLinearQuantizer, SineQuantizer, piecewise_linear

# Lower bound kept on every grid denominator g'(theta_l); expressible as a
# linear constraint because c_l is constant. Keeps iterates admissible.
_H_FLOOR = 1e-9


class InadmissibleIterate(Exception):
    """A slope vector drove some grid denominator g'(theta_l) nonpositive."""


@dataclass(frozen=True)
class AuplCoefficients:
    """Precomputed grid quantities turning phi into a function of m."""

    K: int
    L: int
    J: np.ndarray  # (K, K)
    q: np.ndarray  # (L+1, K) cell integrals of xi, scaled by the cell width
    r: np.ndarray  # (L+1, K) cell integrals of x * xi
    q_prime: np.ndarray
    r_prime: np.ndarray
    a: np.ndarray  # (L+1, K)
    c: np.ndarray  # (L+1, K)
    F: np.ndarray  # (L+1,)
    f: np.ndarray  # (L+1,)
    nodes: np.ndarray  # (K+1,) cell edges on [-1, 0]
    thetas: np.ndarray  # (L+1,) grid -l/L


def _upper_tri_weights(K: int) -> np.ndarray:
    J = np.triu(np.ones((K, K)))
    J[np.diag_indices(K)] = np.arange(K, 0, -1)
    return J


def precompute_coefficients(d: NoiseDensity, K: int, L: int) -> AuplCoefficients:
    """Assemble the per-grid-point coefficient vectors for the objective.

    Cell integrals of xi and x*xi reduce to differences of the noise cdf and
    of its partial first moment at shifted cell edges, so no quadrature is
    involved; their theta-derivatives likewise reduce to pdf/cdf values.
    """
    d._require_density()
    if K < 1 or L < 1:
        raise ValueError("K and L must be positive")
    x = -(K - np.arange(K + 1)) / K
    thetas = -np.arange(L + 1) / L
    dx = 1.0 / K
    t = thetas[:, None]
    xs = x[None, :]

    def cell_mass(t):
        # int_cell f(x - t) dx
        F = d.cdf(xs - t)
        return F[:, 1:] - F[:, :-1]

    def cell_first(t):
        # int_cell x f(x - t) dx, via the partial first moment
        H = d.partial_first_moment(xs - t) + t * d.cdf(xs - t)
        return H[:, 1:] - H[:, :-1]

    def cell_mass_dt(t):
        f = d.pdf(xs - t)
        return f[:, :-1] - f[:, 1:]

    def cell_first_dt(t):
        H = d.cdf(xs - t) - xs * d.pdf(xs - t)
        return H[:, 1:] - H[:, :-1]

    q = dx * (cell_mass(t) - cell_mass(-t))
    r = cell_first(t) - cell_first(-t)
    qp = dx * (cell_mass_dt(t) + cell_mass_dt(-t))
    rp = cell_first_dt(t) + cell_first_dt(-t)

    J = _upper_tri_weights(K)
    return AuplCoefficients(
        K=K,
        L=L,
        J=J,
        q=q,
        r=r,
        q_prime=qp,
        r_prime=rp,
        a=q @ J.T + r,
        c=qp @ J.T + rp,
        F=np.asarray(d.cdf(thetas)),
        f=np.asarray(d.pdf(thetas)),
        nodes=x,
        thetas=thetas,
    )


def _terms(coeffs: AuplCoefficients, m: np.ndarray):
    g = coeffs.a @ m + coeffs.F
    h = coeffs.c @ m + coeffs.f
    # the 1e-100 floor only guards arithmetic at wildly infeasible points;
    # the admissibility constraints keep h well above it along the solve
    return g, h, g * (1.0 - g) / np.maximum(h, 1e-100) ** 2


def objective(coeffs: AuplCoefficients, m) -> tuple[float, list[int]]:
    """Worst-case bound over the grid, with the achieving index set.

    Indices tied with the max within 1e-12 (relative to its size) are all
    reported. Raises InadmissibleIterate when any denominator g'(theta_l)
    is nonpositive.
    """
    m = np.asarray(m, dtype=float)
    g, h, T = _terms(coeffs, m)
    if np.any(h <= 0.0):
        bad = int(np.argmin(h))
        raise InadmissibleIterate(
            f"g'(theta_{bad}) = {h[bad]:.3e} <= 0; slope vector leaves the admissible set"
        )
    phi = float(np.max(T))
    cut = phi - 1e-12 * max(1.0, abs(phi))
    active = [int(i) for i in np.nonzero(T >= cut)[0]]
    return phi, active


def objective_subgradient(coeffs: AuplCoefficients, m) -> np.ndarray:
    """Gradient of the active term, averaged over ties.

    For T_l = g(1-g)/h^2 the gradient is ((1-2g)/h^2) a_l - (2g(1-g)/h^3) c_l.
    """
    m = np.asarray(m, dtype=float)
    _, active = objective(coeffs, m)
    g = coeffs.a @ m + coeffs.F
    h = coeffs.c @ m + coeffs.f
    grad = np.zeros(coeffs.K)
    for l in active:
        grad += ((1.0 - 2.0 * g[l]) / h[l] ** 2) * coeffs.a[l] - (
            2.0 * g[l] * (1.0 - g[l]) / h[l] ** 3
        ) * coeffs.c[l]
    return grad / len(active)


def starting_points(coeffs: AuplCoefficients) -> list[tuple[str, np.ndarray]]:
    """Feasible starts: the nearest in-class matches of the two closed-form rules.

    Threshold-like puts all slope mass in the last cell; sine-like samples
    the half-sine ramp at the cell edges (rescaled so the slopes sum to K/2
    exactly in floating point).
    """
    K = coeffs.K
    m_thresh = np.zeros(K)
    m_thresh[-1] = K / 2.0
    gamma0 = SineQuantizer().evaluate(coeffs.nodes)
    m_sine = K * np.diff(gamma0)
    m_sine *= (K / 2.0) / m_sine.sum()
    return [("threshold-like", m_thresh), ("sine-like", m_sine)]


@dataclass
class DesignOptions:
    maxiter: int = 2000
    ftol: float = 1e-10
    extra_starts: list = field(default_factory=list)  # (label, slopes) pairs
    random_starts: int = 0
    seed: int = 0


@dataclass(frozen=True)
class DesignResult:
    slopes: tuple[float, ...]
    phi: float
    start_label: str
    iterations: int
    converged: bool
    profile: CrbProfile

    @property
    def K(self) -> int:
        return len(self.slopes)

    def quantizer(self) -> PiecewiseLinearQuantizer:
        return piecewise_linear(self.slopes)

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "L": self.profile.L,
            "slopes": list(self.slopes),
            "phi": self.phi,
            "start_label": self.start_label,
            "converged": self.converged,
        }


def design_grid_size(d: NoiseDensity) -> int:
    """Default K = L = ceil(10/sigma), clamped to [50, 400]."""
    d._require_density()
    return int(min(max(math.ceil(10.0 / d.sigma), 50), 400))


def _random_feasible_slopes(K: int, rng: np.random.Generator) -> np.ndarray:
    # random node values in [0, 1] pinned to 0 at -1 and 1/2 at 0
    y = np.concatenate([[0.0], rng.random(K - 1), [0.5]])
    m = K * np.diff(y)
    m *= (K / 2.0) / m.sum()
    return m


def _solve_from(coeffs: AuplCoefficients, m0: np.ndarray, opts: DesignOptions):
    """One SLSQP run on the epigraph form; returns (m, phi, nit, converged)."""
    K, L = coeffs.K, coeffs.L
    a, c, F, f = coeffs.a, coeffs.c, coeffs.F, coeffs.f
    P = np.tril(np.ones((K, K)))

    def epi(z):
        _, _, T = _terms(coeffs, z[:K])
        return z[K] - T

    def epi_jac(z):
        m = z[:K]
        g = a @ m + F
        h = np.maximum(c @ m + f, 1e-100)
        with np.errstate(over="ignore"):
            dT = ((1.0 - 2.0 * g) / h**2)[:, None] * a - (2.0 * g * (1.0 - g) / h**3)[:, None] * c
        # keep the QP subproblem finite even from hopeless starting regions
        dT = np.clip(dT, -1e120, 1e120)
        return np.hstack([-dT, np.ones((L + 1, 1))])

    constraints = [
        {
            "type": "eq",
            "fun": lambda z: np.array([z[:K].sum() - K / 2.0]),
            "jac": lambda z: np.concatenate([np.ones(K), [0.0]])[None, :],
        },
        {
            "type": "ineq",
            "fun": lambda z: P @ z[:K],
            "jac": lambda z: np.hstack([P, np.zeros((K, 1))]),
        },
        {
            "type": "ineq",
            "fun": lambda z: K - P @ z[:K],
            "jac": lambda z: np.hstack([-P, np.zeros((K, 1))]),
        },
        {
            "type": "ineq",
            "fun": lambda z: c @ z[:K] + f - _H_FLOOR,
            "jac": lambda z: np.hstack([c, np.zeros((L + 1, 1))]),
        },
        {"type": "ineq", "fun": epi, "jac": epi_jac},
    ]

    _, _, T0 = _terms(coeffs, m0)
    z0 = np.concatenate([m0, [float(np.max(T0))]])
    res = minimize(
        lambda z: z[K],
        z0,
        jac=lambda z: np.concatenate([np.zeros(K), [1.0]]),
        method="SLSQP",
        constraints=constraints,
        options={"maxiter": opts.maxiter, "ftol": opts.ftol},
    )
    return res.x[:K], int(res.nit), res.status == 0


def _feasible(m: np.ndarray, K: int) -> bool:
    prefix = np.cumsum(m)
    return (
        abs(prefix[-1] - K / 2.0) <= 1e-8
        and prefix.min() >= -1e-8
        and prefix.max() <= K + 1e-8
    )


def design(
    d: NoiseDensity,
    K: int | None = None,
    L: int | None = None,
    options: DesignOptions | None = None,
) -> DesignResult:
    """Solve the minimax slope problem and validate the winner.

    Runs the constrained solver from every starting point; a run whose final
    iterate is infeasible or worse than where it started falls back to its
    start. The best bound wins, ties going to the earlier start. The
    returned profile is recomputed through the quadrature path, independent
    of the coefficient assembly.
    """
    opts = options or DesignOptions()
    if K is None:
        K = design_grid_size(d)
    if L is None:
        L = K
    if K < 10 or L < 10:
        raise ValueError("design grids need K, L >= 10")
    coeffs = precompute_coefficients(d, K, L)

    starts = starting_points(coeffs)
    for i, (label, m) in enumerate(opts.extra_starts):
        starts.append((str(label), np.asarray(m, dtype=float)))
    if opts.random_starts:
        rng = np.random.default_rng(opts.seed)
        for i in range(opts.random_starts):
            starts.append((f"random-{i}", _random_feasible_slopes(K, rng)))

    candidates = []
    diagnostics = []
    any_converged = False
    for label, m0 in starts:
        phi0, _ = objective(coeffs, m0)
        m1, nit, ok = _solve_from(coeffs, np.asarray(m0, dtype=float), opts)
        phi1 = math.inf
        if _feasible(m1, K):
            try:
                phi1, _ = objective(coeffs, m1)
            except InadmissibleIterate:
                phi1 = math.inf
        if phi1 <= phi0:
            candidates.append((phi1, label, m1, nit, ok))
        else:  # solver went nowhere useful; keep the feasible start
            candidates.append((phi0, label, np.asarray(m0, dtype=float), nit, False))
        any_converged = any_converged or ok
        diagnostics.append(f"{label}: start phi={phi0:.6g}, final phi={min(phi1, phi0):.6g}, "
                           f"nit={nit}, converged={ok}")
    if not any_converged:
        raise OptimizationFailure(
            "no starting point produced a feasible convergent run:\n  " + "\n  ".join(diagnostics)
        )

    best = min(candidates, key=lambda cand: cand[0])
    phi, label, m, nit, ok = best
    quantizer = piecewise_linear(m)
    profile = max_crb(quantizer, d, L)
    return DesignResult(
        slopes=tuple(float(v) for v in m),
        phi=float(phi),
        start_label=label,
        iterations=nit,
        converged=ok,
        profile=profile,
    )


# -- delimited exports ---------------------------------------------------------

def shape_csv(q, n: int = 1000, lo: float = -1.5, hi: float = 1.5) -> str:
    """Sample gamma(x) on [lo, hi] as 'x,gamma' rows."""
    xs = np.linspace(lo, hi, n)
    gs = np.asarray(q.evaluate(xs))
    lines = ["x,gamma"]
    lines += [f"{float(x)!r},{float(g)!r}" for x, g in zip(xs, gs)]
    return "\n".join(lines) + "\n"


def g_curve_csv(profile: CrbProfile) -> str:
    """The induced g(theta) over the full range [-1, 1] as 'theta,g' rows.

    The positive half is filled in by antisymmetry, g(-theta) = 1 - g(theta).
    """
    th = profile.thetas
    g = profile.g_values
    full_t = np.concatenate([th, -th[:-1][::-1]])
    full_g = np.concatenate([g, 1.0 - g[:-1][::-1]])
    lines = ["theta,g"]
    lines += [f"{float(t)!r},{float(v)!r}" for t, v in zip(full_t, full_g)]
    return "\n".join(lines) + "\n"
