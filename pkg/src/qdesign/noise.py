"""Symmetric zero-mean noise densities used throughout the toolkit.

Two families are supported:

- ``gg``: the generalized Gaussian family, parameterized by a shape
  ``beta`` (1 = Laplacian, 2 = Gaussian) and a variance ``sigma2``.
  The density is ``f(w) = beta/(2*alpha*Gamma(1/beta)) * exp(-(|w|/alpha)**beta)``
  with the scale tied to the variance by ``alpha**2 = sigma2*Gamma(1/beta)/Gamma(3/beta)``.
- ``pointmass``: a unit mass at zero (the zero-noise limit). It has a step
  distribution function but no density, so density-only operations raise
  :class:`NoDensity`.

Shapes with ``beta < 1`` have a cusp at the mode and are rejected; the
unimodality assumptions used elsewhere require ``beta >= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaincc, gammainccinv


class NoDensity(Exception):
    """Raised when a density-only operation is applied to a point mass."""


class NotDifferentiable(Exception):
    """Raised where the density has no derivative (Laplacian at the origin)."""


@dataclass(frozen=True)
class NoiseDensity:
    """Symmetric zero-mean noise model.

    Build instances through :func:`generalized_gaussian`, :func:`gaussian`,
    :func:`laplacian` or :func:`point_mass` rather than directly; the
    factories validate parameters and derive the scale ``alpha``.

    Attributes
    ----------
    family : str
        ``"gg"`` or ``"pointmass"``.
    beta : float
        Shape parameter (``gg`` only; 0 for a point mass).
    sigma2 : float
        Variance. A point mass has ``sigma2 == 0``.
    alpha : float
        Scale, ``alpha**2 = sigma2*Gamma(1/beta)/Gamma(3/beta)``.
    """

    family: str
    beta: float
    sigma2: float
    alpha: float

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def has_density(self) -> bool:
        return self.family == "gg"

    def _require_density(self):
        if not self.has_density:
            raise NoDensity("point-mass noise has no density")

    # -- density, distribution, derivative ---------------------------------

    def pdf(self, w):
        """Density f(w). Symmetric, unimodal with mode at 0."""
        self._require_density()
        w = np.asarray(w, dtype=float)
        norm = self.beta / (2.0 * self.alpha * math.gamma(1.0 / self.beta))
        out = norm * np.exp(-((np.abs(w) / self.alpha) ** self.beta))
        return out if out.ndim else float(out)

    def cdf(self, w):
        """Distribution function F(w).

        For the point mass this is the unit step with F(w) = 1 at w >= 0.
        The symmetric families satisfy cdf(w) + cdf(-w) == 1 exactly as
        computed, and cdf(0) == 1/2.
        """
        w = np.asarray(w, dtype=float)
        if self.family == "pointmass":
            out = np.where(w >= 0.0, 1.0, 0.0)
        else:
            tail = gammainc(1.0 / self.beta, (np.abs(w) / self.alpha) ** self.beta)
            out = 0.5 + 0.5 * np.sign(w) * tail
        return out if out.ndim else float(out)

    def pdf_derivative(self, w):
        """Derivative f'(w).

        Defined everywhere for beta > 1. For beta == 1 the density has a
        kink at the origin and w == 0 raises :class:`NotDifferentiable`.
        """
        self._require_density()
        w = np.asarray(w, dtype=float)
        if self.beta <= 1.0 and np.any(w == 0.0):
            raise NotDifferentiable("Laplacian density is not differentiable at 0")
        aw = np.abs(w) / self.alpha
        # d/dw of -(|w|/alpha)**beta; the |w|**(beta-1) factor vanishes at 0
        # for beta > 1, so the limit there is 0.
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = -np.sign(w) * (self.beta / self.alpha) * aw ** (self.beta - 1.0)
        slope = np.where(w == 0.0, 0.0, slope)
        out = slope * self.pdf(w)
        return out if out.ndim else float(out)

    # -- normalized moments -------------------------------------------------

    def normalized_one_sided_mean(self) -> float:
        """One-sided first moment over sigma: sigma**-1 * int_0^inf w f(w) dw.

        Scale-invariant; strictly below 1/2 for every symmetric density.
        """
        self._require_density()
        b = self.beta
        return math.gamma(2.0 / b) / (2.0 * math.sqrt(math.gamma(1.0 / b) * math.gamma(3.0 / b)))

    def normalized_fourth_moment(self) -> float:
        """Fourth moment over sigma**4 (the kurtosis of the family).

        Equals Gamma(5/b)*Gamma(1/b)/Gamma(3/b)**2: 3 for Gaussian, 6 for
        Laplacian. Scale-invariant.
        """
        self._require_density()
        b = self.beta
        return math.gamma(5.0 / b) * math.gamma(1.0 / b) / math.gamma(3.0 / b) ** 2

    # -- helpers used by the integration and design layers ------------------

    def tail_radius(self, eps: float = 2e-13) -> float:
        """Radius T with at most eps probability mass beyond each of +-T."""
        if self.family == "pointmass":
            return 0.0
        t = gammainccinv(1.0 / self.beta, min(2.0 * eps, 1.0))
        return float(self.alpha * t ** (1.0 / self.beta))

    def partial_first_moment(self, t):
        """int_{-inf}^{t} w f(w) dw, in closed form.

        By symmetry this equals -int_{|t|}^{inf} w f(w) dw for every t.
        """
        self._require_density()
        t = np.asarray(t, dtype=float)
        b = self.beta
        coef = self.alpha * math.gamma(2.0 / b) / (2.0 * math.gamma(1.0 / b))
        out = -coef * gammaincc(2.0 / b, (np.abs(t) / self.alpha) ** b)
        return out if out.ndim else float(out)

    def sample(self, rng: np.random.Generator, size: int):
        """Draw noise samples. Point mass returns zeros."""
        if self.family == "pointmass":
            return np.zeros(size)
        g = rng.standard_gamma(1.0 / self.beta, size=size)
        sign = rng.integers(0, 2, size=size) * 2 - 1
        return sign * self.alpha * g ** (1.0 / self.beta)


def generalized_gaussian(beta: float, sigma2: float) -> NoiseDensity:
    """Generalized Gaussian noise with shape beta >= 1 and variance sigma2 > 0."""
    if beta < 1.0:
        raise ValueError(f"shape beta must be >= 1 (mode is a cusp below 1), got {beta}")
    if sigma2 <= 0.0:
        raise ValueError(f"variance must be positive, got {sigma2}")
    alpha = math.sqrt(sigma2 * math.gamma(1.0 / beta) / math.gamma(3.0 / beta))
    return NoiseDensity("gg", float(beta), float(sigma2), alpha)


def gaussian(sigma2: float) -> NoiseDensity:
    return generalized_gaussian(2.0, sigma2)


def laplacian(sigma2: float) -> NoiseDensity:
    return generalized_gaussian(1.0, sigma2)


def point_mass() -> NoiseDensity:
    return NoiseDensity("pointmass", 0.0, 0.0, 0.0)


# -- optimality condition for the hard threshold ----------------------------

def threshold_condition_witness(d: NoiseDensity, grid_step: float = 1e-3):
    """Search for a violation of f'(w-z) + f'(w+z) <= 0 on [0,1]^2.

    Returns (w, z, value) at the largest value of the left-hand side if it
    exceeds the 1e-12 roundoff slack, else None. The continuous condition is
    replaced by a dense uniform grid with the given spacing; the integrand is
    smooth in (w, z) for beta > 1, so refining the grid converges.
    """
    d._require_density()
    if d.beta <= 1.0:
        raise NotDifferentiable("condition requires a differentiable density (beta > 1)")
    n = int(round(1.0 / grid_step))
    pts = np.linspace(0.0, 1.0, n + 1)
    w = pts[:, None]
    z = pts[None, :]
    lhs = d.pdf_derivative(w - z) + d.pdf_derivative(w + z)
    i, j = np.unravel_index(int(np.argmax(lhs)), lhs.shape)
    worst = float(lhs[i, j])
    if worst <= 1e-12:
        return None
    return float(pts[i]), float(pts[j]), worst


def check_threshold_optimality_condition(d: NoiseDensity, grid_step: float = 1e-3) -> bool:
    """True when f'(w-z) + f'(w+z) <= 0 holds on the whole [0,1]^2 grid."""
    return threshold_condition_witness(d, grid_step) is None


# -- CLI-facing density specification ----------------------------------------

def parse_noise_spec(spec: str, require_sigma: bool = True) -> NoiseDensity:
    """Parse a density spec string.

    Accepted forms: ``pointmass`` and ``gg:beta=<f>,sigma=<f>`` with sigma
    given as a standard deviation. With ``require_sigma=False`` the sigma
    field may be omitted (family descriptors for sweeps); a placeholder
    sigma of 1 is used.
    """
    spec = spec.strip()
    if spec == "pointmass":
        return point_mass()
    if not spec.startswith("gg:"):
        raise ValueError(f"unknown noise family in {spec!r}; expected 'pointmass' or 'gg:...'")
    fields = {}
    for item in spec[3:].split(","):
        if "=" not in item:
            raise ValueError(f"malformed field {item!r} in noise spec {spec!r}")
        key, val = item.split("=", 1)
        fields[key.strip()] = val.strip()
    try:
        beta = float(fields["beta"])
    except KeyError:
        raise ValueError(f"noise spec {spec!r} is missing beta") from None
    if "sigma" in fields:
        sigma = float(fields["sigma"])
    elif require_sigma:
        raise ValueError(f"noise spec {spec!r} is missing sigma")
    else:
        sigma = 1.0
    return generalized_gaussian(beta, sigma * sigma)
