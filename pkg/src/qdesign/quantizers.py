"""One-bit probabilistic quantizers in probability form.

A quantizer is the map ``gamma(x) = P(output symbol = S1 | input x)`` taking
values in [0, 1]. Every variant here is antisymmetric,
``gamma(x) + gamma(-x) == 1``, which is what makes the estimation problem
symmetric in the parameter. Variants:

- ``ThresholdQuantizer``: hard sign rule, 1 for x >= 0.
- ``SineQuantizer``: half-sine ramp on [-1, 1], the zero-noise optimum.
- ``DitheredQuantizer``: threshold applied after adding independent dither
  noise, i.e. gamma(x) = cdf of the dither at x.
- ``PiecewiseLinearQuantizer``: continuous piecewise-linear gamma specified
  by per-cell slopes on a uniform grid of [-1, 0], extended by antisymmetry.
  This is the representation the minimax designer optimizes over.
- ``TabulatedQuantizer``: linear interpolation of sampled values, used for
  randomized property checks.
- ``TruncatedQuantizer``: any quantizer clamped to unit support (0 below -1,
  1 above +1).

Evaluation is exact closed form for every variant; nothing is interpolated
except the explicitly tabulated quantizer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .noise import NoiseDensity, NotDifferentiable, parse_noise_spec


class InvalidParameter(Exception):
    """Bad constructor argument for a quantizer."""


class InvalidSlopes(Exception):
    """Slope vector violates the probability or continuity constraints."""

    def __init__(self, message: str, prefix_index: int | None = None):
        super().__init__(message)
        self.prefix_index = prefix_index


class Quantizer:
    """Common behavior for probability-form quantizers."""

    def evaluate(self, x):
        raise NotImplementedError

    def support(self) -> tuple[float, float]:
        """(lo, hi) with gamma == 0 below lo and gamma == 1 above hi.

        For smooth sigmoids the bounds are effective: the tails beyond them
        carry probability below the integration tolerance.
        """
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        """Kink locations of gamma inside the support, for the integrator."""
        return ()

    def slope(self, x):
        """Derivative of gamma where it exists (zero-noise Fisher path)."""
        raise NotImplementedError

    def sample_output(self, x, u) -> int:
        """Draw the output bit given input x and a uniform u in [0, 1)."""
        return int(u < self.evaluate(x))


def _scalar_or_array(out, x):
    return out if np.ndim(x) else float(out)


@dataclass(frozen=True)
class ThresholdQuantizer(Quantizer):
    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(np.where(x >= 0.0, 1.0, 0.0), x)

    def support(self):
        return (0.0, 0.0)

    def slope(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x == 0.0):
            raise NotDifferentiable("threshold quantizer has a jump at 0")
        return _scalar_or_array(np.zeros_like(x), x)


@dataclass(frozen=True)
class SineQuantizer(Quantizer):
    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        inside = 0.5 * (1.0 + np.sin(0.5 * np.pi * np.clip(x, -1.0, 1.0)))
        return _scalar_or_array(inside, x)

    def support(self):
        return (-1.0, 1.0)

    def slope(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(np.abs(x) < 1.0, 0.25 * np.pi * np.cos(0.5 * np.pi * x), 0.0)
        return _scalar_or_array(out, x)


@dataclass(frozen=True)
class DitheredQuantizer(Quantizer):
    """Threshold rule after adding independent zero-mean dither noise.

    gamma(x) = P(x + D >= 0) = F_D(x), the dither's distribution function.
    """

    dither: NoiseDensity

    @property
    def dither_sigma2(self) -> float:
        return self.dither.sigma2

    @property
    def dither_family(self) -> str:
        return self.dither.family

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(self.dither.cdf(x), x)

    def support(self):
        r = self.dither.tail_radius()
        return (-r, r)

    def breakpoints(self):
        # Laplacian dither has a derivative kink at 0.
        return (0.0,) if self.dither.beta == 1.0 else ()

    def slope(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(self.dither.pdf(x), x)


# Constructor slack for slope vectors produced by the numerical designer.
_PREFIX_TOL = 1e-7


@dataclass(frozen=True)
class PiecewiseLinearQuantizer(Quantizer):
    """Continuous piecewise-linear gamma on [-1, 0], antisymmetric beyond.

    The K slopes live on the uniform cells [x_{k-1}, x_k] with
    x_i = -(K-i)/K. Feasibility requires the node values
    (1/K) * sum_{j<=k} m_j to stay in [0, 1] and the total to equal K/2,
    which pins gamma(0) = 1/2.
    """

    slopes: tuple[float, ...]
    _nodes: np.ndarray = field(init=False, repr=False, compare=False)
    _values: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.slopes, dtype=float)
        K = m.size
        if K == 0:
            raise InvalidSlopes("slope vector is empty")
        prefix = np.cumsum(m)
        bad = np.nonzero((prefix < -_PREFIX_TOL * K) | (prefix > K + _PREFIX_TOL * K))[0]
        if bad.size:
            k = int(bad[0])
            raise InvalidSlopes(
                f"prefix sum {prefix[k]:.6g} at index {k} falls outside [0, {K}]",
                prefix_index=k,
            )
        if abs(prefix[-1] - K / 2.0) > 1e-8 * max(1.0, K):
            raise InvalidSlopes(
                f"slopes sum to {prefix[-1]:.12g}, need K/2 = {K / 2.0} for continuity at 0"
            )
        nodes = -(K - np.arange(K + 1)) / K
        values = np.clip(np.concatenate([[0.0], prefix / K]), 0.0, 1.0)
        object.__setattr__(self, "_nodes", nodes)
        object.__setattr__(self, "_values", values)

    @property
    def K(self) -> int:
        return len(self.slopes)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        neg = np.interp(np.minimum(x, 0.0), self._nodes, self._values, left=0.0)
        pos = 1.0 - np.interp(np.minimum(-x, 0.0), self._nodes, self._values, left=0.0)
        return _scalar_or_array(np.where(x <= 0.0, neg, pos), x)

    def support(self):
        return (-1.0, 1.0)

    def breakpoints(self):
        inner = self._nodes[1:-1]
        return tuple(inner) + tuple(-inner[::-1])

    def slope(self, x):
        x = np.asarray(x, dtype=float)
        ax = -np.abs(x)  # slope is even by antisymmetry
        k = np.clip(np.searchsorted(self._nodes, ax, side="right") - 1, 0, self.K - 1)
        m = np.asarray(self.slopes, dtype=float)[k]
        out = np.where(np.abs(x) > 1.0, 0.0, m)
        return _scalar_or_array(out, x)

    def to_json(self) -> str:
        return json.dumps({"K": self.K, "slopes": list(self.slopes)})


@dataclass(frozen=True)
class TabulatedQuantizer(Quantizer):
    """Antisymmetric gamma given by linear interpolation of sampled values.

    Nodes cover [-X, 0] for some X > 0 with gamma == 0 below the first node;
    x > 0 is filled in by antisymmetry. The left-edge value may be positive,
    in which case gamma steps down to 0 just below the first node (this is
    how truncation of a wider table is represented).
    """

    nodes: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        nd = np.asarray(self.nodes, dtype=float)
        vl = np.asarray(self.values, dtype=float)
        if nd.size != vl.size or nd.size < 2:
            raise InvalidParameter("need matching nodes/values with at least 2 points")
        if np.any(np.diff(nd) <= 0) or nd[-1] != 0.0 or nd[0] >= 0.0:
            raise InvalidParameter("nodes must increase and span [-X, 0]")
        if np.any(vl < 0.0) or np.any(vl > 1.0) or vl[-1] != 0.5:
            raise InvalidParameter("values must lie in [0, 1] with gamma(0) = 1/2")

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        nd = np.asarray(self.nodes)
        vl = np.asarray(self.values)
        ax = np.minimum(x, 0.0)
        neg = np.where(ax < nd[0], 0.0, np.interp(ax, nd, vl))
        axp = np.minimum(-x, 0.0)
        pos = 1.0 - np.where(axp < nd[0], 0.0, np.interp(axp, nd, vl))
        return _scalar_or_array(np.where(x <= 0.0, neg, pos), x)

    def support(self):
        return (float(self.nodes[0]), -float(self.nodes[0]))

    def breakpoints(self):
        inner = np.asarray(self.nodes[:-1], dtype=float)
        return tuple(inner) + tuple(-inner[::-1])


@dataclass(frozen=True)
class TruncatedQuantizer(Quantizer):
    """gamma clamped to unit support: 0 below -1, unchanged on [-1, 1], 1 above."""

    inner: Quantizer

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < -1.0, 0.0, np.where(x > 1.0, 1.0, self.inner.evaluate(x)))
        return _scalar_or_array(out, x)

    def support(self):
        return (-1.0, 1.0)

    def breakpoints(self):
        return tuple(p for p in self.inner.breakpoints() if -1.0 < p < 1.0)

    def slope(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(np.abs(x) < 1.0, self.inner.slope(x), 0.0)
        return _scalar_or_array(out, x)


# -- factories ----------------------------------------------------------------

def threshold() -> ThresholdQuantizer:
    return ThresholdQuantizer()


def sine() -> SineQuantizer:
    return SineQuantizer()


def dithered(dither: NoiseDensity) -> DitheredQuantizer:
    if not dither.has_density or dither.sigma2 <= 0.0:
        raise InvalidParameter("dither noise needs a density with positive variance")
    return DitheredQuantizer(dither)


def piecewise_linear(slopes, K: int | None = None) -> PiecewiseLinearQuantizer:
    slopes = tuple(float(m) for m in slopes)
    if K is not None and K != len(slopes):
        raise InvalidParameter(f"K = {K} does not match {len(slopes)} slopes")
    return PiecewiseLinearQuantizer(slopes)


def truncate_to_unit_support(q: Quantizer) -> Quantizer:
    """Clamp a quantizer to [-1, 1]; already unit-support inputs pass through.

    For a wide tabulated quantizer the table is re-cut at -1 (keeping the
    interpolated value there), so the result is tabulated again. Truncation
    is idempotent.
    """
    lo, hi = q.support()
    if lo >= -1.0 and hi <= 1.0:
        return q
    if isinstance(q, TabulatedQuantizer):
        nd = np.asarray(q.nodes)
        vl = np.asarray(q.values)
        keep = nd > -1.0
        new_nodes = np.concatenate([[-1.0], nd[keep]])
        new_vals = np.concatenate([[float(q.evaluate(-1.0))], vl[keep]])
        return TabulatedQuantizer(tuple(new_nodes), tuple(new_vals))
    return TruncatedQuantizer(q)


# -- serialization and CLI specs ----------------------------------------------

def aupl_from_json(text: str) -> PiecewiseLinearQuantizer:
    data = json.loads(text)
    return piecewise_linear(data["slopes"], K=int(data["K"]))


def parse_quantizer_spec(spec: str, ambient: NoiseDensity | None = None) -> Quantizer:
    """Parse a quantizer spec string.

    Forms: ``threshold``, ``sine``, ``dither:family=<noise>,sigma=<f>`` and
    ``aupl:file=<path>``. A dither spec may omit the family, in which case
    the ambient noise family is used (its sigma is replaced by the dither's).
    """
    spec = spec.strip()
    if spec == "threshold":
        return threshold()
    if spec == "sine":
        return sine()
    if spec.startswith("dither:"):
        family = None
        sigma = None
        for item in spec[len("dither:"):].split(","):
            if "=" not in item:
                raise ValueError(f"malformed field {item!r} in {spec!r}")
            key, val = item.split("=", 1)
            if key.strip() == "family":
                family = val.strip()
            elif key.strip() == "sigma":
                sigma = float(val)
            elif key.strip() == "beta":
                family = f"gg:beta={val.strip()}"
            else:
                raise ValueError(f"unknown dither field {key!r}")
        if sigma is None:
            raise ValueError(f"dither spec {spec!r} is missing sigma")
        if family is None:
            if ambient is None or not ambient.has_density:
                raise ValueError("dither spec needs family=... when no ambient density is set")
            base = ambient
        else:
            base = parse_noise_spec(family, require_sigma=False)
        from .noise import generalized_gaussian

        return dithered(generalized_gaussian(base.beta, sigma * sigma))
    if spec.startswith("aupl:"):
        fields = dict(item.split("=", 1) for item in spec[len("aupl:"):].split(","))
        if "file" not in fields:
            raise ValueError(f"aupl spec {spec!r} needs file=<path>")
        with open(fields["file"], "r", encoding="utf-8") as fh:
            return aupl_from_json(fh.read())
    raise ValueError(f"unknown quantizer spec {spec!r}")
