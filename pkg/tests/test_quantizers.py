import json
import math

import numpy as np
import pytest

from qdesign import (
    InvalidParameter,
    InvalidSlopes,
    TabulatedQuantizer,
    dithered,
    gaussian,
    laplacian,
    parse_quantizer_spec,
    piecewise_linear,
    point_mass,
    sine,
    threshold,
    truncate_to_unit_support,
)
from qdesign.quantizers import aupl_from_json

ALL_VARIANTS = [
    threshold(),
    sine(),
    dithered(gaussian(1.0)),
    dithered(laplacian(0.25)),
    piecewise_linear([0.1, 0.7, 0.2, 1.0]),
    truncate_to_unit_support(dithered(gaussian(1.0))),
    TabulatedQuantizer((-1.5, -0.8, 0.0), (0.1, 0.2, 0.5)),
]


def test_threshold_values():
    q = threshold()
    assert q.evaluate(0.5) == 1.0
    assert q.evaluate(0.0) == 1.0  # boundary maps up
    assert q.evaluate(-0.5) == 0.0
    assert q.evaluate(-3.0) == 0.0


def test_sine_values():
    q = sine()
    assert q.evaluate(0.0) == 0.5
    assert q.evaluate(1.0) == 1.0
    assert q.evaluate(2.0) == 1.0
    assert q.evaluate(-1.0) == pytest.approx(0.0, abs=1e-16)
    # half-sine at -1/2: (1 - sin(pi/4)) / 2
    assert q.evaluate(-0.5) == pytest.approx(0.5 * (1 - math.sqrt(0.5)), abs=1e-15)


def test_dithered_values():
    q = dithered(gaussian(1.0))
    assert q.evaluate(0.0) == 0.5
    assert q.evaluate(1.0) == pytest.approx(0.8413447460685429, abs=1e-12)
    assert q.evaluate(40.0) == 1.0
    with pytest.raises(InvalidParameter):
        dithered(point_mass())


def test_piecewise_linear_values():
    q1 = piecewise_linear([0.5], K=1)
    assert [q1.evaluate(x) for x in (-1.0, -0.5, 0.0)] == [0.0, 0.25, 0.5]
    q2 = piecewise_linear([0.0, 1.0])
    assert q2.evaluate(-0.25) == pytest.approx(0.25)
    assert q2.evaluate(-0.75) == 0.0
    # antisymmetric extension and saturation
    assert q2.evaluate(0.25) == pytest.approx(0.75)
    assert q2.evaluate(-1.2) == 0.0
    assert q2.evaluate(1.2) == 1.0


def test_piecewise_linear_validation():
    with pytest.raises(InvalidSlopes) as err:
        piecewise_linear([-0.5, 1.5])  # first prefix sum dips below 0
    assert err.value.prefix_index == 0
    with pytest.raises(InvalidSlopes):
        piecewise_linear([0.3, 0.3])  # sum != K/2
    with pytest.raises(InvalidParameter):
        piecewise_linear([0.5, 0.5], K=3)


@pytest.mark.parametrize("q", ALL_VARIANTS, ids=lambda q: type(q).__name__)
def test_antisymmetry(q):
    rng = np.random.default_rng(3)
    x = rng.uniform(-4.0, 4.0, 1000)
    total = np.asarray(q.evaluate(x)) + np.asarray(q.evaluate(-x))
    assert np.max(np.abs(total - 1.0)) < 1e-14


@pytest.mark.parametrize("q", ALL_VARIANTS, ids=lambda q: type(q).__name__)
def test_range_and_saturation(q):
    x = np.linspace(-5, 5, 801)
    vals = np.asarray(q.evaluate(x))
    assert vals.min() >= 0.0 and vals.max() <= 1.0
    lo, hi = q.support()
    # saturation beyond the support bounds; effective (tail below the
    # integration tolerance) for smooth sigmoids, exact for the rest
    assert np.all(np.asarray(q.evaluate(np.array([lo - 1.0, lo - 0.1]))) <= 1e-12)
    assert np.all(np.asarray(q.evaluate(np.array([hi + 0.1, hi + 1.0]))) >= 1.0 - 1e-12)


def test_pw_endpoint_range_check_suffices():
    # linearity: extremes over each cell sit at its endpoints
    rng = np.random.default_rng(4)
    for _ in range(20):
        K = 8
        y = np.concatenate([[0.0], rng.random(K - 1), [0.5]])
        m = K * np.diff(y)
        m *= (K / 2.0) / m.sum()
        q = piecewise_linear(m)
        nodes = -(K - np.arange(K + 1)) / K
        vals = np.asarray(q.evaluate(nodes))
        assert vals.min() >= 0.0 and vals.max() <= 1.0


def test_truncation():
    dq = dithered(gaussian(1.0))
    tq = truncate_to_unit_support(dq)
    assert dq.evaluate(-2.0) == pytest.approx(0.022750131948179195, abs=1e-12)
    assert tq.evaluate(-2.0) == 0.0
    assert tq.evaluate(1.5) == 1.0
    x = np.linspace(-1.0, 1.0, 101)
    assert np.allclose(np.asarray(tq.evaluate(x)), np.asarray(dq.evaluate(x)), atol=0)
    # unit-support quantizers pass through untouched
    s = sine()
    assert truncate_to_unit_support(s) is s
    assert truncate_to_unit_support(tq) is tq


def test_truncation_of_tabulated_is_tabulated():
    wide = TabulatedQuantizer((-2.0, -1.5, -0.4, 0.0), (0.05, 0.15, 0.3, 0.5))
    cut = truncate_to_unit_support(wide)
    assert isinstance(cut, TabulatedQuantizer)
    assert cut.support() == (-1.0, 1.0)
    assert cut.evaluate(-1.0) == pytest.approx(wide.evaluate(-1.0))
    assert cut.evaluate(-1.0001) == 0.0
    x = np.linspace(-0.99, 0.99, 101)
    assert np.allclose(np.asarray(cut.evaluate(x)), np.asarray(wide.evaluate(x)), atol=1e-15)
    again = truncate_to_unit_support(cut)
    assert again is cut


def test_sample_output():
    assert threshold().sample_output(0.5, 0.999) == 1
    assert threshold().sample_output(0.0, 0.999) == 1  # deterministic at the boundary
    assert sine().sample_output(0.0, 0.3) == 1
    assert sine().sample_output(0.0, 0.7) == 0


def test_sample_output_empirical_mean():
    rng = np.random.default_rng(5)
    u = rng.random(1_000_000)
    mean = np.mean(u < sine().evaluate(-0.5))
    assert mean == pytest.approx(0.5 * (1 - math.sqrt(0.5)), abs=1e-3)


def test_slopes_of_variants():
    assert sine().slope(0.0) == pytest.approx(math.pi / 4)
    assert sine().slope(2.0) == 0.0
    q = piecewise_linear([0.0, 1.0])
    assert q.slope(-0.25) == 1.0
    assert q.slope(0.25) == 1.0  # even by antisymmetry
    assert q.slope(-0.75) == 0.0
    assert dithered(gaussian(1.0)).slope(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))


def test_json_round_trip():
    q = piecewise_linear([0.1, 0.7, 0.2, 1.0])
    data = json.loads(q.to_json())
    assert data["K"] == 4
    back = aupl_from_json(q.to_json())
    assert back == q


def test_parse_quantizer_spec(tmp_path):
    assert parse_quantizer_spec("threshold") == threshold()
    assert parse_quantizer_spec("sine") == sine()
    dq = parse_quantizer_spec("dither:family=gg:beta=1,sigma=0.5")
    assert dq.dither.beta == 1.0 and dq.dither_sigma2 == pytest.approx(0.25)
    # family defaults to the ambient noise family
    dq2 = parse_quantizer_spec("dither:sigma=0.4", ambient=laplacian(1.0))
    assert dq2.dither.beta == 1.0
    path = tmp_path / "q.json"
    path.write_text(piecewise_linear([0.2, 0.8]).to_json())
    q = parse_quantizer_spec(f"aupl:file={path}")
    assert q.slopes == (0.2, 0.8)
    with pytest.raises(ValueError):
        parse_quantizer_spec("fancy")
