import json

import numpy as np
import pytest

from radonweights import systems
from radonweights.arclength import ExponentVector
from radonweights.estimator import (ProbeRefused, SetFamily, Tolerances, WeightSpec,
                                    form_quadrature, measure_image, monte_carlo_form,
                                    optimality_probe, ratio_sweep, _domain_from_cloud)
from radonweights.flows import cc_ball
from radonweights.grids import OccupancyGrid

I_PAR = ((1,), (2,), (1, 2))


def full_set(lo=-5.0, hi=5.0, cells=4):
    return OccupancyGrid(np.array([lo, lo]), np.array([(hi - lo) / cells] * 2),
                         np.ones((cells, cells), dtype=bool))


def test_quadrature_box_volume():
    par = systems.parabola()
    q = form_quadrature(par, WeightSpec("unweighted"), [full_set(), full_set()], cells=24)
    assert q.value == pytest.approx(8.0, rel=1e-9)
    assert q.converged


def test_quadrature_disjoint_set():
    par = systems.parabola()
    far = OccupancyGrid(np.array([10.0, 10.0]), np.array([1.0, 1.0]), np.ones((2, 2), dtype=bool))
    q = form_quadrature(par, WeightSpec("unweighted"), [far, full_set()], cells=16)
    assert q.value == 0


def test_quadrature_vs_monte_carlo():
    par = systems.parabola()
    cloud = cc_ball(par, (0, 0, 0), I_PAR, (1, 1), 0.25, 100_000, 5)
    sets = [measure_image(par, j, cloud).grid for j in (1, 2)]
    w = WeightSpec("rho", I0=I_PAR)
    dom = _domain_from_cloud(cloud.points)
    q = form_quadrature(par, w, sets, cells=48, domain=dom)
    mc = monte_carlo_form(par, w, sets, (q.grid.lo, q.grid.hi), 1_000_000, 11)
    assert q.value == pytest.approx(mc, rel=0.10)


def test_image_of_axis_box():
    lw = systems.loomis_whitney(3)
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 1, size=(200_000, 3)) * [1.0, 2.0, 0.5]
    m = measure_image(lw, 1, pts, cells=64)
    assert m.value == pytest.approx(1.0, rel=0.02)
    assert m.stable and not m.degenerate


def test_translation_invariant_marginal():
    par = systems.parabola()
    rng = np.random.default_rng(2)
    pts = np.column_stack([rng.uniform(-1, 1, 100_000), rng.uniform(0, 0.5, 100_000),
                           rng.uniform(0, 0.25, 100_000)])
    assert measure_image(par, 1, pts, cells=64).value == pytest.approx(0.125, rel=0.02)


def test_degenerate_image_flagged():
    par = systems.parabola()
    pts = np.zeros((100, 3))
    pts[:, 0] = np.linspace(-1, 1, 100)
    m = measure_image(par, 1, pts)
    assert m.degenerate and not m.stable


def test_weight_spec_errors():
    par = systems.parabola()
    with pytest.raises(ValueError):
        WeightSpec("rho").build(par)
    with pytest.raises(ValueError):
        WeightSpec("nonsense").build(par)


def test_short_sweep_parabola():
    par = systems.parabola()
    fam = SetFamily("cc-ball", (0, 0, 0), [2.0 ** -3, 2.0 ** -5], I=I_PAR, v0=(1, 1), n_samples=50_000)
    table = ratio_sweep(par, WeightSpec("rho", I0=I_PAR), fam, ExponentVector(["3/2", "3/2"]), cells=32)
    assert len(table.rows) == 2
    assert abs(table.slope) < 0.1
    assert table.csv().splitlines()[0] == "delta,M,E1,E2,ratio"


def test_probe_refusals():
    par = systems.parabola()
    with pytest.raises(ProbeRefused):
        optimality_probe(par, (2, 2), (0, 0, 0), [0.1], p=ExponentVector(["2", "2"]))
    with pytest.raises(ProbeRefused):
        optimality_probe(par, (3, 3), (0, 0, 0), [0.1])


def test_tolerances_file(tmp_path):
    p = tmp_path / "tol.json"
    p.write_text(json.dumps({"band_factor": 3}))
    assert Tolerances.load(p).band_factor == 3.0
    p.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ValueError):
        Tolerances.load(p)
