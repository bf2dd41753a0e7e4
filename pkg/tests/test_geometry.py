# tests/test_geometry.py

import math

import numpy as np
import pytest

from locscale.common.errors import ContractError
from locscale.geometry.measure import (
    MeasureMode,
    QuadratureMeasure,
    Similarity,
    apply_transform,
    as_measure,
    gram_weights,
    mass_sandwich,
)
from locscale.geometry.surface import ParamSurface, SurfaceKind, lipschitz_constant
from locscale.scalespace.grid import ScaleGrid
from locscale.surface_scales.run import surface_scale_stack


def test_surface_contract():
    with pytest.raises(ContractError):
        ParamSurface(samples=np.zeros((10, 1)), h_r=0.1)
    with pytest.raises(ContractError):
        ParamSurface(samples=np.zeros((1, 2)), h_r=0.1)
    with pytest.raises(ContractError):
        ParamSurface(samples=np.zeros((10, 2)), h_r=-0.1)
    with pytest.raises(ContractError):
        # base coordinates are not r
        ParamSurface(samples=np.zeros((10, 2)), h_r=0.1, kind=SurfaceKind.LIPSCHITZ_GRAPH)


@pytest.mark.parametrize("slope", [1.0, 10.0])
def test_tent_graph_weights(slope, tent_graph):
    surface = tent_graph(slope=slope)
    assert surface.lipschitz == pytest.approx(slope, rel=1e-12)
    gram = gram_weights(surface)
    factor = math.sqrt(1 + slope ** 2)
    np.testing.assert_allclose(gram.area, factor, rtol=1e-12)
    np.testing.assert_allclose(gram.weights, factor * surface.h_r, rtol=1e-12)
    assert gram.gamma_star == pytest.approx(factor)
    assert gram.degenerate_count == 0


def test_general_surfaces_have_no_lipschitz_constant(circle):
    assert lipschitz_constant(circle()) is None


def test_boundary_distance():
    samples = np.stack([np.arange(5) * 0.5, np.zeros(5)], axis=1)
    open_curve = ParamSurface(samples=samples, h_r=0.5)
    np.testing.assert_allclose(open_curve.boundary_distance(), [0.0, 0.5, 1.0, 0.5, 0.0])
    assert open_curve.interior_ids(0.5) == (1, 2, 3)
    closed = ParamSurface(samples=samples, h_r=0.5, closed=True)
    assert np.all(np.isinf(closed.boundary_distance()))


def test_circle_mass_converges_to_circumference(circle):
    for radius in (1.0, 2.0):
        measure = as_measure(circle(radius=radius, samples=256), MeasureMode.SURFACE)
        assert measure.total_mass == pytest.approx(2 * math.pi * radius, rel=1e-4)


def test_mass_refinement_is_self_consistent():
    def mass(h):
        r = np.arange(int(round(1 / h)) + 1) * h
        A = 0.2 * np.sin(2 * math.pi * r)
        surface = ParamSurface(samples=np.stack([r, A], axis=1), h_r=h, kind=SurfaceKind.LIPSCHITZ_GRAPH)
        return as_measure(surface, "surface").total_mass

    m1, m2, m3 = mass(1 / 32), mass(1 / 64), mass(1 / 128)
    assert abs(m3 - m2) <= 2 * abs(m2 - m1)


def test_hausdorff_and_explicit_modes(tent_graph):
    surface = tent_graph()
    haus = as_measure(surface, MeasureMode.HAUSDORFF_PARAM)
    np.testing.assert_allclose(haus.weights, surface.h_r)
    with pytest.raises(ContractError):
        as_measure(surface, MeasureMode.EXPLICIT)
    explicit = as_measure(surface, "explicit", weights=np.full(surface.size, 2.0))
    assert explicit.total_mass == pytest.approx(2.0 * surface.size)
    with pytest.raises(ContractError):
        as_measure(surface, "explicit", weights=np.full(surface.size, -1.0))
    with pytest.raises(ContractError):
        as_measure(surface, "volume")


def test_degenerate_nodes_are_dropped_with_a_warning():
    samples = np.array([[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    surface = ParamSurface(samples=samples, h_r=1.0)
    gram = gram_weights(surface)
    assert gram.degenerate_count == 2
    assert gram.area[0] == 0.0 and gram.area[1] == 0.0
    measure = as_measure(surface, MeasureMode.SURFACE)
    assert len(measure) == 3
    assert measure.ids == (2, 3, 4)
    assert measure.warnings


@pytest.mark.parametrize("window", [[(0, 40)], [(100, 180)], [(30, 31)]])
def test_mass_sandwich_on_graphs(window, tent_graph):
    sandwich = mass_sandwich(tent_graph(slope=3.0), window)
    assert sandwich.holds
    assert sandwich.alpha <= sandwich.mu


def test_mass_sandwich_contract(tent_graph):
    with pytest.raises(ContractError):
        mass_sandwich(tent_graph(), [(5, 5)])
    with pytest.raises(ContractError):
        mass_sandwich(tent_graph(), [(0, 5), (0, 5)])


def test_similarity_contract_and_composition():
    with pytest.raises(ContractError):
        Similarity(rotation=np.array([[1.0, 0.1], [0.0, 1.0]]), translation=np.zeros(2))
    with pytest.raises(ContractError):
        Similarity.planar(0.3, dilation=0.0)
    outer = Similarity.planar(0.7, translation=(1.0, -2.0), dilation=2.0)
    inner = Similarity.planar(-1.3, translation=(0.5, 0.25), dilation=0.5)
    x = np.random.default_rng(5).normal(size=(6, 2))
    np.testing.assert_allclose(outer.compose(inner).apply(x), outer.apply(inner.apply(x)), atol=1e-12)
    np.testing.assert_allclose(Similarity.identity(2).apply(x), x)


def test_apply_transform_scales_weights(tent_graph):
    measure = as_measure(tent_graph(), MeasureMode.SURFACE)
    moved = apply_transform(measure, Similarity.planar(0.4, translation=(3.0, 1.0), dilation=2.0))
    np.testing.assert_allclose(moved.weights, 2.0 * measure.weights)
    np.testing.assert_allclose(moved.boundary_distance, 2.0 * measure.boundary_distance)
    rigid = apply_transform(measure, Similarity.planar(0.4, translation=(3.0, 1.0)))
    assert np.array_equal(rigid.weights, measure.weights)
    with pytest.raises(ContractError):
        apply_transform(measure, Similarity.identity(3))


def test_measure_contract():
    with pytest.raises(ContractError):
        QuadratureMeasure(points=np.zeros((3, 2)), weights=np.ones(2), d=1)
    with pytest.raises(ContractError):
        QuadratureMeasure(points=np.zeros((3, 2)), weights=np.zeros(3), d=1)
    with pytest.raises(ContractError):
        QuadratureMeasure(points=np.zeros((3, 2)), weights=np.ones(3), d=2)


def _stack_values(measure, eval_points, grid):
    return surface_scale_stack(measure, eval_points, grid).S


@pytest.mark.parametrize("fixture", ["circle", "tent"])
def test_rigid_motions_leave_stacks_unchanged(fixture, circle, tent_graph):
    if fixture == "circle":
        measure = as_measure(circle(samples=128), MeasureMode.SURFACE)
        eval_points = [0, 17, 64]
        grid = ScaleGrid.from_t_range(2.0, 0.01, 4.0, per_octave=4)
    else:
        measure = as_measure(tent_graph(slope=2.0, h=1.0 / 128), MeasureMode.SURFACE)
        eval_points = [40, 64, 80]
        grid = ScaleGrid.from_t_range(2.0, 0.002, 0.02, per_octave=4)
    motion = Similarity.planar(1.1, translation=(5.0, -3.0))
    base = _stack_values(measure, eval_points, grid)
    moved = _stack_values(apply_transform(measure, motion), eval_points, grid)
    scale = np.max(np.abs(base))
    np.testing.assert_allclose(moved, base, rtol=1e-9, atol=1e-9 * scale)
