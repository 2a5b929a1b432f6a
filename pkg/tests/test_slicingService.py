import numpy as np
import pytest
from scipy.integrate import quad

from models.Domain import Ball, BoxDomain, Grid
from models.Field import Affine, PlaneJump, Ramp, Sum
from models.Section1D import Section1D
from services.energyService import EnergyService
from services.errors import DomainError, ParameterError
from services.harnessService import richardson
from services.slicingService import (SlicingService, arctan_integral, f1d, gobbino_interval_energy,
                                     gobbino_project, lower_bound_1d, ms_1d, section, slice_measure)

UNIT_INTERVAL = BoxDomain((0.0,), (1.0,))


def _random_section(rng, pieces=6):
    breaks = np.sort(rng.uniform(-0.2, 1.2, size=pieces - 1))
    return Section1D(breaks, 3.0 * rng.standard_normal(pieces), rng.standard_normal(pieces))


def test_section_of_affine_and_jump():
    xi = np.array([0.6, -0.9])
    v = section(Affine(np.eye(2)), xi, [0.1, 0.2])
    assert v.slopes[0] == pytest.approx(xi @ xi)
    jump = PlaneJump([1.0, 0.0], 0.5, [0.0, 0.0], [3.0, 0.0])
    v = section(jump, [1.0, 0.0], [0.0, 0.0])
    at, amp = v.jump_points()
    assert at.tolist() == [0.5]
    assert amp.tolist() == [3.0]
    v = section(jump, [0.0, 1.0], [0.0, 0.0])
    assert v.jump_points()[0].size == 0
    with pytest.raises(ParameterError):
        section(jump, [0.0, 0.0], [0.0, 0.0])


def test_section_restricted_to_region():
    v = section(Affine([[1.0]]), [1.0], [0.25], UNIT_INTERVAL)
    assert v.domain == ((-0.25, 0.75),)
    with pytest.raises(DomainError):
        section(Affine(np.eye(2)), [1.0, 0.0], [0.5, 2.0], BoxDomain((0.0, 0.0), (1.0, 1.0)))


def test_f1d_closed_forms():
    eps = 0.05
    assert f1d(Section1D.constant(2.0), (0.0, 0.9), eps) == 0.0
    m = 1.7
    expected = (1 - eps) * np.arctan(m * m * eps) / eps
    assert f1d(Section1D.affine(0.3, m), (0.0, 1 - eps), eps) == pytest.approx(expected, rel=1e-12)
    s = 4.0
    step = Section1D([0.5], [0.0, 0.0], [0.0, s])
    assert f1d(step, (0.0, 1 - eps), eps) == pytest.approx(np.arctan(s * s / eps), rel=1e-12)


def test_f1d_needs_room_for_the_shift():
    v = Section1D.affine(0.0, 1.0, domain=((0.0, 1.0),))
    with pytest.raises(DomainError):
        f1d(v, (0.0, 1.0), 0.1)
    with pytest.raises(ParameterError):
        f1d(v, (0.0, 0.5), 0.0)
    assert f1d(v, [(0.0, 0.3), (0.5, 0.8)], 0.1) == pytest.approx(2 * f1d(v, (0.0, 0.3), 0.1))


@pytest.mark.parametrize("scale", [0.01, 0.3, 100.0])
def test_arctan_integral_matches_adaptive_quadrature(scale):
    v = Section1D([0.3, 0.5, 0.7], [1.0, 3.0, -2.0, 0.5], [0.0, -0.6, 2.9, -0.25])
    shift = 0.08
    exact = arctan_integral(v, 0.0, 1.0, shift, scale)
    oracle, _ = quad(lambda t: np.arctan((v.value(t + shift) - v.value(t)) ** 2 / scale), 0.0, 1.0,
                     points=[0.3 - shift, 0.3, 0.5 - shift, 0.5, 0.7 - shift, 0.7], epsabs=1e-13, epsrel=1e-12,
                     limit=200)
    assert exact == pytest.approx(oracle, rel=1e-9, abs=1e-13)


def test_ms_1d_examples():
    assert ms_1d(Section1D.affine(0.0, 2.0), (0.0, 1.0), 2 / np.pi) == pytest.approx(8 / np.pi)
    two = Section1D([0.3, 0.6], [0.0, 0.0, 0.0], [0.0, 1.0, 3.0])
    assert ms_1d(two, (0.0, 1.0), 2 / np.pi) == 2.0
    assert ms_1d(two, (0.4, 1.0), 2 / np.pi) == 1.0


def test_lower_bound_examples():
    assert lower_bound_1d(Section1D.constant(1.0), 0.0, 1.0) == 0.0
    assert lower_bound_1d(Section1D.affine(0.0, 2.0), 0.0, 1.0) == pytest.approx(np.pi / 2)
    assert lower_bound_1d(Section1D.affine(0.0, 0.5), 0.0, 1.0) == pytest.approx(0.25)
    with pytest.raises(ParameterError):
        lower_bound_1d(Section1D.constant(1.0), 1.0, 0.0)


def test_lower_bound_moves_off_breakpoints():
    step = Section1D([0.5], [0.0, 0.0], [0.0, 1.0])
    # en b = 0.5 se toma el valor por la izquierda
    assert lower_bound_1d(step, 0.0, 0.5) == 0.0
    assert lower_bound_1d(step, 0.0, 0.75) == pytest.approx(1.0 / 0.75)


def test_gobbino_projection_identity(rng):
    for _ in range(100):
        v = _random_section(rng)
        a = rng.uniform(0.0, 0.1)
        j = int(rng.integers(3, 41))
        proj = gobbino_project(v, a, j, (0.0, 1.0))
        z0 = int(np.ceil(-a * j - 1e-12))
        z1 = int(np.floor((1.0 - a) * j + 1e-12))
        for z in range(z0, z1):
            delta = float(v.value(a + (z + 1) / j) - v.value(a + z / j))
            expected = min(0.5 * np.pi, j * delta ** 2)
            assert gobbino_interval_energy(proj, a, j, z) == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_gobbino_projection_errors():
    with pytest.raises(DomainError):
        gobbino_project(Section1D.affine(0.0, 1.0), 0.0, 4)
    with pytest.raises(ParameterError):
        gobbino_project(Section1D.affine(0.0, 1.0), 0.0, 0, (0.0, 1.0))


def test_slice_measure_splits_small_and_large_jumps():
    v = Section1D([0.2, 0.6], [1.0, 0.0, -2.0], [0.0, 0.5, 4.0])
    # saltos: 0.3 en 0.2 y 2.3 en 0.6
    m = slice_measure(v, 0.0, 1.0)
    assert m.jump_count == 1
    assert m.ac_part == pytest.approx(0.2 + 0.3 + 2.0 * 0.4)
    assert slice_measure(Section1D.constant(1.0, degenerate=True), 0.0, 1.0).total == 0.0


def test_mu_xi_on_the_unit_disk():
    slicing = SlicingService(400)
    disk = Ball((0.0, 0.0), 1.0)
    assert slicing.mu_xi(Affine(np.zeros((2, 2)), [1.0, 2.0]), [1.0, 0.0], disk) == 0.0
    area = slicing.mu_xi(Affine(np.eye(2)), [1.0, 0.0], disk)
    assert area == pytest.approx(np.pi, rel=1e-3)
    assert slicing.mu_xi(Affine(2 * np.eye(2)), [1.0, 0.0], disk) == pytest.approx(2 * area, rel=1e-12)
    jump = PlaneJump([1.0, 0.0], 0.0, [0.0, 0.0], [10.0, 0.0])
    assert slicing.mu_xi(jump, [1.0, 0.0], disk) == pytest.approx(2.0, rel=1e-12)


def test_i_u1(sphere2):
    slicing = SlicingService(400)
    disk = Ball((0.0, 0.0), 1.0)
    assert slicing.i_u1(Affine(np.eye(2)), disk, sphere2) == 0.0
    nu = np.array([0.6, 0.8])
    jump = PlaneJump(nu, 0.0, [0.0, 0.0], 100 * nu)
    value = slicing.i_u1(jump, disk, sphere2)
    oracle = 2.0 * float(np.sum(sphere2.weights * np.abs(sphere2.nodes @ nu)))
    assert value == pytest.approx(oracle, rel=2e-2)
    scaled = slicing.i_u1(jump, Ball((0.0, 0.0), 2.0), sphere2)
    assert scaled == pytest.approx(2 * value, rel=1e-12)


def test_mu_hat_p_prefers_the_ball_that_sees_the_jump():
    from services.quadratureService import build_sphere_rule
    u = PlaneJump([1.0], 0.5, [0.0], [10.0])
    value, family = SlicingService().mu_hat_p(u, UNIT_INTERVAL, 1.0, build_sphere_rule(1), "dyadic:1")
    assert value == pytest.approx(2.0)
    assert len(family) == 1
    with pytest.raises(ParameterError):
        SlicingService().mu_hat_p(u, UNIT_INTERVAL, 0.5, build_sphere_rule(1), "dyadic:1")


def test_sliced_directional_energy_1d(rule1):
    eps, xi, A = 0.05, 1.3, 0.7
    u = Affine([[A]])
    slicing = SlicingService()
    value = slicing.f_eps_xi_sliced(u, UNIT_INTERVAL, eps, [xi])
    closed = (1 - eps * xi) * np.arctan((A * eps * xi * xi) ** 2 / eps) / eps
    assert value == pytest.approx(closed, rel=1e-12)
    grid = Grid(UNIT_INTERVAL, eps / 8)
    on_grid = EnergyService(rule1).f_eps_xi(u, UNIT_INTERVAL, eps, [xi], grid)
    assert on_grid == pytest.approx(value, rel=5e-3)


def test_sliced_energy_report(rule1):
    eps = 0.05
    u = PlaneJump([1.0], 0.5, [0.0], [10.0])
    report = SlicingService().f_eps_sliced(u, UNIT_INTERVAL, eps, rule1)
    assert report.strategy == "sliced"
    assert report.reduce_directions(rule1.weights) == pytest.approx(report.total, rel=1e-12)
    assert report.total == pytest.approx(np.pi / 2, rel=1e-2)


def test_translation_defect_against_quadrature():
    inner = BoxDomain((0.2,), (0.8,))
    delta = 0.05
    value = SlicingService().translation_defect(Affine([[1.0]]), inner, delta, [1.0])
    oracle, _ = quad(lambda x: abs(np.arctan(x + delta) - np.arctan(x)), 0.2, 0.8 - delta, epsrel=1e-13)
    assert value == pytest.approx(oracle, rel=1e-10)


def test_section_commutes_with_translation_along_xi(rng):
    u = Sum([Affine([[0.4, -1.0], [0.3, 0.2]], [0.1, -0.5]),
             PlaneJump([0.6, 0.8], 0.45, [0.0, 0.0], [2.0, -1.0]),
             Ramp([1.0, 0.0], 0.2, 0.5, [0.0, 0.7])])
    for _ in range(20):
        xi = rng.standard_normal(2)
        y = rng.uniform(0.0, 1.0, size=2)
        s = rng.uniform(-0.5, 0.5)
        t = rng.uniform(-1.0, 1.0, size=50)
        moved = section(u, xi, y + s * xi)
        np.testing.assert_allclose(moved.value(t), section(u, xi, y).value(t + s), rtol=1e-10, atol=1e-12)


def test_gobbino_projection_converges_in_l1():
    v = Section1D([0.3, 0.7], [1.0, -2.0, 0.5], [0.0, 2.0, 1.0])
    t = np.linspace(0.0, 1.0, 200001)
    errors = []
    for j in (8, 32, 128, 512):
        proj = gobbino_project(v, 0.0, j, (0.0, 1.0))
        errors.append(float(np.mean(np.abs(v.value(t) - proj.value(t)))))
        assert j * errors[-1] <= 3.0
    assert errors[-1] < errors[0] / 10


@pytest.mark.parametrize("m", [0.5, 1.0, 2.0])
def test_f1d_limits_by_extrapolation(m):
    eps = [0.04, 0.02, 0.01]
    affine = Section1D.affine(0.3, m)
    values = [f1d(affine, (0.0, 1.0), e) for e in eps]
    assert richardson(eps, values) == pytest.approx(m * m, rel=0.01)
    # dos saltos grandes aislados
    cracked = Section1D([0.3, 0.6], [m, m, m], [0.0, 10.0, -5.0])
    values = [f1d(cracked, (0.0, 1.0), e) for e in eps]
    assert richardson(eps, values) == pytest.approx(m * m + np.pi, rel=0.01)
