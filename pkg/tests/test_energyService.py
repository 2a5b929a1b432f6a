import numpy as np
import pytest

from models.BallFamily import BallStrategy
from models.Domain import Ball, BoxDomain, Grid, PlaneSegment
from models.Field import Affine, PlaneJump, Sum
from services.energyService import EnergyService, ball_candidates
from services.errors import GridCapabilityError, ParameterError

UNIT_SQUARE = BoxDomain((0.0, 0.0), (1.0, 1.0))
UNIT_INTERVAL = BoxDomain((0.0,), (1.0,))


def _skew(rng):
    a = rng.standard_normal()
    return np.array([[0.0, a], [-a, 0.0]])


def test_constant_field_has_zero_energy(rule2):
    grid = Grid(UNIT_SQUARE, 0.025)
    u = Affine(np.zeros((2, 2)), [0.3, -1.2])
    assert EnergyService(rule2).f_eps(u, UNIT_SQUARE, 0.1, grid).total == 0.0


def test_rigid_motions_cost_nothing(rule2, rng):
    eps = 0.1
    grid = Grid(UNIT_SQUARE, eps / 4)
    service = EnergyService(rule2)
    for _ in range(10):
        u = Affine(_skew(rng), rng.standard_normal(2))
        assert service.f_eps(u, UNIT_SQUARE, eps, grid).total <= 1e-12
        assert service.f_eps_double(u, UNIT_SQUARE, eps, grid) <= 1e-12
        assert service.fp_eps(u, eps, 1.0, "dyadic:1", grid, UNIT_SQUARE).total <= 1e-12


def test_report_total_is_rebuilt_from_directions(rule2):
    grid = Grid(UNIT_SQUARE, 0.025)
    report = EnergyService(rule2).f_eps(Affine([[1.0, 0.2], [0.0, 0.5]]), UNIT_SQUARE, 0.1, grid)
    assert report.total > 0
    assert report.reduce_directions(rule2.weights) == pytest.approx(report.total, rel=1e-12)
    assert report.n_directions == len(report.per_direction)


def test_directional_energy_is_monotone_in_the_set(rule2):
    grid = Grid(UNIT_SQUARE, 0.025)
    u = Sum([Affine([[0.5, 1.0], [0.0, -0.3]]), PlaneJump([1.0, 0.0], 0.37, [0.0, 0.0], [2.0, 1.0])])
    service = EnergyService(rule2)
    ball = Ball((0.5, 0.5), 0.4)
    for xi in ([1.0, 0.5], [-0.3, 2.0], [0.0, -1.0]):
        inner = service.f_eps_xi(u, ball, 0.1, xi, grid)
        outer = service.f_eps_xi(u, UNIT_SQUARE, 0.1, xi, grid)
        assert 0.0 <= inner <= outer


def test_directional_energy_saturates(rule2):
    eps, xi = 0.1, np.array([1.0, 0.5])
    grid = Grid(UNIT_SQUARE, 0.025)
    u = PlaneJump([1.0, 0.0], 0.5, [0.0, 0.0], [50.0, 0.0])
    value = EnergyService(rule2).f_eps_xi(u, UNIT_SQUARE, eps, xi, grid)
    overlap = (1.0 - eps * xi[0]) * (1.0 - eps * xi[1])
    assert value <= 0.5 * np.pi * overlap / eps + 1e-12


def test_single_ball_family_matches_f_eps(rule2):
    grid = Grid(UNIT_SQUARE, 0.025)
    u = Affine([[1.0, 0.3], [0.3, -0.5]])
    service = EnergyService(rule2)
    report = service.fp_eps(u, 0.1, 1.0, "dyadic:0", grid, UNIT_SQUARE)
    assert report.n_balls == 1
    direct = service.f_eps(u, Ball((0.5, 0.5), 0.5), 0.1, grid)
    assert report.total == pytest.approx(direct.total, rel=1e-12)


def test_dyadic_refinement_never_decreases(rule2):
    grid = Grid(UNIT_SQUARE, 0.025)
    u = Sum([Affine([[1.0, 0.0], [0.0, 0.5]]), PlaneJump([0.0, 1.0], 0.3, [0.0, 0.0], [0.0, 3.0])])
    service = EnergyService(rule2)
    coarse = service.fp_eps(u, 0.1, 2.0, "dyadic:0", grid, UNIT_SQUARE).total
    fine = service.fp_eps(u, 0.1, 2.0, "dyadic:1", grid, UNIT_SQUARE).total
    assert fine >= coarse


def test_hoelder_bounds_p1_by_higher_p(rule2):
    grid = Grid(UNIT_SQUARE, 0.025)
    u = Sum([Affine([[0.5, 1.0], [0.0, -0.3]]), PlaneJump([1.0, 0.0], 0.37, [0.0, 0.0], [2.0, 1.0])])
    service = EnergyService(rule2)
    one = service.fp_eps(u, 0.1, 1.0, "dyadic:1", grid, UNIT_SQUARE).total
    mass = float(np.sum(rule2.weights))
    assert one > 0.0
    for p in (1.5, 2.0, 3.0):
        value = service.fp_eps(u, 0.1, p, "dyadic:1", grid, UNIT_SQUARE).total
        assert one <= mass ** (1.0 - 1.0 / p) * value * (1.0 + 1e-12)


def test_prime_variant_uses_ball_support(rule2):
    grid = Grid(UNIT_SQUARE, 0.025)
    u = Affine([[1.0, 0.0], [0.0, 1.0]])
    service = EnergyService(rule2)
    standard = service.fp_eps(u, 0.1, 1.0, "dyadic:1", grid, UNIT_SQUARE)
    prime = service.fp_eps(u, 0.1, 1.0, "dyadic:1", grid, UNIT_SQUARE, variant="prime")
    assert prime.variant == "prime"
    assert prime.total <= standard.total + 1e-12


def test_fubini_affine_1d(rule1):
    eps = 0.05
    grid = Grid(UNIT_INTERVAL, eps / 8)
    u = Affine([[1.0]])
    service = EnergyService(rule1)
    sliced = service.f_eps(u, UNIT_INTERVAL, eps, grid).total
    double = service.f_eps_double(u, UNIT_INTERVAL, eps, grid)
    assert abs(sliced - double) / double <= 0.03


def test_fubini_jump_2d(rule2):
    eps = 0.1
    grid = Grid(UNIT_SQUARE, eps / 8)
    u = PlaneJump([1.0, 0.0], 0.5, [0.0, 0.0], [10.0, 0.0])
    service = EnergyService(rule2)
    sliced = service.f_eps(u, UNIT_SQUARE, eps, grid).total
    double = service.f_eps_double(u, UNIT_SQUARE, eps, grid)
    assert abs(sliced - double) / double <= 0.03


def test_workers_do_not_change_the_result(rule2):
    grid = Grid(UNIT_SQUARE, 0.025)
    u = Sum([Affine([[0.2, 1.0], [0.0, 0.1]]), PlaneJump([0.6, 0.8], 0.55, [0.0, 0.0], [1.0, 1.0])])
    one = EnergyService(rule2, workers=1).f_eps(u, UNIT_SQUARE, 0.1, grid)
    three = EnergyService(rule2, workers=3).f_eps(u, UNIT_SQUARE, 0.1, grid)
    assert three.partitions == 3
    assert three.total == pytest.approx(one.total, rel=1e-13)


def test_precrack_removes_crossing_balls():
    crack = PlaneSegment(axis=0, offset=0.4, lower=(0.4, 0.0), upper=(0.4, 0.45))
    domain = BoxDomain((0.0, 0.0), (1.0, 1.0), (crack,))
    families = list(ball_candidates(domain, "dyadic:1"))
    assert len(families) == 1
    assert len(families[0]) == 3
    assert all(domain.contains_ball(b) for b in families[0])


def test_precrack_lowers_f_eps_on_the_grid(rule2):
    crack = PlaneSegment(axis=0, offset=0.525, lower=(0.525, 0.0), upper=(0.525, 1.0))
    cracked = BoxDomain((0.0, 0.0), (1.0, 1.0), (crack,))
    u = Affine([[1.0, 0.0], [0.0, 0.5]])
    service = EnergyService(rule2)
    plain = service.f_eps(u, UNIT_SQUARE, 0.2, Grid(UNIT_SQUARE, 0.05)).total
    value = service.f_eps(u, cracked, 0.2, Grid(cracked, 0.05)).total
    assert 0.0 < value < 0.99 * plain


def test_greedy_families_are_disjoint_and_nested():
    families = list(ball_candidates(UNIT_SQUARE, BallStrategy("greedy", 6)))
    assert families
    sizes = [len(f) for f in families]
    assert sizes == sorted(sizes)
    assert sizes[-1] <= 6
    assert all(f.inside(UNIT_SQUARE) for f in families)


def test_resolution_and_parameter_errors(rule1):
    u = Affine([[1.0]])
    service = EnergyService(rule1)
    with pytest.raises(GridCapabilityError):
        service.f_eps(u, UNIT_INTERVAL, 0.1, Grid(UNIT_INTERVAL, 0.05))
    with pytest.raises(ParameterError):
        service.f_eps(u, UNIT_INTERVAL, 0.0, Grid(UNIT_INTERVAL, 0.05))
    with pytest.raises(ParameterError):
        service.f_eps(u, UNIT_INTERVAL, 0.1)
    grid = Grid(UNIT_INTERVAL, 0.01)
    with pytest.raises(ParameterError):
        service.fp_eps(u, 0.1, 0.5, "dyadic:1", grid)
    with pytest.raises(ParameterError):
        service.fp_eps(u, 0.1, 1.0, "dyadic:1", grid, variant="other")
