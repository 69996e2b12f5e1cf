"""
端到端验收：真实求解内置示例并检验外逼近的性质
运行较慢，默认可用 -m "not slow" 跳过
"""

import asyncio
import time

import numpy as np
import pytest

from ..core.app.attractor_service import AttractorService, solve_degree
from ..core.attractor.queries import GridAxis, estimate_volume, grid_evaluate
from ..core.geometry.sampling import sample_uniform
from ..models.models import ApproximationSet
from ..models.run_config import load_config

pytestmark = pytest.mark.slow

SLACK = 1e-6
UNIFORM_SAMPLES = 100_000


def henon_config():
    return load_config("henon", [("tightening.degrees", "[4, 6, 8]")])


@pytest.fixture(scope="module")
def henon_document():
    return asyncio.run(AttractorService(henon_config()).solve_all())


@pytest.fixture(scope="module")
def vanderpol_document():
    return asyncio.run(AttractorService(load_config("vanderpol")).solve_all())


def assert_chain(approximation, seed):
    """X_k ⊂ Y_k 逐点成立；d_k ≥ λ(Y_k) ≥ λ(X_k) 在 3 倍标准误差内成立"""
    domain = approximation.X.moment_domain
    points = sample_uniform(domain, UNIFORM_SAMPLES, seed)
    in_Xk = approximation.members_Xk(points)
    in_Yk = approximation.members_Yk(points)
    assert not np.any(in_Xk & ~in_Yk)

    volume_Yk = estimate_volume(approximation.members_Yk, domain, UNIFORM_SAMPLES, seed)
    volume_Xk = estimate_volume(approximation.members_Xk, domain, UNIFORM_SAMPLES, seed)
    assert approximation.d_k >= volume_Yk.volume_estimate - 3 * volume_Yk.standard_error
    assert volume_Yk.volume_estimate >= volume_Xk.volume_estimate - 3 * volume_Xk.standard_error


def assert_samples_inside(approximation, points):
    inside_X = approximation.X.contains_many(points)
    v_min = approximation.v_min_values(points)
    assert inside_X.all()
    assert np.all(v_min >= -SLACK)


class TestHenon:
    def test_all_records_certified(self, henon_document):
        assert [r.k for r in henon_document.records] == [4, 6, 8]
        assert henon_document.all_succeeded

    def test_objective_matches_reference_solver(self, henon_document):
        # 同一 SDP 交给外部锥优化求解器得到的最优值
        assert henon_document.select(8).approximation.d_k == pytest.approx(2.1307, abs=5e-4)

    def test_objective_is_monotone(self, henon_document):
        d = [r.approximation.d_k for r in henon_document.records]
        for current, following in zip(d, d[1:]):
            assert current >= following - SLACK * max(1.0, abs(current))

    def test_attractor_samples_inside_Xk(self, henon_document):
        sample = AttractorService(henon_document.config).simulate()
        assert sample.count == 100_000
        assert_samples_inside(henon_document.select(8).approximation, sample.points)

    def test_containment_chain(self, henon_document):
        assert_chain(henon_document.select(8).approximation, seed=21)

    def test_intersection_not_larger(self, henon_document):
        service = AttractorService(henon_document.config)
        both = service.volume(henon_document, ApproximationSet.INTERSECTION)
        highest = service.volume(henon_document, ApproximationSet.XK, degree=8)
        assert both.volume_estimate <= highest.volume_estimate


class TestVanDerPol:
    def test_hole_and_limit_cycle(self, vanderpol_document):
        approximation = vanderpol_document.select(12).approximation
        grid = grid_evaluate(approximation, [GridAxis(0, -2.0, 2.0, 101), GridAxis(1, -2.0, 2.0, 101)])
        radius = np.linalg.norm(grid.points, axis=1)
        assert not np.any(grid.in_Xk & (radius < 0.4))

        sample = AttractorService(vanderpol_document.config).simulate()
        assert_samples_inside(approximation, sample.points)

    def test_objective_matches_reference_solver(self, vanderpol_document):
        assert vanderpol_document.select(12).approximation.d_k == pytest.approx(4.8686, abs=5e-4)

    def test_enclosure_is_nontrivial(self, vanderpol_document):
        approximation = vanderpol_document.select(12).approximation
        domain = approximation.X.moment_domain
        result = estimate_volume(approximation.members_Xk, domain, UNIFORM_SAMPLES, seed=11)
        assert domain.volume == pytest.approx(3.84 * np.pi)
        assert result.volume_estimate < domain.volume - 3 * result.standard_error

    def test_containment_chain(self, vanderpol_document):
        assert_chain(vanderpol_document.select(12).approximation, seed=12)


class TestLorenz:
    def test_solves_in_time_and_contains_trajectory(self):
        config = load_config("lorenz")
        service = AttractorService(config)
        started = time.perf_counter()
        record = solve_degree(
            config.build_system(),
            service.X,
            8,
            config.solver,
            config.domain.scaling,
            config.certify.samples,
            config.seed,
        )
        assert time.perf_counter() - started <= 120.0
        assert record.succeeded

        sample = service.simulate()
        assert_samples_inside(record.approximation, sample.points)
