import numpy as np
import pytest

from analytic_reference import build_edney1, build_edney6, build_oblique_case
from config_loader import ExperimentConfig
from flow_field import GridSpec
from solver_ensemble import SchemeConfig
from truncation_postprocessor import GridVector


@pytest.fixture(scope="session")
def grid100():
    return GridSpec(100, 100)


@pytest.fixture(scope="session")
def edney1(grid100):
    return build_edney1(4.0, 20.0, 15.0, grid100)


@pytest.fixture(scope="session")
def edney6(grid100):
    return build_edney6(3.5, 15.0, 25.0, grid100)


@pytest.fixture
def uniform_case():
    """편향 0 경사 충격파 = 균일 자유류"""
    return build_oblique_case(2.5, 0.0)


@pytest.fixture
def small_config(tmp_path):
    """작은 격자, 짧은 반복의 3구성원 실험"""
    schemes = [
        SchemeConfig("cir1", cfl=0.5, max_iters=40),
        SchemeConfig("muscl_hllc2", limiter="minmod", max_iters=40),
        SchemeConfig("weno3", max_iters=40),
    ]
    return ExperimentConfig(case="oblique", mach=2.5, theta_deg=10.0, nx=20, ny=20, schemes=schemes,
                            output_dir=str(tmp_path / "out"), write_vtk=False, log_interval=10)


@pytest.fixture
def vec():
    """합성 벡터 생성 함수"""
    def make(*values):
        return GridVector.from_values(np.asarray(values, dtype=np.float64))
    return make
