import numpy as np
import pytest

from ..core.geometry.domain import BoxDomain, SemialgebraicSet
from ..models.models import DynamicalSystem, TimeKind

TOY_CONFIG = """
seed = 5
actions = ["solve", "certify", "volume", "grid", "simulate"]
log_level = "WARNING"

[system]
variables = ["x"]
time = "continuous"
discount = 1.0
field = ["-x"]

[domain]
kind = "box"
lower = [-1.0]
upper = [1.0]

[tightening]
degrees = [2]

[solver]
tol_eq = 1e-7
tol_psd = 1e-7
tol_gap = 1e-7

[simulate]
initial_state = [0.5]
burn_in = 20.0
count = 50
dt = 0.01

[certify]
samples = 500

[volume]
samples = 1000
set = "xk"

[[grid.axes]]
dimension = 0
lower = -1.0
upper = 1.0
count = 5
"""


@pytest.fixture
def toy_config_text() -> str:
    """ẋ = −x on [−1, 1]：吸引子为原点"""
    return TOY_CONFIG


@pytest.fixture
def toy_system() -> DynamicalSystem:
    return DynamicalSystem.from_expressions(["x"], ["-x"], TimeKind.CONTINUOUS, 1.0)


@pytest.fixture
def unit_interval() -> SemialgebraicSet:
    return SemialgebraicSet.from_domain(BoxDomain((-1.0,), (1.0,)))


@pytest.fixture
def unit_square() -> SemialgebraicSet:
    return SemialgebraicSet.from_domain(BoxDomain((-1.0, -1.0), (1.0, 1.0)))


@pytest.fixture
def henon_system() -> DynamicalSystem:
    return DynamicalSystem.from_expressions(
        ["x", "y"], ["2/3*(1 + y) - 2.1*x^2", "0.45*x"], TimeKind.DISCRETE, 0.05
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)
