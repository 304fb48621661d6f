from pathlib import Path

import numpy as np
import pytest
from scipy.stats import unitary_group

from app.core.config import get_settings
from app.core.logging_config import configure_logging
from app.schemas.layout import RegisterLayout
from app.schemas.problem import HermitianSystem
from app.services.encoding_service import encoding_service

DATA_DIR = Path(__file__).parent / "data" / "problems"
WORKED_PROBLEM = DATA_DIR / "worked_example.txt"


def pytest_configure(config):
    # structlog must be configured before any service logs, otherwise it prints to stdout
    configure_logging(get_settings())


def make_encodable_system(rng: np.random.Generator, n: int = 3) -> HermitianSystem:
    """Random 2x2 Hermitian system whose eigenvalues are a random multiple of two distinct integers < 2^n"""
    lambda_tilde = rng.choice(np.arange(1, 1 << n), size=2, replace=False)
    scale = rng.uniform(0.2, 3.0)
    V = unitary_group.rvs(2, random_state=rng)
    A = V @ np.diag(lambda_tilde * scale) @ V.conj().T
    A = (A + A.conj().T) / 2
    b = rng.normal(size=2) + 1j * rng.normal(size=2)
    return HermitianSystem(A=A, b=b)


@pytest.fixture
def worked_system() -> HermitianSystem:
    return HermitianSystem(A=[[1.0, -1.0 / 3.0], [-1.0 / 3.0, 1.0]], b=[0.0, 1.0])


@pytest.fixture
def worked_plan(worked_system):
    return encoding_service.build_plan(worked_system, n=2, C=1.0)


@pytest.fixture
def worked_layout() -> RegisterLayout:
    return RegisterLayout(nb=1, n=2)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def worked_problem_file(tmp_path) -> Path:
    """Copy of the worked example in a writable directory"""
    target = tmp_path / "worked_example.txt"
    target.write_text(WORKED_PROBLEM.read_text(encoding="utf-8"), encoding="utf-8")
    return target
