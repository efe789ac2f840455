import math

import numpy as np
import pytest

from frostman_kit.geometry import PointCloud
from frostman_kit.measures import cantor_cloud, generate_example

LOG23 = math.log(2) / math.log(3)


def random_cloud(seed: int, n: int, dim: int, resolution: float = 1e-3) -> PointCloud:
    rng = np.random.default_rng(seed)
    return PointCloud(dim, rng.random((n, dim)), resolution)


@pytest.fixture
def cantor6():
    return generate_example("cantor", level=6), cantor_cloud(6)


@pytest.fixture
def dust4():
    return generate_example("cantor", level=4, dim=2, ratio=0.25), cantor_cloud(4, 2, 0.25)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(number: int, ok: bool, detail: str) -> bool:
    """Store and print one acceptance line; the summary hook repeats them at the end."""
    ACCEPTANCE[number] = (bool(ok), detail)
    print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
