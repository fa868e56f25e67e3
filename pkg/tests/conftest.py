import numpy as np
import pytest

from nlmrp.frame import ProcessingArea


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_area(rng, kind="noise"):
    """Random 32x32 processing areas of a few textures."""
    if kind == "noise":
        return ProcessingArea(rng.integers(0, 256, (32, 32)))
    if kind == "tiled":
        tile = rng.integers(0, 256, (int(rng.integers(2, 9)),) * 2)
        big = np.tile(tile, (32 // tile.shape[0] + 1,) * 2)[:32, :32]
        noisy = big + rng.normal(0, 4, big.shape)
        return ProcessingArea(np.clip(np.rint(noisy), 0, 255))
    # smooth gradient plus mild noise
    yy, xx = np.mgrid[0:32, 0:32]
    a, b, c = rng.uniform(-3, 3, 3)
    img = 128 + a * xx + b * yy + c * rng.normal(0, 3, (32, 32))
    return ProcessingArea(np.clip(np.rint(img), 0, 255))


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(n, passed, detail)``."""
    lines = request.config.stash[ACCEPTANCE_KEY]

    def record(number, passed, detail=""):
        lines.append((number, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(lines, key=lambda x: x[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {detail}")
