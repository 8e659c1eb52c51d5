import math

import numpy as np
from hypothesis import strategies as st

from workbench.stepfn import StepFunction


@st.composite
def step_functions(draw, max_blocks=8, zero_mean=False, dyadic=True):
    """Step functions on dyadic grids so that measure counts are exact."""
    n = draw(st.integers(1, max_blocks))
    lengths = np.array(draw(st.lists(st.integers(1, 64), min_size=n, max_size=n)), float) / 16
    values = np.array(draw(st.lists(st.integers(-32, 32).filter(bool), min_size=n, max_size=n)), float) / 8
    start = draw(st.integers(-64, 64)) / 16
    if zero_mean:
        if n == 1:
            return StepFunction.zero()
        s = math.fsum((values[:-1] * lengths[:-1]).tolist())
        lengths[-1] = 2.0 ** math.ceil(math.log2(max(abs(s), 2 ** -6)))
        values[-1] = -s / lengths[-1]
        if values[-1] == 0:
            return StepFunction(start + np.concatenate([[0], np.cumsum(lengths[:-1])]), values[:-1])
    bp = start + np.concatenate([[0.0], np.cumsum(lengths)])
    return StepFunction(bp, values)


def pair():
    return StepFunction([0.0, 1.0, 2.0], [1.0, -1.0])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
