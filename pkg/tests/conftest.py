from fractions import Fraction

import mpmath
import pytest

from subharmonics.polychain import ChainContext
from subharmonics.roots import RootTable

# reference coefficients of p_1 .. p_13, lowest power first
TABLE_1 = {
    1: [1],
    2: [2, -1],
    3: [3, 0, -1],
    4: [4, -2, -2, 1],
    5: [5, 0, -5, 0, 1],
    6: [6, -3, -8, 4, 2, -1],
    7: [7, 0, -14, 0, 7, 0, -1],
    8: [8, -4, -20, 10, 12, -6, -2, 1],
    9: [9, 0, -30, 0, 27, 0, -9, 0, 1],
    10: [10, -5, -40, 20, 42, -21, -16, 8, 2, -1],
    11: [11, 0, -55, 0, 77, 0, -44, 0, 11, 0, -1],
    12: [12, -6, -70, 35, 112, -56, -72, 36, 20, -10, -2, 1],
    13: [13, 0, -91, 0, 182, 0, -156, 0, 65, 0, -13, 0, 1],
}


def sine_roots(n):
    """Positive roots of p_n as 2 sin(k pi / n), k = 1 .. floor(n/2), at the current mp precision."""
    return [2 * mpmath.sin(k * mpmath.pi / n) for k in range(1, n // 2 + 1)]


def product_form(n, A):
    """n * prod(1 - A^2 / r_k^2) over the roots below 2, times (1 - A/2) for even n."""
    v = mpmath.mpf(n)
    for k in range(1, (n - 1) // 2 + 1):
        v *= 1 - A ** 2 / (4 * mpmath.sin(k * mpmath.pi / n) ** 2)
    if n % 2 == 0:
        v *= 1 - A / 2
    return v


def to_mpf(q):
    q = Fraction(q)
    return mpmath.mpf(q.numerator) / q.denominator


@pytest.fixture(scope="session")
def chain30():
    return ChainContext(30)


@pytest.fixture(scope="session")
def table30(chain30):
    return RootTable.build(30, chain30)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
