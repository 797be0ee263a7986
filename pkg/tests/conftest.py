"""Shared high-precision reference functions (mpmath) for the test suite."""

from __future__ import annotations

import math

import mpmath as mp
import pytest

mp.mp.dps = 40


def _is_nonpositive_int(x) -> bool:
    return x <= 0 and x == int(x)


def mp_m_series(a, b, z):
    """Ascending series of M; unlike mp.hyp1f1 it does not fail on exact zeros."""
    a, b, z = mp.mpf(a), mp.mpf(b), mp.mpf(z)
    term = total = mp.mpf(1)
    k = 0
    while True:
        term = term * (a + k) / (b + k) * z / (k + 1)
        total += term
        k += 1
        if term == 0 or (k > abs(a) + abs(z) and abs(term) < mp.mpf(10) ** (-mp.mp.dps) * abs(total)):
            return total


def mp_hyperu(a, b, z) -> float:
    """U(a, b, z) to double precision, robust where mpmath's own routine gives up."""
    c = a - b + 1
    if _is_nonpositive_int(a) or _is_nonpositive_int(c):
        n = -int(a) if _is_nonpositive_int(a) else -int(c)
        A, B, Z = mp.mpf(a), mp.mpf(b), mp.mpf(z)
        s = mp.fsum(mp.rf(A, k) * mp.rf(A - B + 1, k) / mp.factorial(k) * (-1 / Z) ** k for k in range(n + 1))
        return float(Z ** (-A) * s)
    try:
        return float(mp.hyperu(a, b, z))
    except ValueError:
        with mp.workdps(80):
            A, B, Z = mp.mpf(a), mp.mpf(b), mp.mpf(z)
            v = mp.gamma(1 - B) * mp.rgamma(A - B + 1) * mp_m_series(A, B, Z) + mp.gamma(B - 1) * mp.rgamma(
                A
            ) * Z ** (1 - B) * mp_m_series(A - B + 1, 2 - B, Z)
            return float(v)


def mp_G(m, alpha, lam):
    m, alpha, lam = mp.mpf(m), mp.mpf(alpha), mp.mpf(lam)
    s = (m * m - lam * lam) / 4
    return (lam - m) * mp.gamma(alpha + s) * mp.rgamma(1 + s)


def mp_beta(m, alpha, gamma):
    m, alpha = mp.mpf(m), mp.mpf(alpha)
    return (mp.tan(mp.mpf(gamma) / 2) - m) * mp.gamma(alpha + m * m / 4 + mp.mpf(1) / 4) / mp.gamma(
        m * m / 4 + mp.mpf(5) / 4
    )


def mp_levels(m, alpha, gamma, lambda_max):
    """Eigenvalues of the critical channel by root-finding in mpmath on each half-branch."""
    beta = mp_beta(m, alpha, gamma)
    m2 = m * m
    poles = sorted(s * math.sqrt(m2 + 4 * alpha + 4 * n) for n in range(200) for s in (1, -1))
    zeros = sorted([m] + [s * math.sqrt(m2 + 4 + 4 * n) for n in range(200) for s in (1, -1)])
    out = []
    for lo, hi in zip(poles[:-1], poles[1:]):
        if hi < -lambda_max - 1 or lo > lambda_max + 1:
            continue
        z = next(v for v in zeros if lo < v < hi)
        left, right = (z, hi) if beta > 0 else (lo, z)
        if beta == 0:
            out.append(z)
            continue
        d = 1e-14 * max(1.0, abs(right - left))
        f = lambda x: mp_G(m, alpha, x) - beta
        root = mp.findroot(f, (mp.mpf(left) + d, mp.mpf(right) - d), solver="anderson")
        out.append(float(root))
    return sorted(v for v in out if abs(v) <= lambda_max)


@pytest.fixture(scope="session")
def mp_oracle():
    class _Oracle:
        hyperu = staticmethod(mp_hyperu)
        G = staticmethod(mp_G)
        beta = staticmethod(mp_beta)
        levels = staticmethod(mp_levels)

    return _Oracle


# one line per acceptance criterion, echoed again at the end of the session
_ACCEPTANCE_LINES: dict = {}


@pytest.fixture
def criterion():
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(_ACCEPTANCE_LINES[k])
