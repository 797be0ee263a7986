"""Eigenvalues of every channel.

Critical channel: G(lambda) increases monotonically from -inf to +inf between
consecutive poles +-sqrt(m^2 + 4 alpha + 4n), and each such branch contains
exactly one zero of G. Every branch therefore holds exactly one eigenvalue,
lying between the zero and the right-hand pole when beta > 0 and between the
left-hand pole and the zero when beta < 0. Branches are indexed by a signed
integer: 0 for the central branch (-sqrt(m^2+4a), sqrt(m^2+4a)) containing
lambda = m, k > 0 for (p_{k-1}, p_k) and -k for its mirror image.

Other channels have closed-form levels:

* alpha >= 1 (l < floor(kappa)): lambda = +-2 sqrt(m^2/4 + kappa + N), N >= -l,
* alpha <= 0 (l > floor(kappa)): lambda = +-2 sqrt(m^2/4 + N), N >= 0, where for
  N = 0 only lambda = +m has a normalisable eigenfunction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional

from .channel import (
    ChannelSpec,
    DomainError,
    PhysicalConfig,
    beta_of_gamma,
    g_of_lambda,
    pole_position,
    to_dimensionless,
    zero_position,
)
from .specfun import ExtendedReal

DEFAULT_TOL = 1e-10
DEFAULT_LAMBDA_MAX = 10.0
MAX_BISECTIONS = 200
NUDGE_EPS = 1e-12


class SpectrumError(RuntimeError):
    """Root bracketing or solving failed."""


class BracketInconsistency(SpectrumError):
    pass


class ConvergenceFailure(SpectrumError):
    pass


class BracketKind(enum.Enum):
    ZERO_TO_POLE = "ZeroToPole"
    POLE_TO_ZERO = "PoleToZero"
    AT_ZERO = "AtZero"
    AT_POLE = "AtPole"

    @property
    def degenerate(self) -> bool:
        return self in (BracketKind.AT_ZERO, BracketKind.AT_POLE)


class Source(enum.Enum):
    TRANSCENDENTAL = "Transcendental"
    CLOSED_FORM_BELOW = "ClosedFormBelow"
    CLOSED_FORM_ABOVE = "ClosedFormAbove"


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    kind: BracketKind
    branch: int = 0

    @property
    def half_width(self) -> float:
        return 0.5 * (self.hi - self.lo)


@dataclass(frozen=True)
class SpectralLine:
    """One eigenvalue.

    ``index`` is unique within a channel and increases with lambda: the
    branch index for the critical channel; for closed forms, +-n for
    +-sqrt(m^2+4n) above the flux (0 for lambda = m) and +-(n+1) below it.
    """

    lam: float
    channel: ChannelSpec
    index: int
    source: Source
    residual: float
    gamma: Optional[float] = None
    bracket: Optional[Bracket] = None
    energy: Optional[float] = None


# ---------------------------------------------------------------------------
# critical channel
# ---------------------------------------------------------------------------


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def _f(ch: ChannelSpec, beta: float, lam: float) -> float:
    return g_of_lambda(ch, lam) - beta


def _nudged_sign(ch: ChannelSpec, beta: float, pole: float, toward: float) -> int:
    """Sign of G - beta just inside an interval, next to a pole endpoint.

    G diverges at the pole, so the one-sided limit of G - beta has the sign of
    G itself there. The probe retreats from the pole by NUDGE_EPS * width,
    doubling until G evaluates finite.
    """
    width = toward - pole
    step = NUDGE_EPS * width
    while abs(step) < abs(width):
        g = g_of_lambda(ch, pole + step)
        if math.isfinite(g) and g != 0.0:
            return _sign(g)
        step *= 2.0
    raise BracketInconsistency(f"could not resolve the sign of G next to the pole {pole}")


def _point_sign(ch: ChannelSpec, beta: float, lam: float) -> int:
    return _sign(_f(ch, beta, lam))


def _branches(ch: ChannelSpec, lambda_max: float) -> list[tuple[int, float, float, float]]:
    """(index, left pole, zero, right pole) for branches meeting [-lambda_max, lambda_max]."""
    p0 = pole_position(ch, 0)
    out = [(0, -p0, ch.m, p0)]
    k = 1
    while pole_position(ch, k - 1) <= lambda_max:
        lo, hi = pole_position(ch, k - 1), pole_position(ch, k)
        z = zero_position(ch, k - 1)
        out.append((k, lo, z, hi))
        out.append((-k, -hi, -z, -lo))
        k += 1
    return sorted(out, key=lambda t: t[0])


def enumerate_brackets(ch: ChannelSpec, beta: ExtendedReal, lambda_max: float) -> list[Bracket]:
    """One bracket per eigenvalue that can lie in [-lambda_max, lambda_max].

    Brackets for branches cut by +-lambda_max are still returned whole; the
    caller drops roots beyond lambda_max after solving.
    """
    if not ch.is_critical:
        raise DomainError("brackets exist only for the critical channel")
    if lambda_max <= 0:
        return []
    beta = float(beta)
    branches = _branches(ch, lambda_max)
    out: list[Bracket] = []
    if math.isinf(beta):
        want_right = beta > 0
        for k, lo, z, hi in branches:
            p = hi if want_right else lo
            if abs(p) <= lambda_max:
                out.append(Bracket(p, p, BracketKind.AT_POLE, k))
        return sorted(out, key=lambda b: b.lo)
    if beta == 0.0:
        for k, lo, z, hi in branches:
            if abs(z) <= lambda_max:
                out.append(Bracket(z, z, BracketKind.AT_ZERO, k))
        return sorted(out, key=lambda b: b.lo)

    for k, lo, z, hi in branches:
        if hi < -lambda_max or lo > lambda_max:
            continue
        s_lo = _nudged_sign(ch, beta, lo, z)
        s_z = _point_sign(ch, beta, z)
        s_hi = _nudged_sign(ch, beta, hi, z)
        s_mid_left = _point_sign(ch, beta, 0.5 * (lo + z))
        s_mid_right = _point_sign(ch, beta, 0.5 * (z + hi))
        if s_z == 0:
            out.append(Bracket(z, z, BracketKind.AT_ZERO, k))
            continue
        left_change = s_lo != s_z
        right_change = s_z != s_hi
        if left_change == right_change:
            raise BracketInconsistency(
                f"branch {k} of channel l={ch.l}: sign pattern {s_lo},{s_z},{s_hi} "
                "does not certify exactly one root"
            )
        if right_change:
            if s_mid_left not in (s_lo, 0):
                raise BracketInconsistency(f"extra sign change in ({lo}, {z})")
            out.append(Bracket(z, hi, BracketKind.ZERO_TO_POLE, k))
        else:
            if s_mid_right not in (s_hi, 0):
                raise BracketInconsistency(f"extra sign change in ({z}, {hi})")
            out.append(Bracket(lo, z, BracketKind.POLE_TO_ZERO, k))
    expected = sum(1 for k, lo, z, hi in branches if not (hi < -lambda_max or lo > lambda_max))
    if len(out) != expected:
        raise BracketInconsistency(f"{len(out)} brackets for {expected} branches")
    return sorted(out, key=lambda b: b.lo)


def solve_bracket(
    ch: ChannelSpec,
    beta: ExtendedReal,
    br: Bracket,
    tol: float = DEFAULT_TOL,
    *,
    gamma: Optional[float] = None,
    max_iter: int = MAX_BISECTIONS,
) -> SpectralLine:
    """Bisection on G(lambda) - beta inside a certified bracket.

    Stops once the bracket is narrower than ``tol`` and either
    |G - beta| <= tol (1 + |beta|) or the midpoint can no longer move (near a
    pole with huge |beta| the residual target is below double resolution).
    """
    if br.kind.degenerate:
        return SpectralLine(br.lo, ch, br.branch, Source.TRANSCENDENTAL, 0.0, gamma, br)
    beta = float(beta)
    lo, hi = br.lo, br.hi
    if br.kind is BracketKind.ZERO_TO_POLE:
        s_lo = _point_sign(ch, beta, lo)
        s_hi = _nudged_sign(ch, beta, hi, lo)
    else:
        s_lo = _nudged_sign(ch, beta, lo, hi)
        s_hi = _point_sign(ch, beta, hi)
    if s_lo == s_hi or s_lo == 0 or s_hi == 0:
        raise BracketInconsistency(f"bracket [{lo}, {hi}] has no certified sign change")
    target = tol * (1.0 + abs(beta))
    best = None
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = _f(ch, beta, mid)
        if best is None or abs(fm) < best[1]:
            best = (mid, abs(fm))
        if fm == 0.0:
            return SpectralLine(mid, ch, br.branch, Source.TRANSCENDENTAL, 0.0, gamma, br)
        narrow = hi - lo <= tol
        if narrow and (abs(fm) <= target or mid in (lo, hi)):
            return SpectralLine(mid, ch, br.branch, Source.TRANSCENDENTAL, abs(fm), gamma, br)
        if mid in (lo, hi):
            break
        if _sign(fm) == s_lo:
            lo = mid
        else:
            hi = mid
    raise ConvergenceFailure(
        f"bisection in [{br.lo}, {br.hi}] did not converge in {max_iter} iterations "
        f"(best residual {best[1] if best else float('nan')})"
    )


def spectrum_critical(
    ch: ChannelSpec,
    gamma: float,
    lambda_max: float = DEFAULT_LAMBDA_MAX,
    tol: float = DEFAULT_TOL,
) -> list[SpectralLine]:
    """All eigenvalues with |lambda| <= lambda_max of the gamma extension."""
    beta = beta_of_gamma(ch, gamma)
    lines = []
    for br in enumerate_brackets(ch, beta, lambda_max):
        line = solve_bracket(ch, beta, br, tol, gamma=gamma)
        if abs(line.lam) <= lambda_max:
            lines.append(line)
    return sorted(lines, key=lambda ln: ln.lam)


def paper_interval(ch: ChannelSpec, beta: float, lam: float) -> Optional[tuple[float, float]]:
    """The indexed containment interval for a transcendental root, if one applies.

    These are the published inequalities, indexed by N. For beta > 0 they do
    not cover the central root in (m, sqrt(m^2+4 alpha)); None is returned
    there (and for beta = 0 or infinite).
    """
    m2, a = ch.m * ch.m, ch.alpha
    if not math.isfinite(beta) or beta == 0:
        return None
    if beta > 0:
        if lam > ch.m:
            # sqrt(m^2+4(N+1)) < lam < sqrt(m^2+4(alpha+N+1)), N >= 0
            for n in range(0, 100_000):
                lo, hi = math.sqrt(m2 + 4 * (n + 1)), math.sqrt(m2 + 4 * (a + n + 1))
                if lo > lam:
                    return None
                if lam < hi:
                    return (lo, hi)
            return None
        # -sqrt(m^2-4N) < lam < -sqrt(m^2+4(alpha-N-1)), N <= -1
        for n in range(-1, -100_000, -1):
            lo, hi = -math.sqrt(m2 - 4 * n), -math.sqrt(m2 + 4 * (a - n - 1))
            if hi < lam:
                return None
            if lam > lo:
                return (lo, hi)
        return None
    if lam > ch.m:
        # sqrt(m^2+4(alpha+N-1)) < lam < sqrt(m^2+4N), N >= 1
        for n in range(1, 100_000):
            lo, hi = math.sqrt(m2 + 4 * (a + n - 1)), math.sqrt(m2 + 4 * n)
            if lo > lam:
                return None
            if lam < hi:
                return (lo, hi)
        return None
    p0 = math.sqrt(m2 + 4 * a)
    if lam > -p0:
        return (-p0, ch.m)
    # -sqrt(m^2+4(alpha-N)) < lam < -sqrt(m^2-4N), N <= -1
    for n in range(-1, -100_000, -1):
        lo, hi = -math.sqrt(m2 + 4 * (a - n)), -math.sqrt(m2 - 4 * n)
        if hi < lam:
            return None
        if lam > lo:
            return (lo, hi)
    return None


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def closed_form_level(ch: ChannelSpec, n: int, sign: int = 1) -> float:
    """Closed-form eigenvalue of polynomial degree n in a non-critical channel."""
    if ch.regime == "below":
        big_n = n - ch.l
        return sign * 2.0 * math.sqrt(ch.m * ch.m / 4.0 + ch.kappa + big_n)
    if ch.regime == "above":
        return sign * 2.0 * math.sqrt(ch.m * ch.m / 4.0 + n)
    raise DomainError("closed forms do not apply to the critical channel")


def _defect(ch: ChannelSpec, lam: float, n: int) -> float:
    shift = 0.25 * (ch.m * ch.m - lam * lam)
    if ch.regime == "below":
        return abs(shift + ch.alpha + n)
    return abs(shift + n)


def spectrum_closed_form(ch: ChannelSpec, lambda_max: float = DEFAULT_LAMBDA_MAX) -> list[SpectralLine]:
    """Closed-form levels of an essentially self-adjoint channel up to lambda_max."""
    if ch.is_critical:
        raise DomainError(
            f"channel l={ch.l} is critical (alpha={ch.alpha}); use spectrum_critical"
        )
    lines = []
    if ch.regime == "below":
        src = Source.CLOSED_FORM_BELOW
        n = 0
        while (lam := closed_form_level(ch, n)) <= lambda_max:
            for s in (1, -1):
                v = s * lam
                lines.append(SpectralLine(v, ch, s * (n + 1), src, _defect(ch, v, n)))
            n += 1
    else:
        src = Source.CLOSED_FORM_ABOVE
        if ch.m <= lambda_max:
            lines.append(SpectralLine(closed_form_level(ch, 0), ch, 0, src, 0.0))
        n = 1
        while (lam := closed_form_level(ch, n)) <= lambda_max:
            for s in (1, -1):
                v = s * lam
                lines.append(SpectralLine(v, ch, s * n, src, _defect(ch, v, n)))
            n += 1
    return sorted(lines, key=lambda ln: ln.lam)


def channel_spectrum(
    ch: ChannelSpec,
    gamma: Optional[float],
    lambda_max: float = DEFAULT_LAMBDA_MAX,
    tol: float = DEFAULT_TOL,
) -> list[SpectralLine]:
    if ch.is_critical:
        if gamma is None:
            raise DomainError("the critical channel needs an extension angle gamma")
        return spectrum_critical(ch, gamma, lambda_max, tol)
    return spectrum_closed_form(ch, lambda_max)


def full_spectrum(
    cfg: PhysicalConfig,
    gamma: float,
    l_range: Iterable[int],
    lambda_max: float = DEFAULT_LAMBDA_MAX,
    tol: float = DEFAULT_TOL,
) -> list[SpectralLine]:
    """Merged spectrum over channels, each line carrying E = sqrt(Omega) lambda."""
    if not (-math.pi < gamma <= math.pi + 1e-15):
        raise DomainError(f"gamma={gamma} outside (-pi, pi]")
    lines = []
    for l in l_range:
        ch = to_dimensionless(cfg, l)
        for ln in channel_spectrum(ch, gamma, lambda_max, tol):
            lines.append(replace(ln, energy=cfg.energy_scale * ln.lam))
    return sorted(lines, key=lambda ln: (ln.energy, ln.channel.l, ln.index))
