"""Independent checks of eigenpairs.

The radial equations become a real first-order system under v = -i chi:

    u' = -(alpha/x + x) u + (lambda + m) v
    v' = ((alpha - 1)/x + x) v - (lambda - m) u

``residual`` measures how well a constructed spinor satisfies it (analytic and
finite-difference derivatives). ``shoot`` re-finds eigenvalues by integrating
this system outward from a small-x Frobenius start and inward from a
Gaussian-decaying start, matching at x_m. Shooting uses only ``math.gamma``
and scipy's DOP853 integrator, never the Kummer evaluators.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.integrate import ode
from scipy.optimize import brentq

from .channel import ChannelSpec, DomainError, pole_position, zero_position
from .eigenfunction import (
    Form,
    RadialSpinor,
    boundary_functional,
    build,
    build_trial,
    norm_squared,
)
from .spectrum import SpectralLine, closed_form_level

X_START = 1e-4
X_END = 12.0
X_MATCH = 2.0
SHOOT_RTOL = 1e-12
BOUNDARY_SAMPLES = (1e-2, 1e-3, 1e-4, 1e-5)
MAX_STEPS = 200_000


class OracleError(RuntimeError):
    pass


class NoSignChange(OracleError):
    """The shooting mismatch does not change sign across the window."""


class StiffnessError(OracleError):
    """The integrator could not advance (step size underflow)."""


@dataclass(frozen=True)
class RealodeState:
    """A point (x, u = phi, v = -i chi) of the real radial system."""

    x: float
    u: float
    v: float

    def derivative(self, ch: ChannelSpec, lam: float) -> tuple[float, float]:
        return _rhs(self.x, (self.u, self.v), ch.alpha, ch.m, lam)


def _rhs(x, y, alpha, m, lam):
    u, v = y
    return (-(alpha / x + x) * u + (lam + m) * v, ((alpha - 1.0) / x + x) * v - (lam - m) * u)


@dataclass(frozen=True)
class Thresholds:
    """Pass/fail limits for a VerificationReport."""

    residual: float = 1e-6
    derivative: float = 1e-7
    shooting: float = 1e-6
    boundary: float = 1e-4
    normalization: float = 1e-8
    # "extrapolated" judges the x -> 0 limit of W; "raw" judges |W(1e-5)| itself.
    boundary_mode: str = "extrapolated"


@dataclass(frozen=True)
class ResidualReport:
    ode_residual_max: float
    ode_residual_l2: float
    fd_residual_max: float
    derivative_mismatch: float


@dataclass
class VerificationReport:
    lam: float
    l: int
    ode_residual_max: float
    ode_residual_l2: float
    fd_residual_max: float
    derivative_mismatch: float
    shooting_lambda: Optional[float]
    shooting_delta: Optional[float]
    boundary_limit_estimate: float
    boundary_limit_extrapolated: float
    boundary_samples: list[float]
    normalization: float
    thresholds: Thresholds = field(default_factory=Thresholds)
    errors: list[str] = field(default_factory=list)

    @property
    def failures(self) -> list[str]:
        t = self.thresholds
        out = list(self.errors)
        if not self.ode_residual_max <= t.residual:
            out.append(f"ode residual {self.ode_residual_max:.3e} > {t.residual:.0e}")
        if not self.fd_residual_max <= t.residual:
            out.append(f"finite-difference residual {self.fd_residual_max:.3e} > {t.residual:.0e}")
        if not self.derivative_mismatch <= t.derivative:
            out.append(f"derivative mismatch {self.derivative_mismatch:.3e} > {t.derivative:.0e}")
        if self.shooting_delta is None or not self.shooting_delta <= t.shooting:
            out.append(f"shooting delta {self.shooting_delta} > {t.shooting:.0e}")
        b = self.boundary_limit_extrapolated if t.boundary_mode == "extrapolated" else self.boundary_limit_estimate
        if not b <= t.boundary:
            out.append(f"boundary limit {b:.3e} > {t.boundary:.0e} ({t.boundary_mode})")
        if not self.normalization <= t.normalization:
            out.append(f"normalisation defect {self.normalization:.3e} > {t.normalization:.0e}")
        return out

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        d = asdict(self)
        d["thresholds"] = asdict(self.thresholds)
        d["passed"] = self.passed
        d["failures"] = self.failures
        return d


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------


def _fd5(psi: RadialSpinor, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = 1e-3 * np.minimum(x, 1.0)
    cols = [psi.evaluate(x + k * h) for k in (-2, -1, 1, 2)]
    out = []
    for comp in (0, 1):
        fm2, fm1, fp1, fp2 = (c[comp] for c in cols)
        out.append((fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h))
    return out[0], out[1]


def _defects(ch: ChannelSpec, lam: float, x, u, v, du, dv):
    a_u = (ch.alpha / x + x) * u
    b_u = (lam + ch.m) * v
    r_u = du + a_u - b_u
    s_u = np.abs(du) + np.abs(a_u) + np.abs(b_u)
    a_v = ((ch.alpha - 1.0) / x + x) * v
    b_v = (lam - ch.m) * u
    r_v = dv - a_v + b_v
    s_v = np.abs(dv) + np.abs(a_v) + np.abs(b_v)
    return r_u, s_u, r_v, s_v


def _scaled(r: np.ndarray, s: np.ndarray) -> np.ndarray:
    tiny = np.finfo(float).tiny
    return np.where(s > tiny, np.abs(r) / np.maximum(s, tiny), np.abs(r))


def residual(psi: RadialSpinor, lam: Optional[float] = None, x: Optional[Sequence[float]] = None) -> ResidualReport:
    """Scaled defects of the radial system on the spinor's grid.

    Each defect is divided by the sum of magnitudes of the terms in its own row,
    so a value of 1e-6 means six digits of cancellation. The two smallest grid
    points are skipped. ``lam`` overrides the eigenvalue used in the equations
    (negative controls); the default is the spinor's own.
    """
    lam = psi.lam if lam is None else float(lam)
    xs = psi.grid[2:] if x is None else np.asarray(x, dtype=float)
    u, v = psi.evaluate(xs)
    du, dv = psi.derivatives(xs)
    r_u, s_u, r_v, s_v = _defects(psi.channel, lam, xs, u, v, du, dv)
    rel = np.concatenate([_scaled(r_u, s_u), _scaled(r_v, s_v)])
    fdu, fdv = _fd5(psi, xs)
    fr_u, fs_u, fr_v, fs_v = _defects(psi.channel, lam, xs, u, v, fdu, fdv)
    fd_rel = np.concatenate([_scaled(fr_u, fs_u), _scaled(fr_v, fs_v)])
    mism = np.concatenate([_scaled(fdu - du, s_u), _scaled(fdv - dv, s_v)])
    return ResidualReport(
        ode_residual_max=float(np.max(rel)) if rel.size else 0.0,
        ode_residual_l2=float(np.sqrt(np.mean(rel**2))) if rel.size else 0.0,
        fd_residual_max=float(np.max(fd_rel)) if fd_rel.size else 0.0,
        derivative_mismatch=float(np.max(mism)) if mism.size else 0.0,
    )


# ---------------------------------------------------------------------------
# shooting
# ---------------------------------------------------------------------------


def _frobenius(ch: ChannelSpec, lam: float, x: float, A: float, B: float) -> tuple[float, float]:
    """A S1 + B S2 at x, from two terms of each Frobenius series.

    S1: u = x^-alpha (1 + d x^2), v = c x^(1-alpha)
    S2: u = f x^alpha,            v = x^(alpha-1) (1 + e x^2)
    """
    al, m = ch.alpha, ch.m
    u = v = 0.0
    if A != 0.0:
        c = -(lam - m) / (2.0 * (1.0 - al))
        d = 0.5 * (-1.0 + (lam + m) * c)
        u += A * x ** (-al) * (1.0 + d * x * x)
        v += A * c * x ** (1.0 - al)
    if B != 0.0:
        f = (lam + m) / (2.0 * al)
        e = 0.5 * (1.0 - (lam - m) * f)
        u += B * f * x**al
        v += B * x ** (al - 1.0) * (1.0 + e * x * x)
    return u, v


def _boundary_mixture(ch: ChannelSpec, gamma_ext: float) -> tuple[float, float]:
    """Coefficients of the singular powers x^-alpha and x^(alpha-1) required by extension gamma."""
    al, m2 = ch.alpha, ch.m * ch.m
    c, s = math.cos(0.5 * gamma_ext), math.sin(0.5 * gamma_ext)
    A = c * math.gamma(al) / math.gamma(al + 0.25 * (m2 + 1.0))
    B = 0.5 * (s - ch.m * c) * math.gamma(1.0 - al) / math.gamma(0.25 * (m2 + 5.0))
    return A, B


def _start(ch: ChannelSpec, gamma_ext: Optional[float], lam: float, x0: float) -> np.ndarray:
    if ch.is_critical:
        if gamma_ext is None:
            raise DomainError("the critical channel needs an extension angle")
        A, B = _boundary_mixture(ch, gamma_ext)
    elif ch.alpha <= 0:
        A, B = 1.0, 0.0
    else:
        A, B = 0.0, 1.0
    y = np.array(_frobenius(ch, lam, x0, A, B))
    return y / np.hypot(*y)


def _integrate(ch: ChannelSpec, lam: float, y0: np.ndarray, x_from: float, x_to: float, rtol: float) -> np.ndarray:
    # in t = ln x the power-law behaviour at the origin is a plain exponential
    al, m = ch.alpha, ch.m

    def rhs_log(t, y):
        x = math.exp(t)
        u, v = y
        return [-(al + x * x) * u + x * (lam + m) * v, (al - 1.0 + x * x) * v - x * (lam - m) * u]

    r = ode(rhs_log)
    r.set_integrator("dop853", rtol=rtol, atol=1e-300, nsteps=MAX_STEPS)
    r.set_initial_value(y0, math.log(x_from))
    y = r.integrate(math.log(x_to))
    if not r.successful() or not np.all(np.isfinite(y)):
        raise StiffnessError(
            f"integration {x_from} -> {x_to} failed at lambda={lam} (return code {r.get_return_code()})"
        )
    return y


def mismatch(
    ch: ChannelSpec,
    gamma_ext: Optional[float],
    lam: float,
    *,
    rtol: float = SHOOT_RTOL,
    x_start: float = X_START,
    x_end: float = X_END,
    x_match: float = X_MATCH,
) -> float:
    """sin of the angle between the outward and inward solutions at x_match."""
    y_out = _integrate(ch, lam, _start(ch, gamma_ext, lam, x_start), x_start, x_match, rtol)
    # e^{-x^2/2} branch: v ~ (lambda - m) / (2x) u for large x
    y_end = np.array([1.0, 0.5 * (lam - ch.m) / x_end])
    y_in = _integrate(ch, lam, y_end / np.hypot(*y_end), x_end, x_match, rtol)
    det = y_out[0] * y_in[1] - y_out[1] * y_in[0]
    return float(det / (np.hypot(*y_out) * np.hypot(*y_in)))


def shoot(
    ch: ChannelSpec,
    gamma_or_regime: Union[float, None, str],
    lambda_guess: float,
    lambda_window: tuple[float, float],
    *,
    rtol: float = SHOOT_RTOL,
    x_match: float = X_MATCH,
    xtol: float = 1e-13,
) -> float:
    """Eigenvalue in ``lambda_window`` located by shooting.

    ``gamma_or_regime`` is the extension angle for the critical channel and
    None (or any string) for an essentially self-adjoint channel.
    """
    gamma_ext = gamma_or_regime if isinstance(gamma_or_regime, (int, float)) else None
    lo, hi = lambda_window
    if not lo <= lambda_guess <= hi:
        raise DomainError(f"guess {lambda_guess} outside window [{lo}, {hi}]")

    def f(lam):
        return mismatch(ch, gamma_ext, lam, rtol=rtol, x_match=x_match)

    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise NoSignChange(
            f"no sign change of the shooting mismatch on [{lo}, {hi}] (l={ch.l}, gamma={gamma_ext})"
        )
    return brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)


def _neighbours(values: list[float], lam: float) -> tuple[float, float]:
    below = [v for v in values if v < lam - 1e-12]
    above = [v for v in values if v > lam + 1e-12]
    return (max(below) if below else -math.inf, min(above) if above else math.inf)


def shooting_window(line: SpectralLine, max_half_width: float = 0.1) -> tuple[float, float]:
    """A window around ``line.lam`` that contains no other level of its channel."""
    ch, lam = line.channel, line.lam
    reach = abs(lam) + 2.0 * max_half_width + 4.0
    if ch.is_critical:
        h = max_half_width
        if line.bracket is not None and not line.bracket.kind.degenerate:
            h = min(h, line.bracket.half_width)
        n_max = int(reach * reach / 4.0) + 2
        poles = [s * pole_position(ch, n) for n in range(n_max) for s in (1, -1)]
        zeros = [ch.m] + [s * zero_position(ch, n) for n in range(n_max) for s in (1, -1)]
        on_pole = any(abs(lam - p) <= 1e-12 * max(1.0, abs(p)) for p in poles)
        lo_b, hi_b = _neighbours(zeros if on_pole else poles, lam)
    else:
        n_max = int(reach * reach / 4.0) + 2
        levels = []
        for n in range(n_max):
            for s in (1, -1):
                if ch.regime == "above" and n == 0 and s < 0:
                    continue
                levels.append(closed_form_level(ch, n, s))
        lo_n, hi_n = _neighbours(levels, lam)
        h = min(max_half_width, 0.45 * (lam - lo_n), 0.45 * (hi_n - lam))
        lo_b, hi_b = lo_n, hi_n
    margin = 1e-9
    return max(lam - h, lo_b + margin), min(lam + h, hi_b - margin)


# ---------------------------------------------------------------------------
# aggregate
# ---------------------------------------------------------------------------


def boundary_estimates(psi: RadialSpinor, gamma_ext: float, samples: Sequence[float] = BOUNDARY_SAMPLES) -> tuple[list[float], float, float]:
    """(W samples, |W| at the smallest x, |extrapolated W(0+)|).

    W approaches its limit like x^p with p = 2 min(alpha, 1 - alpha), or
    p = 2 alpha on a pole level where the x^-alpha part of phi is absent; two
    samples a decade apart eliminate that term.
    """
    w = boundary_functional(psi, gamma_ext, samples)
    al = psi.channel.alpha
    p = 2.0 * al if psi.smallx.c_phi != 0.0 and psi.smallx.p_phi > 0 else 2.0 * min(al, 1.0 - al)
    r = (samples[-1] / samples[-2]) ** p
    w0 = (w[-1] - r * w[-2]) / (1.0 - r)
    return w, abs(w[-1]), abs(w0)


def origin_estimates(psi: RadialSpinor, samples: Sequence[float] = BOUNDARY_SAMPLES) -> tuple[list[float], float, float]:
    """(|psi| samples, |psi| at the smallest x, |extrapolated psi(0+)|) for closed-form spinors.

    Each component behaves like c x^p near the origin, so two samples a decade
    apart give its limit; the result is zero up to roundoff whenever p > 0,
    even when |psi(1e-5)| itself is still sizeable because p is small.
    """
    xs = np.asarray(samples, dtype=float)
    phi, chi = psi.evaluate(xs)
    sx = psi.smallx
    lims = []
    for comp, p in ((phi, sx.p_phi), (chi, sx.p_chi)):
        r = (xs[-1] / xs[-2]) ** p if p != 0 else 1.0
        lims.append(comp[-1] if r == 1.0 else (comp[-1] - r * comp[-2]) / (1.0 - r))
    mags = [float(v) for v in np.hypot(phi, chi)]
    return mags, mags[-1], float(math.hypot(*lims))


def verify_line(
    line: SpectralLine,
    gamma: Optional[float] = None,
    *,
    perturb: float = 0.0,
    thresholds: Thresholds = Thresholds(),
    rtol: float = SHOOT_RTOL,
) -> VerificationReport:
    """Residual, shooting and boundary checks for one spectral line.

    ``gamma`` is the extension used for the checks; passing one that differs
    from the line's own gives a negative control. ``perturb`` shifts lambda
    before building the eigenfunction, which must make the residual fail.
    """
    ch = line.channel
    if ch.is_critical and gamma is None:
        gamma = line.gamma
    if ch.is_critical and gamma is None:
        raise DomainError("critical-channel lines need gamma")
    errors: list[str] = []

    if perturb:
        psi = build_trial(ch, line.lam + perturb)
        res = residual(psi, lam=line.lam)
        norm_defect = abs(norm_squared(psi) - 1.0) if ch.is_critical else float("nan")
    else:
        psi = build(ch, line.lam)
        res = residual(psi)
        norm_defect = abs(norm_squared(psi) - 1.0)

    if psi.form is Form.CRITICAL_U:
        w, w_raw, w_lim = boundary_estimates(psi, gamma)
    else:
        w, w_raw, w_lim = origin_estimates(psi)

    shoot_lam = delta = None
    try:
        lo, hi = shooting_window(line)
        shoot_lam = shoot(ch, gamma if ch.is_critical else None, line.lam, (lo, hi), rtol=rtol)
        delta = abs(shoot_lam - line.lam)
    except OracleError as exc:
        errors.append(str(exc))

    return VerificationReport(
        lam=line.lam,
        l=ch.l,
        ode_residual_max=res.ode_residual_max,
        ode_residual_l2=res.ode_residual_l2,
        fd_residual_max=res.fd_residual_max,
        derivative_mismatch=res.derivative_mismatch,
        shooting_lambda=shoot_lam,
        shooting_delta=delta,
        boundary_limit_estimate=w_raw,
        boundary_limit_extrapolated=w_lim,
        boundary_samples=w,
        normalization=norm_defect,
        thresholds=thresholds,
        errors=errors,
    )
