"""Radial eigenspinors (phi, chi) for every channel.

Storage convention: the lower component carries a factor i in the complex
radial system, so arrays hold chi_stored = -i chi (real). A global phase does
not change |psi|^2, the spectrum, or whether the boundary functional vanishes,
and the same convention is applied to the reference pair used there.

Forms, with z = x^2, a = (m^2 - lambda^2)/4 and e(x) = exp(-x^2/2):

* CriticalU (0 < alpha < 1):
      phi = e x^-alpha U(a, 1-alpha, z)
      chi = (lambda-m)/2 e x^(1-alpha) U(a+1, 2-alpha, z)
* AboveM (alpha <= 0), a = -n:
      phi = e x^-alpha M(-n, 1-alpha, z)
      chi = (m-lambda)/(2(1-alpha)) e x^(1-alpha) M(1-n, 2-alpha, z)
* BelowM (alpha >= 1), a + alpha = -n:
      phi = e x^alpha M(-n, 1+alpha, z)
      chi = 2/(m+lambda) e x^(alpha-1) [alpha M(-n, 1+alpha, z) - n/(1+alpha) z M(1-n, 2+alpha, z)]
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .channel import ChannelSpec, DomainError
from .specfun import gamma, gamma_ratio, kummer_m, kummer_u, rgamma
from .spectrum import closed_form_level

NEAR_ZERO_CUT = 1e-10
QUAD_ORDER = 20
GEOMETRIC_RATIO = 2.0
PANEL_WIDTH = 0.5
CLOSED_FORM_LAMBDA_TOL = 1e-8


class EigenfunctionError(RuntimeError):
    pass


class RegimeError(EigenfunctionError, DomainError):
    """lambda is not a closed-form eigenvalue of the channel."""


class NormalizationError(EigenfunctionError):
    pass


class Form(enum.Enum):
    CRITICAL_U = "CriticalU"
    BELOW_M = "BelowM"
    ABOVE_M = "AboveM"


@dataclass(frozen=True)
class SmallX:
    """Leading behaviour phi ~ c_phi x^p_phi, chi ~ c_chi x^p_chi as x -> 0+."""

    c_phi: float
    p_phi: float
    c_chi: float
    p_chi: float


def default_grid() -> np.ndarray:
    """60 geometric points on [1e-6, 1], then 240 uniform points up to x = 12."""
    geo = np.geomspace(1e-6, 1.0, 60)
    uni = np.linspace(1.0, 12.0, 241)[1:]
    return np.concatenate([geo, uni])


# ---------------------------------------------------------------------------
# component models (unnormalised)
# ---------------------------------------------------------------------------


class _Model:
    """Analytic (phi, chi) of one form, with derivatives and small-x terms."""

    form: Form

    def values(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def derivatives(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def expansion(self) -> tuple[list[tuple[float, float]], list[tuple[float, float]]]:
        """(coef, power) terms of phi and chi near x = 0, leading first."""
        raise NotImplementedError


def _snap_level(a: float, alpha: float, tol: float) -> float:
    """Move a onto -n - alpha or -n - 1 when rounding in lambda**2 left it just off.

    At those points one of the two small-x coefficients vanishes exactly, which
    a residual of order 1e-16 would otherwise hide.
    """
    for shift in (alpha, 1.0):
        t = a + shift
        n = round(t)
        if n <= 0 and abs(t - n) <= tol:
            return n - shift
    return a


class _CriticalModel(_Model):
    form = Form.CRITICAL_U

    def __init__(self, ch: ChannelSpec, lam: float):
        self.alpha = ch.alpha
        self.lam = lam
        self.m = ch.m
        self.a = _snap_level(0.25 * (ch.m * ch.m - lam * lam), ch.alpha, 1e-12 * (1.0 + lam * lam))
        self.pref = 0.5 * (lam - ch.m)

    def values(self, x):
        al, a = self.alpha, self.a
        z = x * x
        env = np.exp(-0.5 * z)
        phi = env * x ** (-al) * kummer_u(a, 1.0 - al, z)
        if self.pref == 0.0:
            return phi, np.zeros_like(x)
        chi = self.pref * env * x ** (1.0 - al) * kummer_u(a + 1.0, 2.0 - al, z)
        return phi, chi

    def derivatives(self, x):
        al, a = self.alpha, self.a
        z = x * x
        env = np.exp(-0.5 * z)
        u0 = kummer_u(a, 1.0 - al, z)
        u1 = kummer_u(a + 1.0, 2.0 - al, z)
        phi = env * x ** (-al) * u0
        dphi = -(x + al / x) * phi + 2.0 * x * env * x ** (-al) * (-a * u1)
        if self.pref == 0.0:
            return dphi, np.zeros_like(x)
        g = env * x ** (1.0 - al)
        du1 = 0.0 if a + 1.0 == 0 else -(a + 1.0) * kummer_u(a + 2.0, 3.0 - al, z)
        dchi = self.pref * ((-x + (1.0 - al) / x) * g * u1 + g * 2.0 * x * du1)
        return dphi, dchi

    def expansion(self):
        al, a = self.alpha, self.a
        phi_terms = [(gamma_ratio(al, a + al), -al), (gamma(-al) * rgamma(a), al)]
        if self.pref == 0.0:
            chi_terms = [(0.0, al - 1.0)]
        else:
            chi_terms = [
                (self.pref * gamma_ratio(1.0 - al, 1.0 + a), al - 1.0),
                (self.pref * gamma(al - 1.0) * rgamma(a + al), 1.0 - al),
            ]
        return phi_terms, chi_terms


class _AboveModel(_Model):
    form = Form.ABOVE_M

    def __init__(self, ch: ChannelSpec, lam: float, n: int):
        self.alpha = ch.alpha
        self.n = n
        self.pref = (ch.m - lam) / (2.0 * (1.0 - ch.alpha))

    def values(self, x):
        al, n = self.alpha, self.n
        z = x * x
        env = np.exp(-0.5 * z)
        phi = env * x ** (-al) * kummer_m(-n, 1.0 - al, z)
        if n == 0:
            return phi, np.zeros_like(x)
        chi = self.pref * env * x ** (1.0 - al) * kummer_m(1.0 - n, 2.0 - al, z)
        return phi, chi

    def derivatives(self, x):
        al, n = self.alpha, self.n
        z = x * x
        env = np.exp(-0.5 * z)
        phi = env * x ** (-al) * kummer_m(-n, 1.0 - al, z)
        if n == 0:
            return -(x + al / x) * phi, np.zeros_like(x)
        m1 = kummer_m(1.0 - n, 2.0 - al, z)
        dphi = -(x + al / x) * phi + 2.0 * x * env * x ** (-al) * (-n / (1.0 - al)) * m1
        g = env * x ** (1.0 - al)
        dm1 = 0.0 if n == 1 else (1.0 - n) / (2.0 - al) * kummer_m(2.0 - n, 3.0 - al, z)
        dchi = self.pref * ((-x + (1.0 - al) / x) * g * m1 + g * 2.0 * x * dm1)
        return dphi, dchi

    def expansion(self):
        al = self.alpha
        c_chi = self.pref if self.n > 0 else 0.0
        return [(1.0, -al)], [(c_chi, 1.0 - al)]


class _BelowModel(_Model):
    form = Form.BELOW_M

    def __init__(self, ch: ChannelSpec, lam: float, n: int):
        self.alpha = ch.alpha
        self.n = n
        self.pref = 2.0 / (ch.m + lam)

    def _bracket(self, z):
        al, n = self.alpha, self.n
        m0 = kummer_m(-n, 1.0 + al, z)
        if n == 0:
            return m0, al * m0, 0.0 * z
        m1 = kummer_m(1.0 - n, 2.0 + al, z)
        c = -n / (1.0 + al)
        br = al * m0 + c * z * m1
        dm0 = c * m1
        dm1 = 0.0 if n == 1 else (1.0 - n) / (2.0 + al) * kummer_m(2.0 - n, 3.0 + al, z)
        dbr = al * dm0 + c * (m1 + z * dm1)
        return m0, br, dbr

    def values(self, x):
        al = self.alpha
        z = x * x
        env = np.exp(-0.5 * z)
        m0, br, _ = self._bracket(z)
        return env * x ** al * m0, self.pref * env * x ** (al - 1.0) * br

    def derivatives(self, x):
        al, n = self.alpha, self.n
        z = x * x
        env = np.exp(-0.5 * z)
        m0, br, dbr = self._bracket(z)
        phi = env * x ** al * m0
        dm0 = 0.0 if n == 0 else (-n / (1.0 + al)) * kummer_m(1.0 - n, 2.0 + al, z)
        dphi = (al / x - x) * phi + env * x ** al * 2.0 * x * dm0
        g = env * x ** (al - 1.0)
        dchi = self.pref * (((al - 1.0) / x - x) * g * br + g * 2.0 * x * dbr)
        return dphi, dchi

    def expansion(self):
        al = self.alpha
        return [(1.0, al)], [(self.pref * al, al - 1.0)]


# ---------------------------------------------------------------------------
# spinor
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadialSpinor:
    """A sampled radial eigenspinor; ``evaluate`` gives it anywhere on (0, inf)."""

    channel: ChannelSpec
    lam: float
    form: Form
    grid: np.ndarray
    phi_values: np.ndarray
    chi_values: np.ndarray
    norm: float
    smallx: SmallX
    scale: float = 1.0
    _model: _Model = field(default=None, repr=False)

    def evaluate(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        phi, chi = self._model.values(np.atleast_1d(x))
        phi, chi = self.scale * phi, self.scale * chi
        if x.ndim == 0:
            return phi[0], chi[0]
        return phi, chi

    def derivatives(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Analytic x-derivatives from the Kummer derivative relations."""
        x = np.asarray(x, dtype=float)
        dphi, dchi = self._model.derivatives(np.atleast_1d(x))
        dphi, dchi = self.scale * dphi, self.scale * dchi
        if x.ndim == 0:
            return dphi[0], dchi[0]
        return dphi, dchi

    def expansion(self) -> tuple[list[tuple[float, float]], list[tuple[float, float]]]:
        phi_terms, chi_terms = self._model.expansion()
        s = self.scale
        return [(s * c, p) for c, p in phi_terms], [(s * c, p) for c, p in chi_terms]

    def scaled(self, factor: float) -> "RadialSpinor":
        """The same spinor multiplied by a constant (norm field unchanged)."""
        return _sample(self, self.scale * factor, self.norm)


def _leading(terms: list[tuple[float, float]]) -> tuple[float, float]:
    for c, p in terms:
        if c != 0.0:
            return c, p
    return 0.0, terms[0][1]


def _sample(psi: RadialSpinor, scale: float, norm: float) -> RadialSpinor:
    phi, chi = psi._model.values(psi.grid)
    phi_terms, chi_terms = psi._model.expansion()
    cp, pp = _leading(phi_terms)
    cc, pc = _leading(chi_terms)
    return replace(
        psi,
        phi_values=scale * phi,
        chi_values=scale * chi,
        scale=scale,
        norm=norm,
        smallx=SmallX(scale * cp, pp, scale * cc, pc),
    )


def _assemble(ch: ChannelSpec, lam: float, model: _Model, grid, normalise: bool) -> RadialSpinor:
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing positive reals")
    psi = RadialSpinor(
        channel=ch,
        lam=float(lam),
        form=model.form,
        grid=grid,
        phi_values=np.empty(0),
        chi_values=np.empty(0),
        norm=1.0,
        smallx=SmallX(0.0, 0.0, 0.0, 0.0),
        scale=1.0,
        _model=model,
    )
    psi = _sample(psi, 1.0, 1.0)
    return normalize(psi) if normalise else psi


def build_critical(ch: ChannelSpec, lam: float, grid=None, *, normalise: bool = True) -> RadialSpinor:
    """The square-integrable U-type solution of the critical channel at ``lam``.

    It solves the radial equations for any lambda; lambda is an eigenvalue of
    the gamma extension only when it also meets that extension's boundary
    condition (see ``boundary_functional``).
    """
    if not ch.is_critical:
        raise DomainError(f"channel l={ch.l} is not critical (alpha={ch.alpha})")
    return _assemble(ch, lam, _CriticalModel(ch, float(lam)), grid, normalise)


def _closed_form_degree(ch: ChannelSpec, lam: float) -> int:
    shift = 0.25 * (lam * lam - ch.m * ch.m)
    n = round(shift - ch.alpha) if ch.regime == "below" else round(shift)
    sign = 1 if lam >= 0 else -1
    if n < 0 or abs(closed_form_level(ch, n, sign) - lam) > CLOSED_FORM_LAMBDA_TOL:
        raise RegimeError(
            f"lambda={lam} is not a closed-form eigenvalue of channel l={ch.l}; "
            "the Kummer M factor would not terminate and the spinor would not be normalisable"
        )
    if ch.regime == "above" and n == 0 and sign < 0 and ch.m > 0:
        raise RegimeError(f"lambda=-m={lam} has no normalisable eigenfunction for alpha <= 0")
    return int(n)


def build_noncritical(ch: ChannelSpec, lam: float, grid=None, *, normalise: bool = True) -> RadialSpinor:
    """Polynomial-type eigenspinor of an essentially self-adjoint channel.

    ``lam`` must be a closed-form level to within 1e-8; it is snapped onto the
    exact level so that the Kummer series terminates.
    """
    if ch.is_critical:
        raise DomainError(f"channel l={ch.l} is critical; use build_critical")
    n = _closed_form_degree(ch, float(lam))
    exact = closed_form_level(ch, n, 1 if lam >= 0 else -1)
    model = _BelowModel(ch, exact, n) if ch.regime == "below" else _AboveModel(ch, exact, n)
    return _assemble(ch, exact, model, grid, normalise)


def build_trial(ch: ChannelSpec, lam: float, degree: Optional[int] = None, grid=None) -> RadialSpinor:
    """The regime's formula evaluated at an arbitrary lambda, without snapping.

    For diagnostics only: off the spectrum the result does not solve the radial
    equations (non-critical channels) and is not normalised. ``degree`` fixes
    the polynomial degree for non-critical channels; by default the nearest one.
    """
    lam = float(lam)
    if ch.is_critical:
        return _assemble(ch, lam, _CriticalModel(ch, lam), grid, normalise=False)
    if degree is None:
        shift = 0.25 * (lam * lam - ch.m * ch.m)
        degree = max(0, round(shift - ch.alpha) if ch.regime == "below" else round(shift))
    model = _BelowModel(ch, lam, degree) if ch.regime == "below" else _AboveModel(ch, lam, degree)
    return _assemble(ch, lam, model, grid, normalise=False)


def build(ch: ChannelSpec, lam: float, grid=None) -> RadialSpinor:
    if ch.is_critical:
        return build_critical(ch, lam, grid)
    return build_noncritical(ch, lam, grid)


# ---------------------------------------------------------------------------
# boundary condition at the origin
# ---------------------------------------------------------------------------


def reference_pair(ch: ChannelSpec, gamma_ext: float, x) -> tuple[np.ndarray, np.ndarray]:
    """Leading small-x terms of the deficiency combination psi+ + e^{i gamma} psi-.

    Divided by the common factor (1 + e^{i gamma}) / cos(gamma/2) so that the
    pair is real and finite for every gamma, including gamma = pi.
    """
    x = np.asarray(x, dtype=float)
    al, m = ch.alpha, ch.m
    m2 = m * m
    c = math.cos(0.5 * gamma_ext)
    s = math.sin(0.5 * gamma_ext)
    r_phi = c * gamma_ratio(al, al + 0.25 * (m2 + 1.0))
    r_chi = 0.5 * (s - m * c) * gamma_ratio(1.0 - al, 0.25 * (m2 + 5.0))
    return r_phi * x ** (-al), r_chi * x ** (al - 1.0)


def boundary_functional(psi: RadialSpinor, ref_gamma: float, x_samples: Sequence[float]) -> list[float]:
    """W(x) = x [phi chi_ref - chi phi_ref] at each sample.

    Tends to 0 as x -> 0+ exactly when psi lies in the domain of the
    ``ref_gamma`` extension, and to a non-zero constant otherwise.
    """
    if psi.form is not Form.CRITICAL_U:
        raise DomainError("the boundary functional applies to critical-channel spinors")
    x = np.asarray(x_samples, dtype=float)
    phi, chi = psi.evaluate(x)
    phi_r, chi_r = reference_pair(psi.channel, ref_gamma, x)
    w = x * (phi * chi_r - chi * phi_r)
    return [float(v) for v in np.atleast_1d(w)]


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


def _panels(x_cut: float, order: int, ratio: float, width: float) -> tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(order)
    edges_geo = [NEAR_ZERO_CUT]
    while edges_geo[-1] * ratio < 1.0:
        edges_geo.append(edges_geo[-1] * ratio)
    edges_geo.append(1.0)
    n_uni = max(1, int(math.ceil((x_cut - 1.0) / width)))
    edges = np.concatenate([edges_geo, np.linspace(1.0, x_cut, n_uni + 1)[1:]])
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _near_zero(terms1, terms2) -> float:
    total = 0.0
    for c1, p1 in terms1:
        for c2, p2 in terms2:
            if c1 == 0.0 or c2 == 0.0:
                continue
            e = p1 + p2 + 2.0
            if e <= 0:
                raise NormalizationError(f"x^{p1 + p2} is not integrable against x dx at 0")
            total += c1 * c2 * NEAR_ZERO_CUT**e / e
    return 2.0 * math.pi * total


def _x_cut(*lams: float) -> float:
    return max(12.0, max(abs(v) for v in lams) + 8.0)


def inner_product(
    psi1: RadialSpinor,
    psi2: RadialSpinor,
    *,
    order: int = QUAD_ORDER,
    ratio: float = GEOMETRIC_RATIO,
    width: float = PANEL_WIDTH,
) -> float:
    """<psi1, psi2> = int (phi1 phi2 + chi1 chi2) 2 pi x dx over (0, inf).

    Leading power laws are integrated analytically on (0, 1e-10); Gauss-Legendre
    panels cover the rest, geometric up to x = 1 and uniform beyond. The
    Gaussian tail past the cut-off is below double precision.
    """
    x_cut = _x_cut(psi1.lam, psi2.lam)
    nodes, weights = _panels(x_cut, order, ratio, width)
    p1, c1 = psi1.evaluate(nodes)
    p2, c2 = psi2.evaluate(nodes)
    body = 2.0 * math.pi * np.sum(weights * nodes * (p1 * p2 + c1 * c2))
    e1, e2 = psi1.expansion(), psi2.expansion()
    head = _near_zero(e1[0], e2[0]) + _near_zero(e1[1], e2[1])
    total = float(head + body)
    if not math.isfinite(total):
        raise NormalizationError("inner product quadrature produced a non-finite value")
    return total


def tail_bound(psi: RadialSpinor) -> float:
    """Bound on the norm integral beyond the quadrature cut-off."""
    x = _x_cut(psi.lam)
    phi, chi = psi.evaluate(x)
    return float(2.0 * math.pi * x * (phi * phi + chi * chi) / (2.0 * x) * 2.0)


def norm_squared(psi: RadialSpinor, **quad) -> float:
    return inner_product(psi, psi, **quad)


def normalize(psi: RadialSpinor) -> RadialSpinor:
    """Rescale to unit norm. The returned spinor's ``norm`` is the factor applied."""
    n2 = norm_squared(psi)
    if not n2 > 0:
        raise NormalizationError(f"cannot normalise a spinor with norm^2={n2}")
    factor = 1.0 / math.sqrt(n2)
    return _sample(psi, psi.scale * factor, factor)
