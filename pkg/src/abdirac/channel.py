"""Angular-momentum channels of the Dirac Hamiltonian with an Aharonov-Bohm flux.

A channel is labelled by the orbital index ``l`` (total angular momentum
l + 1/2). With ``alpha = kappa - l`` the radial operator is essentially
self-adjoint unless 0 < alpha < 1, which happens only for l = floor(kappa)
and non-integer kappa. That critical channel carries a one-parameter family of
self-adjoint extensions labelled by an angle gamma in (-pi, pi]; its
eigenvalues solve ``G(lambda) = beta(gamma)``, with

    G(lambda) = (lambda - m) Gamma(alpha + m^2/4 - lambda^2/4) / Gamma(1 + m^2/4 - lambda^2/4)
    beta(gamma) = (tan(gamma/2) - m) Gamma(alpha + m^2/4 + 1/4) / Gamma(m^2/4 + 5/4)

Lengths are in units of 1/sqrt(Omega) and energies in units of sqrt(Omega),
where Omega = eB/2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .specfun import ExtendedReal, gamma_ratio

_EPS = 2.220446049250313e-16


class DomainError(ValueError):
    """Input outside the domain of a channel operation."""


class Classification(enum.Enum):
    ESSENTIALLY_SELF_ADJOINT = "EssentiallySelfAdjoint"
    ONE_PARAMETER_FAMILY = "OneParameterFamily"


@dataclass(frozen=True)
class ClassificationResult:
    kind: Classification
    n_plus: int
    n_minus: int

    @property
    def has_extensions(self) -> bool:
        return self.kind is Classification.ONE_PARAMETER_FAMILY


@dataclass(frozen=True)
class PhysicalConfig:
    """Physical parameters: mass M, eB (= 2 Omega) and the flux kappa (Phi = 2 pi kappa / e)."""

    mass: float
    charge_times_B: float
    flux_kappa: float

    def __post_init__(self):
        if not self.charge_times_B > 0:
            raise DomainError(f"charge_times_B must be > 0 (got {self.charge_times_B})")

    @property
    def omega(self) -> float:
        return 0.5 * self.charge_times_B

    @property
    def energy_scale(self) -> float:
        """sqrt(Omega): multiply a dimensionless eigenvalue by this to get an energy."""
        return math.sqrt(self.omega)


@dataclass(frozen=True)
class ChannelSpec:
    """One angular-momentum sector in dimensionless form."""

    m: float
    kappa: float
    l: int
    alpha: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "kappa", float(self.kappa))
        if self.m < 0:
            raise DomainError("m must be >= 0; the sign of M is a representation choice")
        if int(self.l) != self.l:
            raise DomainError(f"l must be an integer (got {self.l})")
        object.__setattr__(self, "l", int(self.l))
        object.__setattr__(self, "alpha", self.kappa - self.l)

    @property
    def is_critical(self) -> bool:
        return 0.0 < self.alpha < 1.0

    @property
    def regime(self) -> str:
        """'critical', 'below' (alpha >= 1, l < floor(kappa)) or 'above' (alpha <= 0)."""
        if self.is_critical:
            return "critical"
        return "below" if self.alpha >= 1.0 else "above"


def to_dimensionless(cfg: PhysicalConfig, l: int) -> ChannelSpec:
    """Channel ``l`` of a physical configuration, with m = |M| / sqrt(Omega)."""
    if not cfg.charge_times_B > 0:
        raise DomainError("charge_times_B must be > 0")
    return ChannelSpec(m=abs(cfg.mass) / cfg.energy_scale, kappa=cfg.flux_kappa, l=l)


def to_physical_energy(cfg: PhysicalConfig, lam: float) -> float:
    return cfg.energy_scale * lam


def classify(ch: ChannelSpec) -> ClassificationResult:
    """Deficiency indices (n+, n-) of the radial operator on C0-infinity(R+)."""
    if ch.is_critical:
        return ClassificationResult(Classification.ONE_PARAMETER_FAMILY, 1, 1)
    return ClassificationResult(Classification.ESSENTIALLY_SELF_ADJOINT, 0, 0)


def _require_critical(ch: ChannelSpec) -> None:
    if not ch.is_critical:
        raise DomainError(
            f"channel l={ch.l} (alpha={ch.alpha}) is essentially self-adjoint; "
            "G and beta are only defined for 0 < alpha < 1"
        )


def _snap_to_int(x: float, scale: float) -> float:
    """Round x to the nearest integer if within a few ulps of the terms that built it."""
    r = round(x)
    if abs(x - r) <= 8.0 * _EPS * max(1.0, scale):
        return float(r)
    return x


def g_of_lambda(ch: ChannelSpec, lam: float) -> ExtendedReal:
    """G(lambda), the lambda-dependent side of the spectral equation.

    Exact zeros at lambda = m and at the denominator poles; signed infinities at
    the numerator poles. Gamma arguments within a few ulps of a non-positive
    integer are snapped onto it, so that float approximations of sqrt(m^2+4+4n)
    and sqrt(m^2+4 alpha+4n) land on the zero or pole.
    """
    _require_critical(ch)
    lam = float(lam)
    if lam == ch.m:
        return 0.0
    shift = 0.25 * (ch.m * ch.m - lam * lam)
    scale = 0.25 * (ch.m * ch.m + lam * lam) + ch.alpha + 1.0
    num = _snap_to_int(ch.alpha + shift, scale)
    den = _snap_to_int(1.0 + shift, scale)
    ratio = gamma_ratio(num, den)
    if math.isinf(ratio):
        return math.copysign(math.inf, ratio * (lam - ch.m))
    return (lam - ch.m) * ratio


def beta_of_gamma(ch: ChannelSpec, gamma: float) -> ExtendedReal:
    """beta(gamma); +inf at gamma = pi, exactly 0 at gamma0 = 2 arctan(m)."""
    _require_critical(ch)
    if not (-math.pi < gamma <= math.pi + 4 * _EPS):
        raise DomainError(f"gamma={gamma} outside (-pi, pi]")
    if abs(gamma - math.pi) <= 4 * _EPS:
        return math.inf
    t = math.tan(0.5 * gamma)
    factor = t - ch.m
    if abs(factor) <= 4 * _EPS * max(1.0, ch.m):
        return 0.0
    m2 = ch.m * ch.m
    return factor * gamma_ratio(ch.alpha + 0.25 * m2 + 0.25, 0.25 * m2 + 1.25)


def gamma0(m: float) -> float:
    """The extension angle at which beta vanishes."""
    return 2.0 * math.atan(m)


@dataclass(frozen=True)
class ExtensionParam:
    """A self-adjoint extension: the angle gamma and the derived beta."""

    gamma: float
    beta: ExtendedReal

    @classmethod
    def for_channel(cls, ch: ChannelSpec, gamma: float) -> "ExtensionParam":
        return cls(gamma=gamma, beta=beta_of_gamma(ch, gamma))


def pole_position(ch: ChannelSpec, n: int) -> float:
    """The n-th positive pole of G, sqrt(m^2 + 4 alpha + 4n)."""
    return math.sqrt(ch.m * ch.m + 4.0 * ch.alpha + 4.0 * n)


def zero_position(ch: ChannelSpec, n: int) -> float:
    """The n-th positive non-trivial zero of G, sqrt(m^2 + 4 + 4n)."""
    return math.sqrt(ch.m * ch.m + 4.0 + 4.0 * n)


def zeros_and_poles(ch: ChannelSpec, lambda_max: float) -> tuple[list[float], list[float]]:
    """Zeros and poles of G inside [-lambda_max, lambda_max], each sorted ascending."""
    _require_critical(ch)
    zeros = [ch.m] if ch.m <= lambda_max else []
    n = 0
    while (z := zero_position(ch, n)) <= lambda_max:
        zeros.extend((-z, z))
        n += 1
    poles = []
    n = 0
    while (p := pole_position(ch, n)) <= lambda_max:
        poles.extend((-p, p))
        n += 1
    return sorted(zeros), sorted(poles)
