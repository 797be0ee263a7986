"""Spectrum and eigenfunctions of the 2+1 dimensional Dirac-Landau problem with an Aharonov-Bohm flux.

Modules:

* ``specfun``: gamma function and the Kummer functions M and U
* ``channel``: angular-momentum channels, deficiency classification, G(lambda) and beta(gamma)
* ``spectrum``: eigenvalues (transcendental in the critical channel, closed form elsewhere)
* ``eigenfunction``: radial spinors, normalisation, the boundary functional
* ``oracle``: independent checks by ODE residuals and shooting
* ``cli``: the ``abdirac`` command
"""

from .channel import (
    ChannelSpec,
    Classification,
    DomainError,
    PhysicalConfig,
    beta_of_gamma,
    classify,
    g_of_lambda,
    gamma0,
    to_dimensionless,
    zeros_and_poles,
)
from .eigenfunction import RadialSpinor, boundary_functional, build_critical, build_noncritical, normalize
from .oracle import VerificationReport, shoot, verify_line
from .spectrum import SpectralLine, full_spectrum, spectrum_closed_form, spectrum_critical

__version__ = "0.1.0"

__all__ = [
    "ChannelSpec",
    "Classification",
    "DomainError",
    "PhysicalConfig",
    "RadialSpinor",
    "SpectralLine",
    "VerificationReport",
    "beta_of_gamma",
    "boundary_functional",
    "build_critical",
    "build_noncritical",
    "classify",
    "full_spectrum",
    "g_of_lambda",
    "gamma0",
    "normalize",
    "shoot",
    "spectrum_closed_form",
    "spectrum_critical",
    "to_dimensionless",
    "verify_line",
    "zeros_and_poles",
]
