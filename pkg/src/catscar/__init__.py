"""Statevector toolkit for large GHZ states and cat-scar discrete time crystals.

Subpackages:

- ``qstate``     dense/sparse statevectors and the elementary gate set
- ``circuits``   circuit IR, radial GHZ generator, CZ compiler, Floquet builder
- ``protocols``  MQC, parity oscillations, fidelity, cat interferometry
- ``spectral``   exact Floquet spectra, IPR / Edwards-Anderson diagnostics
- ``analytics``  closed-form scar IPR, detuning, decay envelopes, butterfly velocity
- ``noise``      Monte Carlo wavefunction noise and readout-error correction
- ``obs``        correlation maps, domain walls, kinetic constraints, lightcones
- ``cli``        config-driven experiment runner
"""

from . import analytics, circuits, noise, obs, protocols, qstate, spectral

__version__ = "0.1.0"

__all__ = [
    "analytics",
    "circuits",
    "noise",
    "obs",
    "protocols",
    "qstate",
    "spectral",
    "__version__",
]
