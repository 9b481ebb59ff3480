"""High-velocity Aharonov-Bohm scattering outside toroidal magnets.

Forward simulation (phase factors, next-order matrix elements) and inversion
(field and potential tomography, flux recovery modulo 2π).
"""

__version__ = "0.1.0"
