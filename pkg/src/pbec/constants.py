"""SI physical constants (CODATA, exact 2019 redefinition values where applicable)."""

from dataclasses import dataclass

H = 6.62607015e-34       # Planck constant [J s] (exact)
HBAR = 1.054571817e-34   # reduced Planck constant [J s]
K_B = 1.380649e-23       # Boltzmann constant [J/K] (exact)
C = 299792458.0          # vacuum speed of light [m/s] (exact)


@dataclass(frozen=True)
class PhysicalConstants:
    """Immutable bundle of the constants used throughout the package."""

    h: float = H
    hbar: float = HBAR
    k_B: float = K_B
    c: float = C


CONSTANTS = PhysicalConstants()
