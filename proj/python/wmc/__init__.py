"""Worldline Monte Carlo propagators and energies (Python front end)."""

from ._core import *  # noqa: F401,F403
from ._core import WmcError, __version__


def harmonic_energy(omega, mu, d, dimension):
    """Ground energy of a harmonic pair with offset d, for checks."""
    return 0.5 * omega * (dimension + mu * omega * d * d)


def pair_system(potential, dimension, masses=(1.0, 1.0), starts=None):
    """Two particles with coincident start and end points (default origin)."""
    if starts is None:
        starts = [[0.0] * dimension for _ in masses]
    parts = [Particle(m, list(s)) for m, s in zip(masses, starts)]
    return SystemSpec(dimension, parts, potential)
