"""Dynamical-phase quantum thermometry for a phonon mode of a BEC.

A two-level atomic dot coupled to a thermal phonon mode through a
Jaynes-Cummings interaction picks up a temperature-dependent phase.  This
package computes those phases, the Fisher information they carry, the
resulting Cramer-Rao precision, and simulates Ramsey thermometry runs.
"""

__version__ = "0.1.0"
