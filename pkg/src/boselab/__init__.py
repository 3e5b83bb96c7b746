"""Lattice laboratory for the mean-field and Bogoliubov limits of a Bose gas."""

__version__ = "0.1.0"
