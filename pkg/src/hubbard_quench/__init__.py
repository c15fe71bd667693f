"""Quench dynamics of Bose- and Fermi-Hubbard models.

Mode equations of the 1/Z expansion, solved in closed form or by RK4,
are checked against an exact-diagonalization oracle for small lattices.
"""

__version__ = "0.1.0"
