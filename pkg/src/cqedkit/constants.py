"""Physical constants (CODATA 2018, exact SI values where defined)."""

from scipy import constants as _c

e = _c.e
h = _c.h
hbar = _c.hbar
c = _c.c
#: superconducting flux quantum h/2e in webers
PHI0 = h / (2 * e)

# unit helpers
fF = 1e-15
nH = 1e-9
GHz = 1e9
MHz = 1e6
um = 1e-6
mm = 1e-3
us = 1e-6
