"""Physical constants (CODATA values from scipy.constants), SI units."""
from scipy import constants as _c

C0 = _c.c
HBAR = _c.hbar
H_PLANCK = _c.h
E_CHARGE = _c.e
M_E = _c.m_e
EPS0 = _c.epsilon_0
MU0 = _c.mu_0
Z0 = (MU0 / EPS0) ** 0.5
ALPHA = _c.fine_structure
COMPTON = _c.h / (_c.m_e * _c.c)
MEC2_EV = _c.m_e * _c.c ** 2 / _c.e
