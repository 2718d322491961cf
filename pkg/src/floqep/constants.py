"""Physical constants and conversion factors to Hartree atomic units.

All values are CODATA 2018 (NIST, physics.nist.gov/constants). Everything
inside the package is computed in atomic units (hbar = m_e = e = a0 = 1);
these factors are used only at the I/O boundary.
"""

# hbar = 1, electron mass = 1, elementary charge = 1, Bohr radius = 1
HBAR_AU = 1.0

# energy
HARTREE_EV = 27.211386245988
HARTREE_J = 4.3597447222071e-18
HARTREE_WAVENUMBER = 219474.6313632  # cm^-1 per Hartree

# length
BOHR_M = 5.29177210903e-11
BOHR_NM = BOHR_M * 1e9
BOHR_ANGSTROM = BOHR_M * 1e10

# time
ATOMIC_TIME_S = 2.4188843265857e-17
ATOMIC_TIME_FS = ATOMIC_TIME_S * 1e15  # 0.02418884... fs

# mass
AMU_ME = 1822.888486209  # electron masses per unified atomic mass unit

# light
FINE_STRUCTURE = 7.2973525693e-3
C_AU = 1.0 / FINE_STRUCTURE  # speed of light in atomic units

# A photon of 1 Hartree has vacuum wavelength 2*pi*c[a.u.]*a0; in nm:
HARTREE_WAVELENGTH_NM = 2.0 * 3.141592653589793 * C_AU * BOHR_NM  # 45.5633525...

# Atomic unit of intensity, I_au = (1/2) eps0 c E_au^2, in W/cm^2
# (NIST CODATA; a field of 1 a.u. corresponds to this cycle-averaged intensity).
ATOMIC_INTENSITY_W_CM2 = 3.50944758e16
