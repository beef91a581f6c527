"""Thermodynamic formalism on subshifts of finite type.

Pressure and equilibrium states of locally constant potentials, the
temperature function of the family ``q g - t jac``, the dimension spectrum
it generates, and numerical checks of the identities that tie them
together.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .sft import Sft, validate, full_shift, golden_mean, cylinders, periodic_orbits  # noqa: F401
from .potential import (Potential, JacobianPotential, PotentialFamily,  # noqa: F401
                        birkhoff_sum, normalize_to_zero_pressure)
from .transfer import (pressure, perron_of, equilibrium_state, entropy, integrate,  # noqa: F401
                       asymptotic_variance, gibbs_certificate, conformality_check)
from .temperature import solve_T, alpha, temperature_curve, degeneracy_test  # noqa: F401
from .spectrum import spectrum_point, legendre_check, endpoints  # noqa: F401
from .systems import system_a, system_b, golden_mean_system  # noqa: F401
