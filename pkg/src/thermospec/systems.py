"""Reference systems with closed-form fixtures.

``system_a``
    Full 2-shift, ``g = -log 2``, ``jac = log 2``. Degenerate:
    ``T(q) = 1 - q`` and ``alpha = 1``.
``system_b``
    Full 2-shift, ``g = -log 2``, ``jac = (log 2, log 4)``. With
    ``x(q) = (-1 + sqrt(1 + 2^(q+2))) / 2`` one has ``T = -log2 x`` and
    ``alpha = (1 + x) / (1 + 2x)``.
``golden_mean_system``
    Golden-mean shift (``11`` forbidden), ``g = -h_top``,
    ``jac = (log 2, log 3)``.
"""

import numpy as np

from .potential import JacobianPotential, Potential, PotentialFamily
from .sft import full_shift, golden_mean

LOG2 = float(np.log(2.0))


def system_a() -> PotentialFamily:
    s = full_shift(2)
    return PotentialFamily.build(Potential.per_symbol(s, [-LOG2, -LOG2]),
                                 JacobianPotential.per_symbol(s, [LOG2, LOG2]))


def system_b() -> PotentialFamily:
    s = full_shift(2)
    return PotentialFamily.build(Potential.per_symbol(s, [-LOG2, -LOG2]),
                                 JacobianPotential.per_symbol(s, [LOG2, 2 * LOG2]))


def golden_mean_system() -> PotentialFamily:
    s = golden_mean()
    return PotentialFamily.build(Potential.constant(s, 0.0),
                                 JacobianPotential.per_symbol(s, [LOG2, float(np.log(3.0))]))


def system_b_x(q):
    return (-1.0 + np.sqrt(1.0 + 2.0 ** (np.asarray(q, float) + 2))) / 2


def system_b_T(q):
    return -np.log2(system_b_x(q))


def system_b_alpha(q):
    x = system_b_x(q)
    return (1 + x) / (1 + 2 * x)


BUNDLED = {"system_a": system_a, "system_b": system_b, "golden_mean": golden_mean_system}
