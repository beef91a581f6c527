"""Dimension spectrum ``S(alpha)`` and the checks around it.

The spectrum is read off a :class:`~thermospec.temperature.TemperatureCurve`
as ``S(alpha(q)) = T(q) + q alpha(q)`` and cross-checked against
``h(nu_q) / L(nu_q)``. Endpoints are estimated twice: from Birkhoff ratios
of periodic orbits and from ``alpha(+-q_probe)``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateSpectrum, InfeasibleConstraint
from .potential import Potential, PotentialFamily, periodic_sum
from .sft import periodic_orbits, word_to_str
from .temperature import (TemperatureCurve, alpha as alpha_of_q, nu_q, pressure_and_measure,
                          solve_T)
from .transfer import (_edge_potential, entropy, equilibrium_state, free_energy, integrate,
                       random_markov_measure)

SPECTRUM_TOL = 1e-8
CONCAVITY_TOL = 1e-9
VARIATIONAL_TOL = 1e-9


def spectrum_point(curve: TemperatureCurve, q: float):
    """``(alpha, S, S_vd)`` at grid point ``q``; ``S_vd = h/L`` of ``nu_q``."""
    i = curve.index_of(q)
    a = float(curve.alpha[i])
    return a, float(curve.T[i] + curve.q_grid[i] * a), float(curve.vd_of_nu_q[i])


def spectrum_values(curve: TemperatureCurve) -> np.ndarray:
    return curve.T + curve.q_grid * curve.alpha


@dataclass(frozen=True)
class LegendreResiduals:
    """Audit of the Legendre pair ``(T, S)`` on a grid.

    ``reconstruction`` is ``max_i |T(q_i) - max_j (S_j - alpha_j q_i)|``;
    ``concavity`` is the largest second divided difference of ``S`` in
    ``alpha`` (must be ``<= 0`` up to rounding).
    """

    identity: float
    slope: float
    reconstruction: float
    concavity: float
    vd_agreement: float

    def to_dict(self):
        return asdict(self)


def legendre_check(curve: TemperatureCurve) -> LegendreResiduals:
    """Residuals of ``S = T + q alpha``, ``dS/dalpha = q`` and ``T = (-S)^*``.

    Raises
    ------
    DegenerateSpectrum
        When ``alpha`` is constant over the grid (single-point spectrum).
    """
    q, T, a = curve.q_grid, curve.T, curve.alpha
    if np.ptp(a) <= 1e-9:
        raise DegenerateSpectrum("alpha is constant; the spectrum is a single point")
    S = spectrum_values(curve)
    identity = float(np.max(np.abs(S - (T + q * a))))
    slope = 0.0
    if q.size >= 3:
        dS = (S[2:] - S[:-2]) / (a[2:] - a[:-2])
        slope = float(np.max(np.abs(dS - q[1:-1])))
    recon = np.max(S[None, :] - np.outer(q, a), axis=1)
    reconstruction = float(np.max(np.abs(T - recon)))
    order = np.argsort(a)
    x, y = a[order], S[order]
    concavity = -np.inf
    if x.size >= 3:
        d1 = np.diff(y) / np.diff(x)
        concavity = float(np.max(np.diff(d1) / (x[2:] - x[:-2]) * 2))
    vd = float(np.max(np.abs(S - curve.vd_of_nu_q)))
    return LegendreResiduals(identity, slope, reconstruction, concavity, vd)


# -- endpoints ----------------------------------------------------------------


def orbit_ratio(family: PotentialFamily, word) -> float:
    """Birkhoff ratio ``-sum g / sum jac`` of the periodic orbit ``word``."""
    return -periodic_sum(family.g, word) / periodic_sum(family.jac, word)


@dataclass(frozen=True)
class EndpointReport:
    alpha1_periodic: float
    alpha2_periodic: float
    orbit1: str
    orbit2: str
    alpha1_probe: float
    alpha2_probe: float
    q_probe: float
    max_period: int
    n_orbits: int

    @property
    def spread(self) -> float:
        return max(abs(self.alpha1_periodic - self.alpha1_probe),
                   abs(self.alpha2_periodic - self.alpha2_probe))

    @property
    def alpha1(self) -> float:
        return self.alpha1_periodic

    @property
    def alpha2(self) -> float:
        return self.alpha2_periodic

    def to_dict(self):
        d = asdict(self)
        d.update(spread=self.spread, alpha1=self.alpha1, alpha2=self.alpha2)
        return d


def endpoints(family: PotentialFamily, max_period: int = 12, q_probe: float = 40.0) -> EndpointReport:
    """Estimate ``[alpha1, alpha2]`` by periodic-orbit extremisation and by ``alpha(+-q_probe)``."""
    orbits = periodic_orbits(family.sft, max_period)
    ratios = np.array([orbit_ratio(family, o.word) for o in orbits])
    lo, hi = int(np.argmin(ratios)), int(np.argmax(ratios))
    return EndpointReport(float(ratios[lo]), float(ratios[hi]),
                          str(orbits[lo]), str(orbits[hi]),
                          alpha_of_q(family, q_probe), alpha_of_q(family, -q_probe),
                          q_probe, max_period, len(orbits))


# -- variational characterisations -------------------------------------------


@dataclass(frozen=True)
class VariationalGap:
    q: float
    T: float
    periodic_inf: float
    gap: float
    equality_defect: float
    argmin_orbit: str

    def to_dict(self):
        return asdict(self)


def variational_T_check(family: PotentialFamily, q: float, max_period: int = 12) -> VariationalGap:
    """Compare ``-T(q)`` with ``inf (h + q int g) / (-int jac)``.

    Periodic-orbit measures (zero entropy) give upper estimates of the
    infimum, hence a gap ``>= 0``; ``nu_q`` attains it exactly.
    """
    T = solve_T(family, q)
    orbits = periodic_orbits(family.sft, max_period)
    vals = [q * periodic_sum(family.g, o.word) / -periodic_sum(family.jac, o.word)
            for o in orbits]
    k = int(np.argmin(vals))
    nu = nu_q(family, q, T)
    at_nu = (entropy(nu) + q * integrate(nu, family.g)) / -integrate(nu, family.jac)
    return VariationalGap(q, T, float(vals[k]), float(vals[k] + T), float(abs(at_nu + T)),
                          str(orbits[k]))


@dataclass(frozen=True)
class VariationalPrinciple:
    q: float
    pressure: float
    equality_defect: float
    max_excess: float
    sample_count: int
    seed: int

    def to_dict(self):
        return asdict(self)


def variational_principle_check(family: PotentialFamily, q: float, sample_count: int = 200,
                                seed: int = 0, state_len: int = None) -> VariationalPrinciple:
    """``h + int phi_q = P`` at ``nu_q`` and ``<= P`` for random Markov measures."""
    T = solve_T(family, q)
    phi = family.phi(q, T)
    P, nu = pressure_and_measure(family, q, T)
    if state_len is None:
        state_len = nu.state_len
    rng = np.random.default_rng(seed)
    excess = -np.inf
    for _ in range(sample_count):
        rho = random_markov_measure(family.sft, rng, state_len,
                                    concentration=float(rng.uniform(0.2, 5.0)))
        excess = max(excess, free_energy(rho, phi) - P)
    return VariationalPrinciple(q, P, abs(free_energy(nu, phi) - P), float(excess),
                                sample_count, seed)


def _cycle_mean(n_states, src, dst, w, sense):
    """Karp's minimum (``sense=1``) or maximum (``sense=-1``) cycle mean."""
    w = sense * np.asarray(w, float)
    D = np.full((n_states + 1, n_states), np.inf)
    D[0] = 0.0
    for k in range(n_states):
        np.minimum.at(D[k + 1], dst, D[k][src] + w)
    with np.errstate(invalid="ignore"):
        ks = np.arange(n_states)[:, None]
        ratios = (D[n_states][None, :] - D[:n_states]) / (n_states - ks)
    ratios = np.where(np.isfinite(D[:n_states]), ratios, -np.inf)
    best = np.max(ratios, axis=0)
    best = best[np.isfinite(D[n_states])]
    return sense * float(np.min(best))


def cycle_mean_range(potential: Potential):
    """``(min, max)`` of ``int potential`` over invariant measures."""
    graph, values = _edge_potential(potential)
    args = (graph.n_states, graph.edge_src, graph.edge_dst, values)
    return _cycle_mean(*args, 1), _cycle_mean(*args, -1)


def _constraint(family, a):
    return family.g + a * family.jac


def feasible(family: PotentialFamily, a: float, tol: float = 1e-12) -> bool:
    lo, hi = cycle_mean_range(_constraint(family, a))
    return lo <= tol and hi >= -tol


def q_for_alpha(family: PotentialFamily, a: float, q_max: float = 200.0) -> float:
    """The ``q`` with ``alpha(q) = a`` (``alpha`` is decreasing in ``q``)."""
    if not feasible(family, a):
        raise InfeasibleConstraint(f"no invariant measure has alpha = {a}")
    a0 = alpha_of_q(family, 0.0)
    lo_b, hi_b = family.ratio_bounds()
    if hi_b - lo_b <= 1e-12 or abs(a0 - a) <= 1e-14:
        return 0.0
    f = lambda q: alpha_of_q(family, q) - a  # noqa: E731
    step = 1.0 if a < a0 else -1.0
    b = step
    while f(b) * f(0.0) > 0:
        b *= 2
        if abs(b) > q_max:
            raise InfeasibleConstraint(f"alpha = {a} lies at or beyond an endpoint")
    return brentq(f, min(0.0, b), max(0.0, b), xtol=1e-14, rtol=1e-15)


@dataclass(frozen=True)
class ConditionalVariational:
    q: float
    alpha: float
    S: float
    max_violation: float
    equality_defect: float
    sample_count: int
    seed: int
    max_constraint_error: float

    def to_dict(self):
        return asdict(self)


def _tilted_sample(family, base, psi, zeta, tol=1e-13):
    """Equilibrium state of ``base + zeta + s psi`` with ``int psi = 0``."""
    def measure(s):
        return equilibrium_state(family.sft, base + zeta + s * psi)

    def f(s):
        return integrate(measure(s), psi)

    f0 = f(0.0)
    if abs(f0) <= tol:
        return measure(0.0)
    step = -1.0 if f0 > 0 else 1.0
    b = step
    while f(b) * f0 > 0:
        b *= 2
        if abs(b) > 1e6:
            raise InfeasibleConstraint("constraint cannot be met by tilting")
    s = brentq(f, min(0.0, b), max(0.0, b), xtol=1e-15, rtol=1e-15)
    return measure(s)


def conditional_variational_check(family: PotentialFamily, *, q: float = None,
                                  alpha: float = None, sample_count: int = 200,
                                  seed: int = 0, scale: float = 2.0) -> ConditionalVariational:
    """Sample measures with ``alpha(rho) = alpha`` and check ``h/L <= S(alpha)``.

    Samples are equilibrium states of ``phi_q + zeta + s psi`` with
    ``psi = g + alpha jac``, a random potential ``zeta`` and ``s`` chosen
    by root-finding so that ``int psi d rho = 0``.

    Raises
    ------
    InfeasibleConstraint
        When no invariant measure satisfies the constraint.
    """
    if (q is None) == (alpha is None):
        raise ValueError("give exactly one of q or alpha")
    if alpha is not None:
        q = q_for_alpha(family, alpha)
    T = solve_T(family, q)
    nu = nu_q(family, q, T)
    a = -integrate(nu, family.g) / integrate(nu, family.jac) if alpha is None else alpha
    if not feasible(family, a):
        raise InfeasibleConstraint(f"no invariant measure has alpha = {a}")
    S = T + q * a
    psi = _constraint(family, a)
    depth = max(family.depth, 2)
    base = family.phi(q, T).refine(depth)
    rng = np.random.default_rng(seed)
    n_words = len(base.values)
    worst, cons = -np.inf, 0.0
    for _ in range(sample_count):
        zeta = Potential(family.sft, depth,
                         rng.normal(scale=rng.uniform(0.0, scale), size=n_words))
        rho = _tilted_sample(family, base, psi, zeta)
        L = integrate(rho, family.jac)
        cons = max(cons, abs(integrate(rho, psi)) / L)
        worst = max(worst, entropy(rho) / L - S)
    eq = abs(entropy(nu) / integrate(nu, family.jac) - S)
    return ConditionalVariational(q, a, S, float(worst), float(eq), sample_count, seed, cons)


# -- report -------------------------------------------------------------------


@dataclass
class SpectrumReport:
    """Spectrum points plus every audit computed on them."""

    points: list
    endpoints: EndpointReport
    legendre: LegendreResiduals = None
    degenerate: bool = False
    variational_gaps: list = field(default_factory=list)
    conditional: list = field(default_factory=list)

    @property
    def alpha1(self):
        return self.endpoints.alpha1

    @property
    def alpha2(self):
        return self.endpoints.alpha2

    def to_dict(self) -> dict:
        return {
            "points": [{"q": q, "alpha": a, "S": s} for q, a, s in self.points],
            "endpoints": self.endpoints.to_dict(),
            "legendre_residuals": None if self.legendre is None else self.legendre.to_dict(),
            "degenerate": self.degenerate,
            "variational_gaps": [g.to_dict() for g in self.variational_gaps],
            "conditional_variational": [c.to_dict() for c in self.conditional],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        """``alpha,S`` rows sorted by ``alpha``."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("alpha", "S"))
        for _, a, s in sorted(self.points, key=lambda p: p[1]):
            writer.writerow((repr(float(a)), repr(float(s))))
        return buf.getvalue()


def spectrum_report(family: PotentialFamily, curve: TemperatureCurve, *,
                    max_period: int = 12, q_probe: float = 40.0,
                    variational_q=(), conditional_q=(), sample_count: int = 50,
                    seed: int = 0) -> SpectrumReport:
    S = spectrum_values(curve)
    points = [(float(q), float(a), float(s)) for q, a, s in zip(curve.q_grid, curve.alpha, S)]
    try:
        legendre, degenerate = legendre_check(curve), False
    except DegenerateSpectrum:
        legendre, degenerate = None, True
    gaps = [variational_T_check(family, q, max_period) for q in variational_q]
    cond = [conditional_variational_check(family, q=q, sample_count=sample_count, seed=seed)
            for q in conditional_q]
    return SpectrumReport(points, endpoints(family, max_period, q_probe), legendre, degenerate,
                          gaps, cond)


__all__ = ["spectrum_point", "spectrum_values", "legendre_check", "LegendreResiduals",
           "orbit_ratio", "endpoints", "EndpointReport", "variational_T_check",
           "VariationalGap", "variational_principle_check", "VariationalPrinciple",
           "cycle_mean_range", "feasible", "q_for_alpha", "conditional_variational_check",
           "ConditionalVariational", "SpectrumReport", "spectrum_report", "word_to_str"]
