"""The temperature function ``T(q)``: the zero of ``t -> P(q g - t jac)``.

``t -> P(q, t)`` is strictly decreasing and convex with slope
``-int jac d nu_{q,t}``, so a Newton iteration safeguarded by bisection
inside an expanding bracket finds the unique root.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BracketingFailure
from .potential import PotentialFamily
from .transfer import (_stochasticize, asymptotic_variance, entropy, integrate,
                       perron_of)

ROOT_TOL = 1e-11
BRACKET_LIMIT = 1e8
FD_STEP = 1e-3
DEGENERACY_TOL = 1e-9

CSV_COLUMNS = ("q", "T", "alpha", "T_prime_fd", "T_second_fd", "T_second_var", "vd_nu_q")


def _state(family, q, t):
    phi = family.phi(q, t)
    data = perron_of(family.sft, phi)
    return phi, data


def pressure_and_measure(family: PotentialFamily, q: float, t: float):
    """``(P(q, t), nu_{q,t})``."""
    phi, data = _state(family, q, t)
    return data.log_lambda, _stochasticize(family.sft, phi, data)


def solve_T(family: PotentialFamily, q: float, t0: float = None, *,
            tol: float = ROOT_TOL) -> float:
    """Unique ``t`` with ``P(q g - t jac) = 0``.

    Newton steps use the exact slope ``-int jac d nu_{q,t}``; any step
    leaving the current sign-change bracket is replaced by bisection. The
    iteration continues past ``tol`` until the step stalls, so the
    returned root is accurate to a few ulps.

    Raises
    ------
    BracketingFailure
        If no sign change is found within ``|t| <= 1e8``.
    """
    lo, hi = -np.inf, np.inf
    if t0 is None:
        # P(q, t) <= P(q, 0) - t min(jac), so this lands close to the root
        t0 = pressure_and_measure(family, q, 0.0)[0] / float(family.jac.values.mean())
    t = float(t0)
    best_t, best_p = t, np.inf
    for _ in range(200):
        if abs(t) > BRACKET_LIMIT:
            raise BracketingFailure(f"no sign change of P({q}, t) within |t| <= {BRACKET_LIMIT:g}")
        P, nu = pressure_and_measure(family, q, t)
        if abs(P) < abs(best_p):
            best_t, best_p = t, P
        if P == 0.0:
            return t
        if P > 0:
            lo = max(lo, t)
        else:
            hi = min(hi, t)
        slope = -integrate(nu, family.jac)
        step = -P / slope
        # a step below one ulp would land on the bracket end itself
        if abs(step) <= 4 * np.finfo(float).eps * max(1.0, abs(t)) and abs(best_p) <= tol:
            break
        new = t + step
        if not (lo < new < hi):
            if np.isfinite(lo) and np.isfinite(hi):
                new = 0.5 * (lo + hi)
            else:
                width = max(1.0, abs(step), abs(t))
                new = t + 2 * width if P > 0 else t - 2 * width
        if abs(new - t) <= 4 * np.finfo(float).eps * max(1.0, abs(t)) and abs(best_p) <= tol:
            break
        t = new
    if abs(best_p) > tol:
        raise BracketingFailure(f"root of P({q}, t) not resolved: |P| = {abs(best_p):.3e}")
    return best_t


def alpha_from_measure(family, nu) -> float:
    return -integrate(nu, family.g) / integrate(nu, family.jac)


def alpha(family: PotentialFamily, q: float) -> float:
    """``-int g d nu_q / int jac d nu_q`` at ``t = T(q)``."""
    _, nu = pressure_and_measure(family, q, solve_T(family, q))
    return alpha_from_measure(family, nu)


def nu_q(family: PotentialFamily, q: float, T: float = None):
    """Equilibrium state of ``q g - T(q) jac``."""
    if T is None:
        T = solve_T(family, q)
    return pressure_and_measure(family, q, T)[1]


def pressure_partials(family: PotentialFamily, q: float, t: float, h: float = 1e-3):
    """Richardson-extrapolated central differences ``(dP/dq, dP/dt)``."""
    def P(a, b):
        return pressure_and_measure(family, a, b)[0]

    def central(f, x, step):
        d1 = (f(x + step) - f(x - step)) / (2 * step)
        d2 = (f(x + step / 2) - f(x - step / 2)) / step
        return (4 * d2 - d1) / 3

    return central(lambda a: P(a, t), q, h), central(lambda b: P(q, b), t, h)


def _fd_derivatives(family, q, T, h, a=0.0):
    """Richardson-extrapolated ``T'(q)`` and ``T''(q)`` from four extra roots.

    ``a`` is ``alpha(q)``; the roots are warm-started on the tangent line.
    """
    def root(dq):
        return solve_T(family, q + dq, T - a * dq)

    Tp1, Tm1, Tp2, Tm2 = root(h), root(-h), root(h / 2), root(-h / 2)
    d1 = (Tp1 - Tm1) / (2 * h)
    d2 = (Tp2 - Tm2) / h
    s1 = (Tp1 - 2 * T + Tm1) / h**2
    s2 = (Tp2 - 2 * T + Tm2) / (h / 2) ** 2
    return (4 * d2 - d1) / 3, (4 * s2 - s1) / 3


def second_derivative_from_variance(family, nu, alpha_q, convention="symmetric"):
    """``Var(g + alpha jac) / int jac`` under ``nu``; equals ``T''(q)`` for the
    symmetric convention."""
    psi = family.g + alpha_q * family.jac
    return asymptotic_variance(nu, psi, psi, convention) / integrate(nu, family.jac)


@dataclass
class TemperatureCurve:
    """Sampled temperature function and its companions on a ``q`` grid."""

    q_grid: np.ndarray
    T: np.ndarray
    alpha: np.ndarray
    T_prime_fd: np.ndarray
    T_second_fd: np.ndarray
    T_second_var: np.ndarray
    vd_of_nu_q: np.ndarray
    convention_used: str
    T_second_by_convention: dict = field(default_factory=dict)
    entropy: np.ndarray = None
    lyapunov: np.ndarray = None
    fd_step: float = FD_STEP

    def index_of(self, q: float) -> int:
        i = int(np.argmin(np.abs(self.q_grid - q)))
        if not math.isclose(self.q_grid[i], q, abs_tol=1e-12):
            raise KeyError(f"q = {q} is not on the grid")
        return i

    def rows(self):
        for i in range(len(self.q_grid)):
            yield (self.q_grid[i], self.T[i], self.alpha[i], self.T_prime_fd[i],
                   self.T_second_fd[i], self.T_second_var[i], self.vd_of_nu_q[i])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows():
            writer.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "columns": list(CSV_COLUMNS),
            "q": self.q_grid.tolist(),
            "T": self.T.tolist(),
            "alpha": self.alpha.tolist(),
            "T_prime_fd": self.T_prime_fd.tolist(),
            "T_second_fd": self.T_second_fd.tolist(),
            "T_second_var": self.T_second_var.tolist(),
            "vd_nu_q": self.vd_of_nu_q.tolist(),
            "convention_used": self.convention_used,
            "fd_step": self.fd_step,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def choose_convention(T_second_fd, by_convention, probe):
    """Variance convention closest to the finite-difference ``T''``.

    Ties (as in the product-measure case, where the two agree) go to the
    symmetric convention.
    """
    err = {name: float(np.max(np.abs(vals[probe] - T_second_fd[probe])))
           for name, vals in by_convention.items()}
    if err["one_sided"] < err["symmetric"] - 1e-12:
        return "one_sided"
    return "symmetric"


def temperature_curve(family: PotentialFamily, q_grid, *, h: float = FD_STEP) -> TemperatureCurve:
    """Evaluate ``T``, ``alpha``, derivatives and ``h/L`` on a strictly increasing grid."""
    q_grid = np.asarray(q_grid, dtype=float)
    if q_grid.ndim != 1 or q_grid.size == 0 or np.any(np.diff(q_grid) <= 0):
        raise ValueError("q grid must be strictly increasing")
    n = q_grid.size
    out = {k: np.empty(n) for k in ("T", "alpha", "Tp", "Tpp", "vd", "h", "L", "one", "sym")}
    guess = None
    for i, q in enumerate(q_grid):
        T = solve_T(family, q, guess)
        nu = nu_q(family, q, T)
        L = integrate(nu, family.jac)
        a = -integrate(nu, family.g) / L
        h_nu = entropy(nu)
        Tp, Tpp = _fd_derivatives(family, q, T, h, a)
        psi = family.g + a * family.jac
        out["one"][i] = asymptotic_variance(nu, psi, psi, "one_sided") / L
        out["sym"][i] = asymptotic_variance(nu, psi, psi, "symmetric") / L
        out["T"][i], out["alpha"][i], out["Tp"][i], out["Tpp"][i] = T, a, Tp, Tpp
        out["h"][i], out["L"][i], out["vd"][i] = h_nu, L, h_nu / L
        if i + 1 < n:
            guess = T - a * (q_grid[i + 1] - q)
    by_conv = {"one_sided": out["one"], "symmetric": out["sym"]}
    probe = np.unique(np.linspace(0, n - 1, 5).round().astype(int)[1:-1]) if n >= 3 else np.arange(n)
    conv = choose_convention(out["Tpp"], by_conv, probe)
    return TemperatureCurve(q_grid, out["T"], out["alpha"], out["Tp"], out["Tpp"],
                            by_conv[conv].copy(), out["vd"], conv, by_conv,
                            out["h"], out["L"], h)


@dataclass(frozen=True)
class DegeneracyResult:
    is_nu0: bool
    max_T_second_var: float
    alpha_variation: float
    threshold: float = DEGENERACY_TOL

    def __bool__(self):
        return self.is_nu0


def degeneracy_test(curve: TemperatureCurve, family: PotentialFamily = None,
                    threshold: float = DEGENERACY_TOL) -> DegeneracyResult:
    """Decide whether ``nu = nu_0`` (straight-line ``T``, constant ``alpha``)."""
    max_var = float(np.max(np.abs(curve.T_second_var)))
    spread = float(np.max(curve.alpha) - np.min(curve.alpha))
    return DegeneracyResult(max_var <= threshold and spread <= threshold, max_var, spread,
                            threshold)
