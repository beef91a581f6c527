"""Command-line front end.

Subcommands ``pressure``, ``temperature``, ``spectrum``, ``verify`` and
``orbits`` read one JSON config and write CSV/JSON files into the output
directory. Every file starts with a metadata block (config hash, seed,
tolerances); CSV files carry it as ``#`` comment lines.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .errors import DegenerateSpectrum, EqualRatios, InfeasibleConstraint, ThermospecError
from .orbits import (RNG_ALGORITHM, BlockSchedule, irregular_point, level_set_concentration,
                     sample_orbits)
from .sft import parse_word, word_to_str
from .spectrum import (conditional_variational_check, endpoints, legendre_check, orbit_ratio,
                       spectrum_report, variational_principle_check, variational_T_check)
from .sft import periodic_orbits
from .temperature import (ROOT_TOL, degeneracy_test, pressure_and_measure, pressure_partials,
                          second_derivative_from_variance, solve_T, temperature_curve)
from .transfer import conformality_check, gibbs_certificate, integrate

TOLERANCES = {
    "root": ROOT_TOL,
    "T1": 1e-10,
    "convexity": 1e-9,
    "T_prime": 1e-6,
    "partials": 1e-8,
    "gibbs_rtol": 1e-9,
    "conformality": 1e-12,
    "legendre_slope": 5e-3,
    "legendre_reconstruction": 1e-4,
    "concavity": 1e-9,
    "vd_identity": 1e-8,
    "endpoint_agreement": 2e-3,
    "variational_equality": 1e-10,
    "variational_T": 1e-9,
    "conditional": 1e-8,
    "concentration_fraction": 0.95,
    "irregular_fraction": 0.8,
    "degeneracy": 1e-9,
}

PROBE_Q = (-2.0, 0.0, 1.0, 2.0)


# -- output helpers -------------------------------------------------------------


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def metadata(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "config_name": cfg.name, "config_sha256": cfg.digest(),
            "seed": cfg.seed, "rng": RNG_ALGORITHM, "tolerances": TOLERANCES,
            "version": __version__}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, float) and not np.isfinite(x):
        return repr(x)
    return x


def write_json(path: Path, meta: dict, payload: dict) -> None:
    atomic_write(path, json.dumps(_jsonable({"metadata": meta, **payload}), sort_keys=True,
                                  indent=2) + "\n")


def write_csv(path: Path, meta: dict, body: str) -> None:
    header = "".join(f"# {k}: {json.dumps(_jsonable(v), sort_keys=True)}\n"
                     for k, v in sorted(meta.items()))
    atomic_write(path, header + body)


def read_csv(path) -> list:
    """Rows of a CSV written by this tool, skipping the metadata block."""
    with open(path, encoding="utf-8") as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


# -- commands ---------------------------------------------------------------------


def pressure_table(cfg: RunConfig):
    fam = cfg.family
    rows, monotone = [], True
    for q in cfg.q_grid:
        prev = None
        for t in cfg.t_grid:
            P = pressure_and_measure(fam, q, t)[0]
            if prev is not None and not P < prev:
                monotone = False
            prev = P
            rows.append((float(q), float(t), P))
    return rows, monotone


def cmd_pressure(cfg: RunConfig, out: Path, log):
    rows, monotone = pressure_table(cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("q", "t", "P"))
    for r in rows:
        w.writerow([repr(x) for x in r])
    meta = metadata(cfg, "pressure")
    meta["monotone_decreasing_in_t"] = monotone
    write_csv(out / "pressure.csv", meta, buf.getvalue())
    log(f"pressure: {len(rows)} grid points, strictly decreasing in t: {monotone}")
    return 0


def cmd_temperature(cfg: RunConfig, out: Path, log):
    curve = temperature_curve(cfg.family, cfg.q_grid)
    meta = metadata(cfg, "temperature")
    meta["convention_used"] = curve.convention_used
    write_csv(out / "temperature.csv", meta, curve.to_csv())
    write_json(out / "temperature.json", meta, {"curve": curve.to_dict()})
    log(f"temperature: {curve.q_grid.size} points, variance convention {curve.convention_used}")
    return 0


def _probe_points(cfg):
    return [q for q in PROBE_Q if cfg.q_grid[0] <= q <= cfg.q_grid[-1]]


def cmd_spectrum(cfg: RunConfig, out: Path, log):
    curve = temperature_curve(cfg.family, cfg.q_grid)
    report = spectrum_report(cfg.family, curve, max_period=cfg.depths["endpoint_period"],
                             q_probe=cfg.raw["q_probe"], variational_q=_probe_points(cfg),
                             conditional_q=[0.0], seed=cfg.seed,
                             sample_count=cfg.sampling["variational_samples"])
    meta = metadata(cfg, "spectrum")
    write_json(out / "spectrum.json", meta, report.to_dict())
    write_csv(out / "spectrum.csv", meta, report.to_csv())
    tag = "degenerate (single point)" if report.degenerate else "non-degenerate"
    log(f"spectrum: {tag}; alpha in [{report.alpha1:.10g}, {report.alpha2:.10g}]")
    return 0


def cmd_orbits(cfg: RunConfig, out: Path, log):
    fam, s = cfg.family, cfg.sampling
    conc = level_set_concentration(fam, 0.0, s["n"], s["N"], s["epsilon"], s["seed"])
    payload = {"concentration": conc.to_dict()}
    irr = cfg.irregular
    try:
        sched = BlockSchedule.geometric(irr["first_block"], irr["growth_factor"], irr["horizon"])
        payload["irregular"] = irregular_point(fam, irr["orbit_a"], irr["orbit_b"], sched,
                                               irr["horizon"]).to_dict()
    except EqualRatios as exc:
        payload["irregular"] = {"error": "EqualRatios", "message": str(exc)}
    meta = metadata(cfg, "orbits")
    write_json(out / "orbits.json", meta, payload)
    if s["dump"]:
        from .temperature import nu_q
        paths = sample_orbits(nu_q(fam, 0.0), s["n"], s["dump"], s["seed"])
        lines = "".join(word_to_str(p.tolist()) + "\n" for p in paths)
        atomic_write(out / "orbits.txt", lines)
    log(f"orbits: concentration fraction {conc.fraction:.4f}")
    return 0


# -- verification -------------------------------------------------------------------


def _check(measured, tolerance, ok, **extra):
    return {"measured": measured, "tolerance": tolerance, "status": "PASS" if ok else "FAIL",
            **extra}


def _periodic_ratio_spread(cfg):
    ratios = [orbit_ratio(cfg.family, o.word)
              for o in periodic_orbits(cfg.sft, cfg.depths["endpoint_period"])]
    return float(np.ptp(ratios))


def verify_checks(cfg: RunConfig) -> dict:
    """Run the configured checks; returns ``{name: result}``."""
    fam, tol = cfg.family, TOLERANCES
    want = set(cfg.checks)
    needs_curve = want & {"temperature", "legendre", "completeness", "degeneracy"}
    curve = temperature_curve(fam, cfg.q_grid) if needs_curve else None
    out = {}

    if "temperature" in want:
        T1 = abs(solve_T(fam, 1.0))
        dd = np.diff(curve.T, 2)
        worst_tp = float(np.max(np.abs(curve.T_prime_fd + curve.alpha)))
        part = 0.0
        for q in _probe_points(cfg):
            T = solve_T(fam, q)
            nu = pressure_and_measure(fam, q, T)[1]
            dq, dt = pressure_partials(fam, q, T)
            part = max(part, abs(dt + integrate(nu, fam.jac)), abs(dq - integrate(nu, fam.g)))
        ok = (T1 <= tol["T1"] and np.all(np.diff(curve.T) < 0)
              and dd.min() >= -tol["convexity"] and worst_tp <= tol["T_prime"]
              and part <= tol["partials"])
        out["temperature"] = _check(
            {"abs_T1": T1, "min_second_difference": float(dd.min()) if dd.size else 0.0,
             "max_T_prime_plus_alpha": worst_tp, "max_partial_defect": part},
            {k: tol[k] for k in ("T1", "convexity", "T_prime", "partials")}, ok)

    if "gibbs" in want:
        res, ok = [], True
        for q in _probe_points(cfg):
            cert = gibbs_certificate(cfg.sft, fam.phi(q, solve_T(fam, q)),
                                     cfg.depths["gibbs_depth"], rtol=tol["gibbs_rtol"])
            res.append({"q": q, **cert.to_dict()})
            ok &= cert.certified
        out["gibbs"] = _check(res, tol["gibbs_rtol"], ok)

    if "conformality" in want:
        defects = {q: conformality_check(cfg.sft, fam.phi(q, solve_T(fam, q)),
                                         cfg.depths["conformality_depth"])
                   for q in _probe_points(cfg)}
        out["conformality"] = _check(defects, tol["conformality"],
                                     max(defects.values()) <= tol["conformality"])

    if "legendre" in want:
        try:
            r = legendre_check(curve)
            ok = (r.slope <= tol["legendre_slope"] and r.reconstruction <= tol["legendre_reconstruction"]
                  and r.concavity <= tol["concavity"] and r.vd_agreement <= tol["vd_identity"])
            out["legendre"] = _check(r.to_dict(), {k: tol[k] for k in (
                "legendre_slope", "legendre_reconstruction", "concavity", "vd_identity")}, ok)
        except DegenerateSpectrum:
            S = curve.T + curve.q_grid * curve.alpha
            vd = float(np.max(np.abs(S - curve.vd_of_nu_q)))
            out["legendre"] = _check({"vd_agreement": vd}, tol["vd_identity"],
                                     vd <= tol["vd_identity"], note="single-point spectrum")

    if "completeness" in want:
        e = endpoints(fam, cfg.depths["endpoint_period"], cfg.raw["q_probe"])
        slack = tol["endpoint_agreement"]
        inside = (e.alpha1_probe - slack <= e.alpha1_periodic <= e.alpha2_probe + slack
                  and e.alpha1_probe - slack <= e.alpha2_periodic <= e.alpha2_probe + slack)
        in_range = bool(np.all((curve.alpha >= e.alpha1 - 1e-9) & (curve.alpha <= e.alpha2 + 1e-9)))
        try:
            conditional_variational_check(fam, alpha=e.alpha1 - 0.1, sample_count=1)
            empty_outside = False
        except InfeasibleConstraint:
            empty_outside = True
        out["completeness"] = _check(
            {**e.to_dict(), "alpha_grid_in_range": in_range,
             "infeasible_below_alpha1": empty_outside},
            slack, inside and e.spread <= slack and in_range and empty_outside)

    if "variational" in want:
        n = cfg.sampling["variational_samples"]
        rows, ok = [], True
        for q in _probe_points(cfg):
            vp = variational_principle_check(fam, q, n, cfg.seed)
            vt = variational_T_check(fam, q, cfg.depths["endpoint_period"])
            cv = conditional_variational_check(fam, q=q, sample_count=n, seed=cfg.seed)
            rows.append({"principle": vp.to_dict(), "temperature": vt.to_dict(),
                         "conditional": cv.to_dict()})
            ok &= (vp.equality_defect <= tol["variational_equality"]
                   and vp.max_excess <= tol["variational_equality"]
                   and vt.gap >= -tol["variational_T"]
                   and vt.equality_defect <= tol["variational_T"]
                   and cv.max_violation <= tol["conditional"]
                   and cv.equality_defect <= tol["conditional"])
        out["variational"] = _check(rows, {k: tol[k] for k in (
            "variational_equality", "variational_T", "conditional")}, ok)

    if "concentration" in want:
        s = cfg.sampling
        c = level_set_concentration(fam, 0.0, s["n"], s["N"], s["epsilon"], s["seed"])
        out["concentration"] = _check(c.to_dict(), tol["concentration_fraction"],
                                      c.fraction >= tol["concentration_fraction"])

    if "irregular" in want:
        irr = cfg.irregular
        sched = BlockSchedule.geometric(irr["first_block"], irr["growth_factor"], irr["horizon"])
        try:
            rec = irregular_point(fam, irr["orbit_a"], irr["orbit_b"], sched, irr["horizon"],
                                  threshold_fraction=tol["irregular_fraction"])
            d = rec.to_dict()
            d.pop("boundaries")
            d.pop("ratios")
            out["irregular"] = _check(d, tol["irregular_fraction"], rec.certified)
        except EqualRatios as exc:
            # only legitimate when every periodic orbit has the same ratio
            flat = _periodic_ratio_spread(cfg) <= tol["degeneracy"]
            out["irregular"] = _check({"error": str(exc)}, tol["irregular_fraction"], flat,
                                      note="equal ratios: no irregular points")

    if "degeneracy" in want:
        d = degeneracy_test(curve, fam, tol["degeneracy"])
        flat = _periodic_ratio_spread(cfg) <= tol["degeneracy"]
        out["degeneracy"] = _check(
            {"is_nu0": d.is_nu0, "max_T_second_var": d.max_T_second_var,
             "alpha_variation": d.alpha_variation, "periodic_ratios_constant": flat},
            tol["degeneracy"], d.is_nu0 == flat)

    if "golden" in want and cfg.golden_path() is not None:
        out["golden"] = golden_check(cfg)
    return out


def golden_quantity(cfg: RunConfig, item: dict) -> float:
    fam, kind = cfg.family, item["quantity"]
    if kind == "pressure":
        return pressure_and_measure(fam, item["q"], item["t"])[0]
    q = item["q"]
    T = solve_T(fam, q)
    if kind == "T":
        return T
    nu = pressure_and_measure(fam, q, T)[1]
    a = -integrate(nu, fam.g) / integrate(nu, fam.jac)
    if kind == "alpha":
        return a
    if kind == "S":
        return T + q * a
    if kind == "T_second":
        return second_derivative_from_variance(fam, nu, a)
    raise ValueError(f"unknown golden quantity {kind!r}")


def golden_check(cfg: RunConfig) -> dict:
    """Compare against a file of expected values; each entry names its own tolerance."""
    entries = json.loads(cfg.golden_path().read_text())["values"]
    rows, failed = [], []
    for item in entries:
        got = golden_quantity(cfg, item)
        delta = abs(got - item["expected"])
        ok = delta <= item["tol"]
        rows.append({"name": item["name"], "measured": got, "expected": item["expected"],
                     "delta": delta, "tolerance": item["tol"],
                     "status": "PASS" if ok else "FAIL"})
        if not ok:
            failed.append(item["name"])
    return _check(rows, "per entry", not failed, failed=failed)


def cmd_verify(cfg: RunConfig, out: Path, log):
    results = verify_checks(cfg)
    overall = all(r["status"] == "PASS" for r in results.values())
    write_json(out / "verify.json", metadata(cfg, "verify"),
               {"checks": results, "overall": "PASS" if overall else "FAIL"})
    for name, r in results.items():
        log(f"{r['status']:4s}  {name}")
    log(f"overall: {'PASS' if overall else 'FAIL'}")
    return 0 if overall else 1


COMMANDS = {"pressure": cmd_pressure, "temperature": cmd_temperature, "spectrum": cmd_spectrum,
            "verify": cmd_verify, "orbits": cmd_orbits}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermospec",
                                     description="Temperature functions and dimension spectra "
                                                 "of equilibrium states on subshifts of finite type.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration "
                       "(or bundled:<name> for system_a, system_b, golden_mean)")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help="sampling seed (overrides the config)")
        p.add_argument("--checks", help="comma-separated subset of checks to run")
        p.add_argument("--quiet", action="store_true")
    return parser


def _resolve(path: str) -> Path:
    if path.startswith("bundled:"):
        from .config import bundled_config_path
        return bundled_config_path(path.split(":", 1)[1])
    return Path(path)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    log = (lambda msg: None) if args.quiet else print
    checks = None if args.checks is None else [c.strip() for c in args.checks.split(",") if c.strip()]
    try:
        cfg = load_config(_resolve(args.config), seed=args.seed, checks=checks, outputs=args.out)
        return COMMANDS[args.command](cfg, cfg.outputs, log)
    except ThermospecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


__all__ = ["main", "build_parser", "verify_checks", "golden_check", "read_csv", "parse_word"]
