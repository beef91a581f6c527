"""Run configuration: JSON loading, schema validation and defaults."""

from __future__ import annotations

import ast
import copy
import hashlib
import json
import math
import operator
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError
from .potential import JacobianPotential, Potential, PotentialFamily
from .sft import Sft, cylinders, validate

ALL_CHECKS = ("temperature", "gibbs", "conformality", "legendre", "completeness",
              "variational", "concentration", "irregular", "degeneracy", "golden")

DEFAULTS = {
    "t_grid": {"min": -2.0, "max": 2.0, "step": 0.5},
    "depths": {"gibbs_depth": 12, "endpoint_period": 12, "conformality_depth": 10},
    "sampling": {"n": 5000, "N": 2000, "epsilon": 0.02, "seed": 0,
                 "variational_samples": 50, "dump": 0},
    "irregular": {"orbit_a": "0", "orbit_b": "1", "growth_factor": 16, "first_block": 1,
                  "horizon": 1000000},
    "q_probe": 40.0,
    "outputs": "thermospec-out",
}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {"log": math.log, "log2": math.log2, "log10": math.log10, "exp": math.exp,
          "sqrt": math.sqrt}
_NAMES = {"pi": math.pi, "e": math.e}


def evaluate_expression(text: str) -> float:
    """Evaluate an arithmetic expression such as ``"-log(2)"`` without ``eval``."""
    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](walk(node.operand))
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](walk(node.args[0]))
        raise ValueError(f"unsupported expression element {ast.dump(node)}")

    try:
        return float(walk(ast.parse(text, mode="eval")))
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError) as exc:
        raise ConfigError(f"cannot evaluate {text!r}: {exc}") from None


def _number(x, where):
    if isinstance(x, str):
        try:
            return evaluate_expression(x)
        except ConfigError as exc:
            raise ConfigError(str(exc), where) from None
    return float(x)


def load_schema() -> dict:
    return json.loads(resources.files("thermospec").joinpath("config_schema.json").read_text())


def bundled_config_path(name: str) -> Path:
    return Path(str(resources.files("thermospec").joinpath("configs", f"{name}.json")))


@dataclass
class RunConfig:
    """Validated configuration with defaults filled in."""

    raw: dict
    base_dir: Path
    sft: Sft
    family: PotentialFamily
    q_grid: np.ndarray
    t_grid: np.ndarray

    @property
    def name(self):
        return self.raw.get("name", "unnamed")

    @property
    def depths(self):
        return self.raw["depths"]

    @property
    def sampling(self):
        return self.raw["sampling"]

    @property
    def irregular(self):
        return self.raw["irregular"]

    @property
    def seed(self) -> int:
        return int(self.raw["sampling"]["seed"])

    @property
    def checks(self):
        return tuple(self.raw.get("checks") or ALL_CHECKS)

    @property
    def outputs(self) -> Path:
        return Path(self.raw["outputs"])

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form after defaults and overrides.

        The output directory is left out so that moving a run does not
        change its identity.
        """
        content = {k: v for k, v in self.raw.items() if k != "outputs"}
        text = json.dumps(content, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def golden_path(self):
        g = self.raw.get("golden")
        return None if g is None else (self.base_dir / g)


def _grid(entry, where):
    lo, hi, step = entry["min"], entry["max"], entry["step"]
    if hi <= lo:
        raise ConfigError("max must exceed min", where)
    k = int(math.floor((hi - lo) / step + 1e-9))
    return np.round(lo + step * np.arange(k + 1), 12)


def _potential(sft, entry, base_dir, where, cls=Potential):
    if isinstance(entry, str):
        path = base_dir / entry
        try:
            entry = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read potential file {path}: {exc}", where) from None
    depth = entry["depth"]
    values = entry["values"]
    try:
        if isinstance(values, list):
            n = len(cylinders(sft, depth))
            if len(values) != n:
                raise ConfigError(f"expected {n} values for depth {depth}", f"{where}.values")
            pot = Potential(sft, depth, [_number(v, f"{where}.values[{i}]")
                                         for i, v in enumerate(values)])
        else:
            pot = Potential.from_mapping(sft, depth, {k: _number(v, f"{where}.values.{k}")
                                                      for k, v in values.items()})
        return cls.wrap(pot) if cls is JacobianPotential else pot
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(str(exc), where) from None


def parse_config(raw: dict, base_dir=".", seed=None, checks=None, outputs=None) -> RunConfig:
    """Validate a config mapping and build the system it describes.

    Raises
    ------
    ConfigError
        With the JSON path of the offending field.
    """
    try:
        jsonschema.validate(raw, load_schema())
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(exc.message, where) from None
    cfg = copy.deepcopy(raw)
    for key, default in DEFAULTS.items():
        if isinstance(default, dict):
            cfg[key] = {**default, **cfg.get(key, {})}
        else:
            cfg.setdefault(key, default)
    if seed is not None:
        cfg["sampling"]["seed"] = int(seed)
    if checks is not None:
        unknown = [c for c in checks if c not in ALL_CHECKS]
        if unknown:
            raise ConfigError(f"unknown checks {unknown}", "checks")
        cfg["checks"] = list(checks)
    if outputs is not None:
        cfg["outputs"] = str(outputs)
    q = cfg["q_grid"]
    if not q["min"] < 1 < q["max"]:
        raise ConfigError("q_grid must satisfy min < 1 < max", "q_grid")
    base_dir = Path(base_dir)
    try:
        sft = validate(np.array(cfg["system"]["transitions"]))
    except Exception as exc:
        raise ConfigError(str(exc), "system.transitions") from None
    g = _potential(sft, cfg["system"]["g"], base_dir, "system.g")
    jac = _potential(sft, cfg["system"]["jac"], base_dir, "system.jac", JacobianPotential)
    family = PotentialFamily.build(g, jac)
    return RunConfig(cfg, base_dir, sft, family, _grid(q, "q_grid"),
                     _grid(cfg["t_grid"], "t_grid"))


def load_config(path, **overrides) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", str(path)) from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, f"{path}:line {exc.lineno} column {exc.colno}") from None
    return parse_config(raw, path.parent, **overrides)
