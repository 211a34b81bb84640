"""JSON run configuration.

A run is one JSON document::

    {"system":   {"a": [[..]], "a_d": [[..]], "b": [[..]], "c": [[..]], "d": [[..]],
                  "tau": 1, "delta_max": 0.1},
     "operator": {"kind": "scalar", "lambda": 0.5},
     "design":   {"r0": 2, "r_d0": 2, "rho_max": 0.2, "k": [[1, 0.5]], "phi": 0.5,
                  "rho": 0.2, "s0_norm": 1.5, "x_history": [[0.5, 0.5], [0, 0]]},
     "lmi":      {"gamma_hi": 1.0, "epsilon_margin": 1e-6, "q_lower": 0.0, "q_upper": 10.0},
     "certificate": {"q": [[..]], "y_tilde": [[..]], "gamma": 0.24}  or  "path/to/cert.json",
     "sim":      {"horizon": 20, "mode": "closed", "disturbance": {"kind": "zero"},
                  "initial_history": [[1.5, 0], [0, 0]]},
     "verify":   {"samples": 200, "triples": 100, "dims": [2, 3, 4, 5], "seed": 0},
     "output_dir": "out"}

Only ``system`` and ``operator`` are needed by most commands; histories
are listed newest first.  Matrices are row-major nested arrays.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .errors import ConfigError, RbsmcError
from .rota_baxter import RotaBaxterOperator
from .smc import DelayedSystem


def _number(v, where, *, positive=False, nonneg=False, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{where}: must be finite")
    if integer and int(v) != v:
        raise ConfigError(f"{where}: expected an integer, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{where}: must be positive, got {v!r}")
    if nonneg and not v >= 0:
        raise ConfigError(f"{where}: must be nonnegative, got {v!r}")
    return int(v) if integer else float(v)


def _matrix(v, where, *, vector_ok=False):
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{where}: expected a non-empty nested array")
    if all(not isinstance(r, list) for r in v):
        if not vector_ok:
            raise ConfigError(f"{where}: expected a matrix (array of rows)")
        v = [[x] for x in v]
    rows = []
    width = None
    for i, row in enumerate(v):
        if not isinstance(row, list):
            raise ConfigError(f"{where}[{i}]: expected a row array")
        if width is None:
            width = len(row)
        if len(row) != width or width == 0:
            raise ConfigError(f"{where}[{i}]: ragged or empty row")
        rows.append([_number(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)])
    return rows


def _states(v, where):
    """List of state vectors; a flat list is one state."""
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{where}: expected a non-empty list of state vectors")
    if all(not isinstance(r, list) for r in v):
        v = [v]
    return _matrix(v, where)


def _section(data, key, required=True):
    if key not in data or data[key] is None:
        if required:
            raise ConfigError(f"missing section '{key}'")
        return None
    if not isinstance(data[key], dict):
        raise ConfigError(f"{key}: expected an object")
    return data[key]


def _field(sec, name, where):
    if name not in sec:
        raise ConfigError(f"{where}.{name}: missing field '{name}'")
    return sec[name]


def _unknown(sec, allowed, where):
    extra = sorted(set(sec) - set(allowed))
    if extra:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(extra)}")


@dataclass
class SystemSpec:
    a: list
    a_d: list
    b: list
    c: list
    d: list
    tau: int
    delta_max: float

    @classmethod
    def from_dict(cls, sec):
        keys = ("a", "a_d", "b", "c", "d", "tau", "delta_max")
        _unknown(sec, keys, "system")
        vals = {k: _matrix(_field(sec, k, "system"), f"system.{k}", vector_ok=k in ("b", "d"))
                for k in ("a", "a_d", "b", "c", "d")}
        vals["tau"] = _number(_field(sec, "tau", "system"), "system.tau", integer=True, positive=True)
        vals["delta_max"] = _number(sec.get("delta_max", 0.0), "system.delta_max", nonneg=True)
        spec = cls(**vals)
        spec.build()
        return spec

    def build(self) -> DelayedSystem:
        try:
            return DelayedSystem(np.array(self.a), np.array(self.a_d), np.array(self.b),
                                 np.array(self.c), np.array(self.d), self.tau, self.delta_max)
        except (RbsmcError, ValueError) as exc:
            raise ConfigError(f"system: {exc}") from exc


@dataclass
class DesignSpec:
    r0: float
    r_d0: float
    rho_max: float
    k: list
    phi: float
    rho: float
    s0_norm: Optional[float] = None
    x_history: Optional[list] = None

    @classmethod
    def from_dict(cls, sec):
        _unknown(sec, ("r0", "r_d0", "rho_max", "k", "phi", "rho", "s0_norm", "x_history"), "design")
        vals = {k: _number(_field(sec, k, "design"), f"design.{k}", nonneg=True)
                for k in ("r0", "r_d0", "rho_max", "rho")}
        vals["phi"] = _number(_field(sec, "phi", "design"), "design.phi", positive=True)
        vals["k"] = _matrix(_field(sec, "k", "design"), "design.k")
        if sec.get("s0_norm") is not None:
            vals["s0_norm"] = _number(sec["s0_norm"], "design.s0_norm", nonneg=True)
        if sec.get("x_history") is not None:
            vals["x_history"] = _states(sec["x_history"], "design.x_history")
        return cls(**vals)


@dataclass
class LmiSpec:
    gamma_hi: float = 1.0
    epsilon_margin: float = 1e-6
    q_lower: float = 0.0
    q_upper: float = 10.0

    @classmethod
    def from_dict(cls, sec):
        _unknown(sec, ("gamma_hi", "epsilon_margin", "q_lower", "q_upper"), "lmi")
        out = cls()
        for k in ("gamma_hi", "epsilon_margin", "q_upper"):
            if k in sec:
                setattr(out, k, _number(sec[k], f"lmi.{k}", positive=True))
        if "q_lower" in sec:
            out.q_lower = _number(sec["q_lower"], "lmi.q_lower", nonneg=True)
        if not out.q_lower < 1.0 < out.q_upper:
            raise ConfigError("lmi: need q_lower < 1 < q_upper")
        return out


@dataclass
class SimSpec:
    horizon: int
    mode: str = "closed"
    disturbance: Optional[Any] = None
    initial_history: Optional[list] = None

    @classmethod
    def from_dict(cls, sec):
        _unknown(sec, ("horizon", "mode", "disturbance", "initial_history"), "sim")
        horizon = _number(_field(sec, "horizon", "sim"), "sim.horizon", integer=True)
        if horizon < 1:
            raise ConfigError(f"sim.horizon: must be at least 1, got {horizon}")
        mode = sec.get("mode", "closed")
        if mode not in ("closed", "reduced"):
            raise ConfigError(f"sim.mode: expected 'closed' or 'reduced', got {mode!r}")
        dist = sec.get("disturbance")
        if dist is not None and not isinstance(dist, (dict, list)):
            raise ConfigError("sim.disturbance: expected an object or a sequence")
        if isinstance(dist, dict) and "kind" not in dist:
            raise ConfigError("sim.disturbance.kind: missing field 'kind'")
        hist = sec.get("initial_history")
        if hist is not None:
            hist = _states(hist, "sim.initial_history")
        return cls(horizon, mode, dist, hist)


@dataclass
class VerifySpec:
    samples: int = 200
    triples: int = 100
    dims: list = field(default_factory=lambda: [2, 3, 4, 5])
    seed: int = 0

    @classmethod
    def from_dict(cls, sec):
        _unknown(sec, ("samples", "triples", "dims", "seed"), "verify")
        out = cls()
        for k in ("samples", "triples", "seed"):
            if k in sec:
                setattr(out, k, _number(sec[k], f"verify.{k}", integer=True, nonneg=True))
        if "dims" in sec:
            if not isinstance(sec["dims"], list) or not sec["dims"]:
                raise ConfigError("verify.dims: expected a non-empty list")
            out.dims = [_number(x, f"verify.dims[{i}]", integer=True, positive=True)
                        for i, x in enumerate(sec["dims"])]
        return out


@dataclass
class RunConfig:
    operator: dict
    system: Optional[SystemSpec] = None
    design: Optional[DesignSpec] = None
    lmi: LmiSpec = field(default_factory=LmiSpec)
    sim: Optional[SimSpec] = None
    verify: VerifySpec = field(default_factory=VerifySpec)
    certificate: Optional[Any] = None
    output_dir: Optional[str] = None
    base_dir: Optional[str] = field(default=None, compare=False, repr=False)

    @classmethod
    def from_dict(cls, data: dict, base_dir=None) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("top level: expected a JSON object")
        _unknown(data, ("system", "operator", "design", "lmi", "sim", "verify", "certificate",
                        "output_dir", "comment"), "top level")
        op = _section(data, "operator")
        try:
            op = RotaBaxterOperator.from_dict(op).to_dict()
        except (RbsmcError, ValueError) as exc:
            raise ConfigError(f"operator: {exc}") from exc
        cfg = cls(op)
        sec = _section(data, "system", required=False)
        cfg.system = SystemSpec.from_dict(sec) if sec is not None else None
        sec = _section(data, "design", required=False)
        cfg.design = DesignSpec.from_dict(sec) if sec is not None else None
        sec = _section(data, "lmi", required=False)
        cfg.lmi = LmiSpec.from_dict(sec) if sec is not None else LmiSpec()
        sec = _section(data, "sim", required=False)
        cfg.sim = SimSpec.from_dict(sec) if sec is not None else None
        sec = _section(data, "verify", required=False)
        cfg.verify = VerifySpec.from_dict(sec) if sec is not None else VerifySpec()
        cert = data.get("certificate")
        if cert is not None:
            if isinstance(cert, dict):
                for k in ("q", "y_tilde", "gamma"):
                    _field(cert, k, "certificate")
                cert = dict(cert, q=_matrix(cert["q"], "certificate.q"),
                            y_tilde=_matrix(cert["y_tilde"], "certificate.y_tilde"),
                            gamma=_number(cert["gamma"], "certificate.gamma", positive=True))
            elif not isinstance(cert, str):
                raise ConfigError("certificate: expected an object or a path string")
        cfg.certificate = cert
        out = data.get("output_dir")
        if out is not None and not isinstance(out, str):
            raise ConfigError("output_dir: expected a string")
        cfg.output_dir = out
        cfg.base_dir = str(base_dir) if base_dir is not None else None
        cfg._check_consistency()
        return cfg

    def _check_consistency(self):
        if self.system is None:
            return
        n = len(self.system.a)
        m = len(self.system.b[0])
        tau = self.system.tau
        if self.design is not None:
            k = self.design.k
            if (len(k), len(k[0])) != (m, n):
                raise ConfigError(f"design.k: expected shape {m}x{n}, got {len(k)}x{len(k[0])}")
            if self.design.x_history is not None:
                _check_hist(self.design.x_history, n, tau, "design.x_history")
        if self.sim is not None and self.sim.initial_history is not None:
            _check_hist(self.sim.initial_history, n, tau, "sim.initial_history")
        op = self.operator_obj()
        if op.dim is not None and op.dim != n:
            raise ConfigError(f"operator: acts on {op.dim}x{op.dim} matrices but n = {n}")

    def operator_obj(self) -> RotaBaxterOperator:
        return RotaBaxterOperator.from_dict(self.operator)

    def to_dict(self) -> dict:
        out = {"operator": self.operator}
        if self.system is not None:
            out["system"] = asdict(self.system)
        if self.design is not None:
            out["design"] = {k: v for k, v in asdict(self.design).items() if v is not None}
        out["lmi"] = asdict(self.lmi)
        if self.sim is not None:
            out["sim"] = {k: v for k, v in asdict(self.sim).items() if v is not None}
        out["verify"] = asdict(self.verify)
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if self.output_dir is not None:
            out["output_dir"] = self.output_dir
        return out

    def resolve(self, path) -> Path:
        p = Path(path)
        if not p.is_absolute() and self.base_dir is not None:
            p = Path(self.base_dir) / p
        return p


def _check_hist(hist, n, tau, where):
    if len(hist[0]) != n:
        raise ConfigError(f"{where}: states must have length {n}")
    if len(hist) != tau + 1:
        raise ConfigError(f"{where}: expected tau + 1 = {tau + 1} states, got {len(hist)}")


def load_config(path) -> RunConfig:
    """Read and validate a config file; JSON errors report line and column."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return RunConfig.from_dict(data, base_dir=path.parent)


def example_path(name: str) -> Path:
    """Path of a bundled example config, e.g. ``example_path("nondegenerate")``."""
    path = Path(__file__).parent / "data" / f"{name}.json"
    if not path.is_file():
        raise ConfigError(f"no bundled example named {name!r}")
    return path
