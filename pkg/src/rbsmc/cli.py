"""Command-line front end.

Exit codes: 0 success, 1 property violation, 2 infeasible LMI, 3 configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import lmi as _lmi
from .config import RunConfig, load_config
from .errors import ConfigError, DesignStepError, Infeasible, RbsmcError
from .rota_baxter import commute_with_output, property_suite
from .simulator import simulate, summary
from .smc import deform, run_design
from .spectral import build_companion, spectrum_report

EXIT_OK, EXIT_VIOLATION, EXIT_INFEASIBLE, EXIT_CONFIG = 0, 1, 2, 3


def _clean(obj):
    """JSON-safe copy: arrays to lists, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _emit(report: dict, out_dir: Path, name: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    text = json.dumps(_clean(report), indent=2)
    path.write_text(text + "\n")
    print(text)
    return path


def _need(cfg: RunConfig, section: str):
    val = getattr(cfg, section)
    if val is None:
        raise ConfigError(f"missing section '{section}'")
    return val


def _problem(cfg, dfm):
    return _lmi.LmiProblem.from_deformed(dfm, epsilon_margin=cfg.lmi.epsilon_margin,
                                         q_lower=cfg.lmi.q_lower, q_upper=cfg.lmi.q_upper)


def _load_certificate(cfg: RunConfig, prob, override=None):
    """Certificate from ``--certificate``, else from the config, else ``None``."""
    src = override if override is not None else cfg.certificate
    if src is None:
        return None, None
    if isinstance(src, (str, Path)):
        path = Path(src) if override is not None else cfg.resolve(src)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"certificate: cannot read {path} ({exc.strerror})") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"certificate {path}: line {exc.lineno}: {exc.msg}") from exc
        origin = str(path)
    else:
        data, origin = src, data_origin(src)
    try:
        return _lmi.StabilityCertificate.from_dict(data, prob), origin
    except (KeyError, ValueError, RbsmcError) as exc:
        raise ConfigError(f"certificate: {exc}") from exc


def data_origin(data):
    return str(data.get("source", "inline"))


def _history(hist, n, tau):
    return np.asarray(hist, dtype=float) if hist is not None else np.zeros((tau + 1, n))


def cmd_verify_rb(cfg: RunConfig, args) -> int:
    p = cfg.operator_obj()
    v = cfg.verify
    seed = args.seed if args.seed is not None else v.seed
    report = property_suite(p, v.samples, v.triples, v.dims, seed, args.tolerance_scale)
    if cfg.system is not None:
        sys_ = cfg.system.build()
        if sys_.c.shape[0] == sys_.n and (p.dim is None or p.dim == sys_.n):
            res = max(commute_with_output(p, sys_.c, sys_.a), commute_with_output(p, sys_.c, sys_.a_d))
            report["output_commutation"] = {"residual": res, "applicable": True}
        else:
            report["output_commutation"] = {"applicable": False,
                                            "note": "C is not square; C P(M) = P(C M) is undefined"}
    _emit(report, _out(cfg, args), "verify_rb.json")
    return EXIT_OK if report["ok"] else EXIT_VIOLATION


def _out(cfg, args) -> Path:
    if args.out is not None:
        return Path(args.out)
    if cfg.output_dir is not None:
        return cfg.resolve(cfg.output_dir)
    return Path(".")


def _design_args(cfg):
    d = _need(cfg, "design")
    return dict(k=np.asarray(d.k), r0=d.r0, r_d0=d.r_d0, rho_max=d.rho_max, phi=d.phi, rho=d.rho)


def cmd_design(cfg: RunConfig, args) -> int:
    sys_ = _need(cfg, "system").build()
    d = _need(cfg, "design")
    p = cfg.operator_obj()
    dfm = deform(sys_, p)
    prob = _problem(cfg, dfm)
    notes = []
    cert, origin = _load_certificate(cfg, prob, args.certificate)
    code = EXIT_OK
    if cert is None:
        try:
            cert = _lmi.minimize_gamma(prob, cfg.lmi.gamma_hi)
            origin = "solved"
        except Infeasible as exc:
            notes.append(f"LMI infeasible: {exc}")
            code = EXIT_INFEASIBLE
    if dfm.is_degenerate:
        notes.append("degenerate: trivially stable (Pi = 0, reduced dynamics x(k+1) = 0)")
    hist = _history(d.x_history, sys_.n, sys_.tau)
    try:
        state = run_design(sys_, p, d.k, d.r0, d.r_d0, d.rho_max, d.phi, d.rho, certificate=cert,
                           x_history=hist, s0_norm=d.s0_norm, deformed=dfm)
    except DesignStepError as exc:
        state = exc.state
        code = EXIT_VIOLATION
    report = state.to_dict()
    report.update({"pi": dfm.pi, "a_bar": dfm.a_bar, "a_dbar": dfm.a_dbar, "d_bar": dfm.d_bar,
                   "cb_p": dfm.cb_p, "degenerate": dfm.is_degenerate, "notes": notes,
                   "certificate_source": origin})
    if cert is not None:
        report["certificate"] = cert.to_dict()
    if code == EXIT_OK and not state.passed:
        code = EXIT_VIOLATION
    _emit(report, _out(cfg, args), "design.json")
    return code


def cmd_certify(cfg: RunConfig, args) -> int:
    sys_ = _need(cfg, "system").build()
    dfm = deform(sys_, cfg.operator_obj())
    prob = _problem(cfg, dfm)
    try:
        cert = _lmi.minimize_gamma(prob, cfg.lmi.gamma_hi)
    except Infeasible as exc:
        _emit({"feasible": False, "error": str(exc)}, _out(cfg, args), "certificate.json")
        return EXIT_INFEASIBLE
    design_hist = None
    design_report = None
    if args.design is not None:
        try:
            design_report = json.loads(Path(args.design).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"--design: cannot load {args.design}: {exc}") from exc
    if cfg.design is not None:
        design_hist = cfg.design.x_history
    hist = _history(design_hist, sys_.n, sys_.tau)
    cert.v0, cert.r = _lmi.v0_and_r(cert, hist, sys_.tau)
    check = _lmi.validate_certificate(prob, cert)
    suff = _lmi.feasibility_sufficient(prob, 0.5, cert.gamma)
    report = cert.to_dict()
    report.update({"feasible": True, "validation_max_eig": check,
                   "validated": check <= -0.5 * prob.epsilon_margin,
                   "sigma_max_f": suff.sigma_max_f, "sufficient_condition_ok": suff.ok,
                   "l2_gain": cert.effective_gain if cert.v0 == 0 else None,
                   "q_band": [prob.q_lower, prob.q_upper]})
    if design_report is not None and cfg.design is not None:
        # step (vi) on the freshly solved certificate
        st = None
        try:
            st = run_design(sys_, cfg.operator_obj(), cfg.design.k, cfg.design.r0, cfg.design.r_d0,
                            cfg.design.rho_max, cfg.design.phi, cfg.design.rho, certificate=cert,
                            x_history=hist, s0_norm=cfg.design.s0_norm, deformed=dfm)
        except DesignStepError as exc:
            st = exc.state
        report["design_step_flags"] = st.step_flags
        report["band_lhs"] = st.band_lhs
    _emit(report, _out(cfg, args), "certificate.json")
    return EXIT_OK if report["validated"] else EXIT_VIOLATION


def cmd_spectral(cfg: RunConfig, args) -> int:
    sys_ = _need(cfg, "system").build()
    dfm = deform(sys_, cfg.operator_obj())
    form = build_companion(dfm.a_bar, dfm.a_dbar, sys_.tau)
    report = spectrum_report(form)
    _emit(report, _out(cfg, args), "spectrum.json")
    return EXIT_OK if report["stable"] else EXIT_VIOLATION


def cmd_simulate(cfg: RunConfig, args) -> int:
    sys_ = _need(cfg, "system").build()
    sim = _need(cfg, "sim")
    dfm = deform(sys_, cfg.operator_obj())
    prob = _problem(cfg, dfm)
    cert, origin = _load_certificate(cfg, prob, args.certificate)
    hist = _history(sim.initial_history, sys_.n, sys_.tau)
    kw = {}
    phi = None
    if sim.mode == "closed":
        kw = {k: v for k, v in _design_args(cfg).items() if k in ("k", "rho", "phi")}
        kw["k_gain"] = kw.pop("k")
        phi = kw["phi"]
    elif cfg.design is not None:
        phi = cfg.design.phi
    dist = sim.disturbance
    if args.seed is not None and isinstance(dist, dict) and dist.get("kind") == "uniform_ball":
        dist = dict(dist, seed=args.seed)
    traj = simulate(dfm, sim.horizon, hist, mode=sim.mode, disturbance=dist, cert=cert,
                    seed=args.seed, **kw)
    out = _out(cfg, args)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "trajectory.csv"
    traj.to_csv(csv_path)
    report = summary(traj, phi, cert)
    report["csv"] = str(csv_path)
    report["certificate_source"] = origin
    _emit(report, out, "simulate_summary.json")
    return EXIT_OK


COMMANDS = {
    "verify-rb": cmd_verify_rb,
    "design": cmd_design,
    "certify": cmd_certify,
    "spectral": cmd_spectral,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="run configuration (JSON)")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--seed", type=int, default=None, help="random seed override")
    common.add_argument("--tolerance-scale", type=float, default=1.0,
                        help="multiplies all residual tolerances")
    parser = argparse.ArgumentParser(prog="rbsmc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify-rb", parents=[common], help="check operator identities on random samples")
    p = sub.add_parser("design", parents=[common], help="run the sequential design procedure")
    p.add_argument("--certificate", default=None, help="certificate JSON from 'certify'")
    p = sub.add_parser("certify", parents=[common], help="solve the stability LMI")
    p.add_argument("--design", default=None, help="design JSON; re-evaluates the band check")
    sub.add_parser("spectral", parents=[common], help="roots of the delayed characteristic equation")
    p = sub.add_parser("simulate", parents=[common], help="roll out a trajectory to CSV")
    p.add_argument("--certificate", default=None, help="certificate JSON for the Lyapunov column")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if not (args.tolerance_scale > 0 and math.isfinite(args.tolerance_scale)):
        print("error: --tolerance-scale must be positive", file=sys.stderr)
        return EXIT_CONFIG
    for name in ("certificate", "design"):
        if not hasattr(args, name):
            setattr(args, name, None)
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except RbsmcError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
