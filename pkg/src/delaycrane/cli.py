"""Command-line front end: configured runs, spectra, witnesses, and sweeps.

Scenarios are described by a JSON document (or one of the built-in presets)
and results land in plot-ready files: trajectory CSV plus a summary JSON for
``simulate``, a roots CSV for ``spectrum``, and an abscissa matrix CSV for
``sweep``.  All outputs are deterministic for a fixed configuration.

Exit codes: 0 success, 1 configuration error, 2 blow-up without
--expect-divergence (or a failed witness residual check), 3 infeasible
witness parameters.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys

import numpy as np

from .diagnostics import auto_varpi, fit_exponential_rate
from .model import (CraneParams, DegenerateParametersError, InitialData,
                    Regime, TensionProfile, Variant, ZetaFormula,
                    equilibrium_constant, validate_params)
from .solver import Grid, SimConfig, mode_initial_data, simulate
from .spectral import (CharProblem, InfeasibleWitness, find_roots,
                       instability_witness_beta0, instability_witness_general,
                       stability_scan)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BLOWUP = 2
EXIT_INFEASIBLE = 3


class ConfigError(ValueError):
    """The scenario document is malformed or inconsistent."""


def _require_keys(doc: dict, allowed: set[str], context: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {context}: "
                          + ", ".join(sorted(unknown)))


@dataclasses.dataclass
class Scenario:
    """Fully resolved scenario: everything a command needs to run."""

    regime: Regime
    params: CraneParams
    profile: TensionProfile
    init: InitialData
    sim: SimConfig
    spectrum_region: tuple[float, float, float, float] | None
    root_tol: float
    cell: float
    sweep: dict | None
    raw: dict


# -- presets -------------------------------------------------------------------

def _preset_theorem_t2() -> dict:
    return {
        "variant": "general",
        "params": {"m": 1.0, "M": 1.0, "alpha": 0.5, "beta": 1.5,
                   "sigma": 1.0, "tau": 0.5, "K": 1.0},
        "tension": {"constant": 1.0},
        "initial": {"preset": "sine"},
        "sim": {"N": 200, "cfl": 0.5, "t_final": 40.0},
    }


def _preset_lrkv_rate() -> dict:
    doc = _preset_theorem_t2()
    doc["sim"]["t_final"] = 60.0
    return doc


def _witness_doc(params: CraneParams, variant: str) -> dict:
    return {
        "variant": variant,
        "convergent": False,
        "params": {"m": params.m, "M": params.M, "alpha": params.alpha,
                   "beta": params.beta, "sigma": params.sigma,
                   "tau": params.tau, "K": params.K},
        "tension": {"constant": 1.0},
        "initial": {"preset": "mode", "lambda": [params.sigma, 0.0]},
        "sim": {"N": 200, "cfl": 0.5, "t_final": 6.0,
                "blowup_threshold": 1e12},
    }


def _preset_theorem_non() -> dict:
    params, _ = instability_witness_beta0(sigma=1.0, m=1.0)
    return _witness_doc(params, "beta0")


def _preset_theorem_non2() -> dict:
    out = instability_witness_general(sigma=1.0, m=1.0, alpha=4.0, beta=0.5)
    params, _ = out
    return _witness_doc(params, "general")


PRESETS = {
    "theorem-t2": _preset_theorem_t2,
    "lrkv-rate": _preset_lrkv_rate,
    "theorem-non": _preset_theorem_non,
    "theorem-non2": _preset_theorem_non2,
}


# -- configuration parsing -----------------------------------------------------

def _parse_params(doc: dict, profile: TensionProfile,
                  regime: Regime) -> CraneParams:
    _require_keys(doc, {"m", "M", "alpha", "beta", "sigma", "tau", "K",
                        "varpi"}, "params")
    required = {"m", "M", "alpha", "sigma", "tau", "K"}
    missing = required - set(doc)
    if missing:
        raise ConfigError("missing params: " + ", ".join(sorted(missing)))
    varpi = doc.get("varpi", 0.01)
    kwargs = dict(m=float(doc["m"]), M=float(doc["M"]),
                  alpha=float(doc["alpha"]), beta=float(doc.get("beta", 0.0)),
                  sigma=float(doc["sigma"]), tau=float(doc["tau"]),
                  K=float(doc["K"]))
    if varpi == "auto":
        base = CraneParams(varpi=0.01, **kwargs)
        varpi = auto_varpi(base, profile, regime)
    return CraneParams(varpi=float(varpi), **kwargs)


def _parse_tension(doc: dict) -> TensionProfile:
    _require_keys(doc, {"constant", "samples", "a0"}, "tension")
    if "constant" in doc:
        if "samples" in doc:
            raise ConfigError("tension: give either constant or samples")
        return TensionProfile.constant(float(doc["constant"]))
    if "samples" not in doc or "a0" not in doc:
        raise ConfigError("tension: sampled profiles need samples and a0")
    return TensionProfile(samples=np.asarray(doc["samples"], dtype=float),
                          a0=float(doc["a0"]))


def _table_fn(values, lo: float, hi: float):
    values = np.asarray(values, dtype=float)
    grid = np.linspace(lo, hi, len(values))
    return lambda x: np.interp(np.asarray(x, dtype=float), grid, values)


def _parse_initial(doc: dict, params: CraneParams,
                   regime: Regime) -> InitialData:
    _require_keys(doc, {"preset", "value", "lambda", "y0", "y1", "history"},
                  "initial")
    preset = doc.get("preset", "custom")
    if preset == "zero":
        return InitialData.zero()
    if preset == "constant":
        return InitialData.from_values(y0=float(doc.get("value", 1.0)))
    if preset == "sine":
        return InitialData.from_values(y0=lambda x: np.sin(np.pi * x))
    if preset == "mode":
        lam_re, lam_im = doc.get("lambda", [params.sigma, 0.0])
        return mode_initial_data(complex(lam_re, lam_im), params, regime)
    if preset != "custom":
        raise ConfigError(f"unknown initial-data preset {preset!r}")

    def lift(v, lo, hi):
        if v is None or isinstance(v, (int, float)):
            return v
        return _table_fn(v, lo, hi)

    return InitialData.from_values(
        y0=lift(doc.get("y0"), 0.0, 1.0),
        y1=lift(doc.get("y1"), 0.0, 1.0),
        history=lift(doc.get("history"), -params.tau, 0.0),
    )


def load_scenario(doc: dict, force: bool = False) -> Scenario:
    _require_keys(doc, {"variant", "convergent", "params", "tension",
                        "initial", "sim", "spectrum", "sweep"}, "scenario")
    try:
        variant = Variant(doc.get("variant", "general"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    regime = Regime(variant=variant, convergent=bool(doc.get("convergent",
                                                             True)))
    profile = _parse_tension(doc.get("tension", {"constant": 1.0}))
    params = _parse_params(doc.get("params", {}), profile, regime)
    init = _parse_initial(doc.get("initial", {"preset": "zero"}), params,
                          regime)

    sim_doc = dict(doc.get("sim", {}))
    _require_keys(sim_doc, {"N", "cfl", "t_final", "sample_every", "tol_conv",
                            "blowup_threshold"}, "sim")
    grid = Grid(int(sim_doc.pop("N", 200)))
    sim = SimConfig(grid=grid, regime=regime, force=force,
                    **{k: type(getattr(SimConfig, k))(v)
                       for k, v in sim_doc.items()})

    spec_doc = dict(doc.get("spectrum", {}))
    _require_keys(spec_doc, {"region", "root_tol", "cell"}, "spectrum")
    region = spec_doc.get("region")
    if region is not None:
        region = tuple(float(v) for v in region)
        if len(region) != 4:
            raise ConfigError("spectrum.region must have 4 numbers")

    sweep_doc = doc.get("sweep")
    if sweep_doc is not None:
        _require_keys(sweep_doc, {"axis1", "axis2"}, "sweep")
        for ax in ("axis1", "axis2"):
            if ax not in sweep_doc:
                raise ConfigError(f"sweep needs {ax}")
            _require_keys(sweep_doc[ax], {"name", "values"}, f"sweep.{ax}")

    return Scenario(regime=regime, params=params, profile=profile, init=init,
                    sim=sim, spectrum_region=region,
                    root_tol=float(spec_doc.get("root_tol", 1e-8)),
                    cell=float(spec_doc.get("cell", 0.25)),
                    sweep=sweep_doc, raw=doc)


def _load_doc(args) -> dict:
    if args.preset is not None:
        if args.config is not None:
            raise ConfigError("give a config path or --preset, not both")
        if args.preset not in PRESETS:
            raise ConfigError(f"unknown preset {args.preset!r}; choose from "
                              + ", ".join(sorted(PRESETS)))
        return PRESETS[args.preset]()
    if args.config is None:
        raise ConfigError("a config path or --preset is required")
    try:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return doc


# -- output writers ------------------------------------------------------------

TRAJECTORY_COLUMNS = ["t", "E0", "E1", "E_total", "normH", "conserved",
                      "dist_eq"]


def write_trajectory_csv(path: str, samples) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for s in samples:
            row = [repr(getattr(s, c)) if getattr(s, c) is not None else ""
                   for c in TRAJECTORY_COLUMNS]
            writer.writerow(row)


def write_roots_csv(path: str, roots) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["re_lambda", "im_lambda", "residual", "multiplicity",
                         "note"])
        for r in roots:
            note = "equilibrium mode" if abs(r.lam) < 1e-10 else ""
            writer.writerow([repr(r.lam.real), repr(r.lam.imag),
                             repr(r.residual), r.multiplicity, note])


def _summary(scenario: Scenario, result, fit_error: str | None,
             fit) -> dict:
    p = scenario.params
    zetas = {}
    for formula in ZetaFormula:
        try:
            zetas[formula.value] = equilibrium_constant(
                scenario.init, p, scenario.regime, formula,
                n=scenario.sim.grid.N)
        except DegenerateParametersError as exc:
            zetas[formula.value] = None
            zetas[formula.value + "_error"] = str(exc)
    if (zetas.get("paper") is not None
            and zetas.get("conservation") is not None):
        zetas["discrepancy"] = zetas["paper"] - zetas["conservation"]
    summary = {
        "params": {f.name: getattr(p, f.name)
                   for f in dataclasses.fields(CraneParams)},
        "variant": scenario.regime.variant.value,
        "convergent_regime": scenario.regime.convergent,
        "hypothesis_report": validate_params(p, scenario.profile,
                                             scenario.regime),
        "zeta": zetas,
        "events": [{"kind": e.kind, "t": e.t, "detail": e.detail}
                   for e in result.events],
        "t_final": result.final_state.t,
        "n_samples": len(result.samples),
        "final": {c: getattr(result.samples[-1], c)
                  for c in TRAJECTORY_COLUMNS},
    }
    if fit is not None:
        summary["rate_fit"] = {"rate": fit.rate, "intercept": fit.intercept,
                               "r_squared": fit.r_squared,
                               "window": list(fit.window)}
    else:
        summary["rate_fit"] = None
        summary["rate_fit_error"] = fit_error
    return summary


def _fit_rate(result):
    """Fit the decay (or growth) exponent on dist_eq, falling back to normH."""
    ts = result.times
    err = "no usable series"
    for name in ("dist_eq", "normH"):
        vs = result.series(name)
        if np.any(np.isnan(vs)):
            continue
        try:
            return fit_exponential_rate(ts, vs), None
        except ValueError as exc:
            err = f"{name}: {exc}"
    return None, err


# -- commands ------------------------------------------------------------------

def cmd_simulate(args) -> int:
    scenario = load_scenario(_load_doc(args), force=args.force)
    try:
        result = simulate(scenario.init, scenario.params, scenario.profile,
                          scenario.sim)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fit, fit_error = _fit_rate(result)
    write_trajectory_csv(args.csv, result.samples)
    summary = _summary(scenario, result, fit_error, fit)
    with open(args.summary, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    blew_up = any(e.kind == "blowup" for e in result.events)
    print(f"wrote {args.csv} and {args.summary} "
          f"({len(result.samples)} samples)")
    if blew_up and not args.expect_divergence:
        print("error: solution blew up (pass --expect-divergence if "
              "intentional)", file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OK


def cmd_spectrum(args) -> int:
    scenario = load_scenario(_load_doc(args), force=True)
    problem = CharProblem(variant=scenario.regime.variant,
                          params=scenario.params)
    roots = find_roots(problem, region=scenario.spectrum_region,
                       root_tol=scenario.root_tol, cell=scenario.cell)
    write_roots_csv(args.csv, roots)
    print(f"wrote {args.csv} ({len(roots)} roots)")
    return EXIT_OK


def cmd_witness(args) -> int:
    if args.alpha is None and args.beta is None:
        out = instability_witness_beta0(args.sigma, args.m)
    elif args.alpha is None:
        print("error: the general witness needs --alpha", file=sys.stderr)
        return EXIT_CONFIG
    else:
        out = instability_witness_general(args.sigma, args.m, args.alpha,
                                          args.beta or 0.0)
    if isinstance(out, InfeasibleWitness):
        print(f"infeasible: {out.message}", file=sys.stderr)
        return EXIT_INFEASIBLE
    params, root = out
    print(json.dumps({
        "params": {f.name: getattr(params, f.name)
                   for f in dataclasses.fields(CraneParams)},
        "lambda": [root.lam.real, root.lam.imag],
        "residual": root.residual,
        "converged": root.converged,
    }, indent=2, sort_keys=True))
    return EXIT_OK if root.converged else EXIT_BLOWUP


def cmd_sweep(args) -> int:
    scenario = load_scenario(_load_doc(args), force=True)
    if scenario.sweep is None:
        print("error: config has no 'sweep' section", file=sys.stderr)
        return EXIT_CONFIG
    problem = CharProblem(variant=scenario.regime.variant,
                          params=scenario.params)
    ax1 = scenario.sweep["axis1"]
    ax2 = scenario.sweep["axis2"]
    scan = stability_scan(
        problem,
        (ax1["name"], np.asarray(ax1["values"], dtype=float)),
        (ax2["name"], np.asarray(ax2["values"], dtype=float)),
        region=scenario.spectrum_region, root_tol=scenario.root_tol,
        cell=scenario.cell)
    with open(args.csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"{scan.axis1_name}\\{scan.axis2_name}"]
                        + [repr(float(v)) for v in scan.axis2_values])
        for v1, row in zip(scan.axis1_values, scan.abscissa):
            writer.writerow([repr(float(v1))] + [repr(float(v)) for v in row])
    print(f"wrote {args.csv} "
          f"({len(scan.axis1_values)}x{len(scan.axis2_values)} cells)")
    return EXIT_OK


# -- entry points ---------------------------------------------------------------

def _add_config_args(sub, csv_default: str):
    sub.add_argument("config", nargs="?", default=None,
                     help="scenario JSON path")
    sub.add_argument("--preset", choices=sorted(PRESETS), default=None,
                     help="use a built-in scenario instead of a config file")
    sub.add_argument("--csv", default=csv_default, help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delaycrane",
        description="Delayed overhead-crane simulations and spectra.")
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="integrate a scenario; write "
                          "trajectory CSV + summary JSON")
    _add_config_args(sim, "trajectory.csv")
    sim.add_argument("--summary", default="summary.json",
                     help="output summary JSON path")
    sim.add_argument("--force", action="store_true",
                     help="run even if convergence hypotheses fail")
    sim.add_argument("--expect-divergence", action="store_true",
                     help="treat blow-up as a successful outcome")
    sim.set_defaults(fn=cmd_simulate)

    spec = subs.add_parser("spectrum", help="find characteristic roots; "
                           "write roots CSV")
    _add_config_args(spec, "roots.csv")
    spec.set_defaults(fn=cmd_spectrum)

    wit = subs.add_parser("witness", help="construct an instability witness "
                          "and check its residual")
    wit.add_argument("--sigma", type=float, required=True)
    wit.add_argument("--m", type=float, required=True)
    wit.add_argument("--alpha", type=float, default=None,
                     help="delayed gain (triggers the general-variant witness)")
    wit.add_argument("--beta", type=float, default=None,
                     help="boundary-velocity gain for the general witness")
    wit.set_defaults(fn=cmd_witness)

    swp = subs.add_parser("sweep", help="spectral abscissa over a 2D "
                          "parameter grid; write matrix CSV")
    _add_config_args(swp, "sweep.csv")
    swp.set_defaults(fn=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    raise SystemExit(main())
