"""Command-line front end: ``wdwhittle {simulate,estimate,check,mc}``.

Exit codes: 0 success, 1 a condition check or acceptance criterion failed,
2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import dependence as dep
from . import montecarlo as mc
from . import processes as proc
from .config import ConfigError
from .spectral import TimeSeries
from .textio import format_structured, format_table, read_series, write_series
from .whittle import fit_whittle, get_family

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_PROPOSITION = {
    "garch": "arch", "arch_inf": "arch", "bilinear": "bilinear", "volterra": "volterra",
    "arma": "linear", "causal_linear": "linear", "two_sided_linear": "linear",
    "linear_dep_innov": "linear_dep",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    epilog = "configuration keys (TOML):\n" + cfgmod.describe_keys()
    p = _Parser(prog="wdwhittle", description="Whittle estimation for weakly dependent time series.",
                epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", metavar="{simulate,estimate,check,mc}", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", required=True, help="TOML configuration file")
        sp.add_argument("--n", type=int, help="sample size (overrides n)")
        sp.add_argument("--seed", type=int, help="seed (overrides seed)")
        sp.add_argument("--out", help="output path (overrides out; default stdout)")
        sp.add_argument("--workers", type=int, help="worker processes (overrides workers)")
        sp.add_argument("--format", choices=("csv", "structured"), help="report format (overrides format)")
        return sp

    for name, text in [("simulate", "simulate a series from [model]"),
                       ("estimate", "fit the [family] Whittle estimator to a series"),
                       ("check", "stationarity and decay-condition report for [model]"),
                       ("mc", "run the [mc] Monte Carlo experiment")]:
        sp = common(sub.add_parser(name, help=text, description=text, epilog=epilog,
                                   formatter_class=argparse.RawDescriptionHelpFormatter))
        if name == "estimate":
            sp.add_argument("--input", help="series file (overrides input)")
        if name == "check":
            sp.add_argument("--m", type=float, help="moment order (overrides check.m)")
    return p


def _resolve(args) -> dict:
    cfg = cfgmod.load(args.config)
    for key in ("n", "seed", "out", "workers", "format", "input"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if getattr(args, "m", None) is not None:
        cfg["check"] = dict(cfg.get("check") or cfgmod._validate({}, cfgmod.CHECK, "check."), m=args.m)
    if cfg["n"] < 1:
        raise ConfigError("config key 'n' must be positive")
    if cfg["workers"] < 1:
        raise ConfigError("config key 'workers' must be positive")
    return cfg


def _emit(cfg: dict, text: str) -> None:
    if cfg.get("out"):
        Path(cfg["out"]).write_text(text)
    else:
        sys.stdout.write(text)


def _report(cfg: dict, rows: list[dict], record: dict | None = None) -> None:
    if cfg["format"] == "csv":
        _emit(cfg, format_table(rows))
    else:
        _emit(cfg, format_structured(record if record is not None else {"rows": rows}))


def _model(cfg: dict):
    if cfg.get("model") is None:
        raise ConfigError("missing config section [model]")
    return cfgmod.build_model(cfg["model"])


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_simulate(cfg: dict) -> int:
    model = _model(cfg)
    rep = proc.stationarity_check(model, model.innovation.moment_order)
    if rep.status == "fail":
        print(f"stationarity condition violated: {rep.inequality} (lhs = {rep.lhs:.6g})", file=sys.stderr)
        return EXIT_FAIL
    x = proc.simulate(model, cfg["n"], cfg["seed"])
    if cfg.get("out"):
        write_series(cfg["out"], x)
    else:
        sys.stdout.write("".join(f"{float(v)!r}\n" for v in x.values))
    return EXIT_OK


def _family(cfg: dict):
    sec = cfg.get("family")
    if sec is None or sec.get("name") is None:
        raise ConfigError("missing config key 'family.name'")
    try:
        return get_family(sec["name"], **cfgmod.family_options(sec))
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid [family] section: {exc}") from None


def cmd_estimate(cfg: dict) -> int:
    family = _family(cfg)
    sec = cfg["family"]
    if cfg.get("input"):
        try:
            ts = read_series(cfg["input"])
        except OSError as exc:
            raise ConfigError(f"cannot read input series: {exc}") from None
    else:
        ts = proc.simulate(_model(cfg), cfg["n"], cfg["seed"])
    if sec["transform"] == "square":
        y = ts.values ** 2
        ts = TimeSeries(y - y.mean())
    elif sec["transform"] != "none":
        raise ConfigError("config key 'family.transform' must be none or square")
    fit = fit_whittle(ts, family, center=sec["center"])
    rec = fit.to_record()
    rec["n"] = ts.n
    _report(cfg, [rec], {"fit": rec, "advisories": [vars(a) for a in fit.advisories]})
    return EXIT_OK


def _supplied(model, prop: str, sec: dict, m: float) -> dict:
    """Decay exponents to compare against the thresholds: explicit ``check``
    keys first, else the model's decay tag (geometric decay counts as
    infinitely fast)."""
    out = {k: sec[k] for k in ("nu", "nu1", "nu2", "a", "b", "alpha") if sec.get(k) is not None}
    if model is None:
        return out
    decay = getattr(model, "decay", None)
    tag = None
    if decay is not None and decay.kind == "geometric":
        tag = math.inf
    elif decay is not None and decay.kind == "riemannian":
        tag = decay.rate
    elif isinstance(model, proc.Garch) or (decay is not None and decay.kind == "finite"):
        tag = math.inf
    key = {"arch": "nu", "bilinear": "nu1", "volterra": "a", "linear": "a", "linear_dep": "a"}.get(prop)
    if key and key not in out and tag is not None:
        out[key] = tag
    if prop == "bilinear":
        out["c"] = np.asarray(model.c, dtype=np.float64)
    if prop == "linear_dep" and "b" not in out:
        inner = dep.derive_profile(model.inner, m)
        if inner.kind == "eta" and inner.rate == "geometric":
            out["b"] = math.inf
        elif inner.kind == "eta" and inner.rate == "riemannian":
            out["b"] = inner.exponent
    if prop == "theorem3" and "alpha" not in out:
        prof = dep.derive_profile(model, m)
        if prof.kind == "eta" and prof.rate == "geometric":
            out["alpha"] = math.inf
        elif prof.kind == "eta" and prof.rate == "riemannian":
            out["alpha"] = prof.exponent
    return out


def cmd_check(cfg: dict) -> int:
    sec = cfg.get("check") or cfgmod._validate({}, cfgmod.CHECK, "check.")
    m = sec.get("m")
    if m is None:
        raise ConfigError("missing moment order: set check.m or pass --m")
    model = _model(cfg) if cfg.get("model") is not None else None
    prop = sec.get("proposition") or (_PROPOSITION[cfg["model"]["type"]] if model is not None else None)
    if prop is None:
        raise ConfigError("missing config key 'check.proposition'")
    rows = []
    if model is not None:
        st = proc.stationarity_check(model, m)
        rows.append({"item": "stationarity", "condition": st.inequality, "threshold": 1.0,
                     "supplied": st.lhs, "pass": None if st.status == "indeterminate" else st.passed,
                     "note": st.status})
        prof = dep.derive_profile(model, m)
        clt = dep.check_clt_condition(prof, m, sec["s"])
        rows.append({"item": "clt", "condition": clt.condition, "threshold": clt.threshold,
                     "supplied": clt.supplied, "pass": clt.passed, "note": prof.describe()})
    try:
        reports = dep.proposition_thresholds(prop, m, **_supplied(model, prop, sec, m))
    except ValueError as exc:
        rows.append({"item": prop, "condition": str(exc), "threshold": math.nan, "supplied": None,
                     "pass": False, "note": "undefined"})
    else:
        for r in reports:
            rows.append({"item": prop, "condition": r.condition, "threshold": r.threshold,
                         "supplied": r.supplied, "pass": r.passed, "note": r.binding})
    for r in rows:
        status = {True: "PASS", False: "FAIL", None: "----"}[r["pass"]]
        print(f"[{status}] {r['item']}: {r['condition']} (threshold {r['threshold']:.6g})", file=sys.stderr)
    _report(cfg, rows, {"m": m, "proposition": prop, "checks": rows})
    return EXIT_FAIL if any(r["pass"] is False for r in rows) else EXIT_OK


def cmd_mc(cfg: dict) -> int:
    sec = cfg.get("mc")
    if sec is None or sec.get("kind") is None:
        raise ConfigError("missing config key 'mc.kind'")
    if sec.get("n_grid") is None:
        raise ConfigError("missing config key 'mc.n_grid'")
    fam = cfg.get("family") or {}
    try:
        mcc = mc.McConfig(
            kind=sec["kind"], model=_model(cfg), n_grid=tuple(sec["n_grid"]),
            replications=sec["replications"], seed=cfg["seed"], lags=tuple(sec["lags"]),
            g=cfgmod.test_functions(sec["g"]), s=float(sec["s"]), family=fam.get("name"),
            family_options=tuple(cfgmod.family_options(fam).items()) if fam else (),
            beta_true=None if fam.get("beta_true") is None else tuple(fam["beta_true"]),
            transform=sec["transform"], rtol=float(sec["rtol"]), workers=cfg["workers"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid [mc] section: {exc}") from None
    report = mc.run(mcc)
    _emit(cfg, report.to_csv() if cfg["format"] == "csv" else report.to_structured())
    for name, ok in report.criteria.items():
        print(f"[{'PASS' if ok else 'FAIL'}] {name}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "check": cmd_check, "mc": cmd_mc}


def run(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("wdwhittle: error: a subcommand is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = _resolve(args)
        echo = {k: v for k, v in cfg.items() if v is not None}
        sys.stderr.write("# resolved configuration\n" + format_structured(echo))
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"wdwhittle: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
