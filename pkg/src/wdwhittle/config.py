"""TOML experiment configuration: schema, validation and model construction."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
import tomli

from . import processes as proc
from .spectral import FourierFunction


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Key:
    kind: type | tuple
    default: Any
    doc: str


_NUM = (int, float)
_LIST = list

INNOVATION = {
    "distribution": Key(str, "gaussian", "gaussian | uniform | student"),
    "variance": Key(_NUM, 1.0, "innovation variance sigma^2"),
    "df": Key(_NUM, None, "degrees of freedom (student, > 4)"),
    "moment_order": Key(_NUM, 2.0, "moment order m used by the simulator's stationarity check"),
}

MODEL = {
    "type": Key(str, None, "arma | causal_linear | two_sided_linear | garch | arch_inf | bilinear | "
                           "volterra | linear_dep_innov"),
    "ar": Key(_LIST, [], "arma: autoregressive coefficients phi_1..phi_p"),
    "ma": Key(_LIST, [], "arma: moving-average coefficients theta_1..theta_q"),
    "coeffs": Key(_LIST, [], "linear filters: a_lo..a_hi"),
    "lo": Key(int, 0, "two_sided_linear / linear_dep_innov: index of coeffs[0]"),
    "a0": Key(_NUM, None, "garch / bilinear: constant a_0"),
    "a": Key(_LIST, [], "garch / bilinear: a_1..a_q"),
    "c": Key(_LIST, [], "garch / bilinear: c_1..c_q'"),
    "b0": Key(_NUM, None, "arch_inf: constant b_0"),
    "b": Key(_LIST, [], "arch_inf: b_1..b_L"),
    "b_decay_scale": Key(_NUM, None, "arch_inf: generate b_j = scale * j^-decay_rate (riemannian) "
                                     "or scale * decay_rate^j (geometric), j <= tail-mass cut"),
    "terms": Key(_LIST, [], "volterra: list of [j1, ..., jp, coefficient]"),
    "decay": Key(str, None, "coefficient decay tag: finite | geometric | riemannian"),
    "decay_rate": Key(_NUM, None, "geometric ratio or riemannian exponent"),
    "burn_in": Key(int, None, "recursive models: discarded samples (default max(1000, 10 L))"),
    "innovation": Key(dict, {}, "innovation law (table)"),
    "inner": Key(dict, None, "linear_dep_innov: inner model (table with the same keys)"),
}

FAMILY = {
    "name": Key(str, None, "ar1 | arp | ma1 | arma11 | garch11_squared | identity"),
    "p": Key(int, None, "arp: order"),
    "bound": Key(_NUM, None, "box half-width for ar/ma/arma families"),
    "beta_true": Key(_LIST, None, "true parameter (Monte Carlo targets)"),
    "center": Key(bool, False, "estimate: subtract the sample mean first"),
    "transform": Key(str, "none", "estimate: none | square (fit the centered squared series)"),
}

MC = {
    "kind": Key(str, None, "ulln | clt_rhat | clt_Jn | whittle"),
    "n_grid": Key(_LIST, None, "strictly increasing sample sizes"),
    "replications": Key(int, 500, "replications per sample size (>= 100)"),
    "lags": Key(_LIST, [0, 1], "clt_rhat: lags"),
    "s": Key(_NUM, 1.0, "Sobolev index"),
    "rtol": Key(_NUM, 0.15, "relative tolerance for second-moment targets"),
    "transform": Key(str, None, "none | square (default square for garch/arch_inf)"),
    "g": Key(_LIST, [], "clt_Jn: test functions as [lag, amplitude] cosine pairs"),
}

CHECK = {
    "m": Key(_NUM, None, "moment order"),
    "s": Key(_NUM, 1.0, "Sobolev index"),
    "proposition": Key(str, None, "arch | bilinear | volterra | linear | linear_dep | theorem3 "
                                  "(default from model.type)"),
    "nu": Key(_NUM, None, "arch: decay exponent (default model.decay_rate)"),
    "nu1": Key(_NUM, None, "bilinear: decay exponent of a_j"),
    "nu2": Key(_NUM, None, "bilinear: nu2"),
    "a": Key(_NUM, None, "volterra / linear / linear_dep: coefficient decay exponent"),
    "b": Key(_NUM, None, "linear_dep: inner eta exponent"),
    "alpha": Key(_NUM, None, "theorem3: eta exponent"),
}

TOP = {
    "seed": Key(int, 0, "64-bit seed"),
    "n": Key(int, 4096, "sample size"),
    "out": Key(str, None, "output path (default stdout)"),
    "input": Key(str, None, "estimate: series file (default: simulate from [model])"),
    "workers": Key(int, 1, "mc worker processes"),
    "format": Key(str, "csv", "csv | structured"),
    "model": Key(dict, None, "model section"),
    "family": Key(dict, None, "parametric family section"),
    "mc": Key(dict, None, "Monte Carlo section"),
    "check": Key(dict, None, "condition-check section"),
}

SECTIONS = {"model": MODEL, "model.innovation": INNOVATION, "family": FAMILY, "mc": MC, "check": CHECK}


def describe_keys() -> str:
    lines = []
    for prefix, schema in [("", TOP)] + [(k + ".", v) for k, v in SECTIONS.items()]:
        for name, key in schema.items():
            if key.kind is dict:
                continue
            default = "" if key.default in (None, [], {}) else f" [default {key.default}]"
            lines.append(f"  {prefix}{name:<16s} {key.doc}{default}")
    lines.append("  model.inner.*         same keys as model.*")
    return "\n".join(lines)


def _check_type(path: str, value, key: Key):
    kinds = key.kind if isinstance(key.kind, tuple) else (key.kind,)
    if isinstance(value, bool) and bool not in kinds:
        raise ConfigError(f"config key '{path}' has the wrong type ({type(value).__name__})")
    if not isinstance(value, kinds):
        raise ConfigError(f"config key '{path}' has the wrong type ({type(value).__name__})")


def _validate(section: dict, schema: dict, prefix: str) -> dict:
    out = {}
    for k, v in section.items():
        path = f"{prefix}{k}"
        if k not in schema:
            raise ConfigError(f"unknown config key '{path}'")
        _check_type(path, v, schema[k])
        out[k] = v
    for k, key in schema.items():
        if k not in out and key.kind is not dict:
            out[k] = key.default
    return out


def _validate_model(section: dict, prefix: str) -> dict:
    m = _validate(section, MODEL, prefix)
    m["innovation"] = _validate(m.get("innovation") or {}, INNOVATION, prefix + "innovation.")
    if m.get("inner") is not None:
        m["inner"] = _validate_model(m["inner"], prefix + "inner.")
    return m


def resolve(raw: dict) -> dict:
    """Validate a parsed config and fill defaults; unknown keys are errors."""
    cfg = _validate(raw, TOP, "")
    if cfg.get("model") is not None:
        cfg["model"] = _validate_model(cfg["model"], "model.")
    for name in ("family", "mc", "check"):
        if cfg.get(name) is not None:
            cfg[name] = _validate(cfg[name], SECTIONS[name], name + ".")
    if cfg["format"] not in ("csv", "structured"):
        raise ConfigError("config key 'format' must be csv or structured")
    return cfg


def load(path) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return resolve(raw)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def _need(section: dict, key: str, prefix: str):
    if section.get(key) is None:
        raise ConfigError(f"missing config key '{prefix}{key}'")
    return section[key]


def build_innovation(sec: dict) -> proc.InnovationSpec:
    return proc.InnovationSpec(sec["distribution"], float(sec["variance"]),
                               None if sec["df"] is None else float(sec["df"]), float(sec["moment_order"]))


def _decay(sec: dict) -> proc.Decay:
    if sec["decay"] is None:
        return proc.Decay()
    return proc.Decay(sec["decay"], None if sec["decay_rate"] is None else float(sec["decay_rate"]))


def _generated_b(sec: dict, prefix: str) -> np.ndarray:
    scale = float(sec["b_decay_scale"])
    rate = float(_need(sec, "decay_rate", prefix))
    j = np.arange(1, proc.MAX_LAGS + 1, dtype=np.float64)
    if sec["decay"] == "riemannian":
        b = scale * j ** -rate
    elif sec["decay"] == "geometric":
        b = scale * rate ** j
    else:
        raise ConfigError(f"'{prefix}b_decay_scale' needs decay = riemannian or geometric")
    return proc.trim_tail(b)


def build_model(sec: dict, prefix: str = "model."):
    """Model spec from a validated ``[model]`` table."""
    kind = _need(sec, "type", prefix)
    inn = build_innovation(sec["innovation"])
    try:
        if kind == "arma":
            m = proc.CausalLinear.arma(sec["ar"], sec["ma"], inn)
            if sec["decay"] is not None:
                m = proc.CausalLinear(m.coeffs, inn, _decay(sec))
            return m
        if kind == "causal_linear":
            return proc.CausalLinear(_need(sec, "coeffs", prefix), inn, _decay(sec))
        if kind == "two_sided_linear":
            return proc.TwoSidedLinear(_need(sec, "coeffs", prefix), sec["lo"], inn, _decay(sec))
        if kind == "garch":
            return proc.Garch(float(_need(sec, "a0", prefix)), tuple(sec["a"]), tuple(sec["c"]), inn, sec["burn_in"])
        if kind == "arch_inf":
            b = _generated_b(sec, prefix) if sec["b_decay_scale"] is not None else _need(sec, "b", prefix)
            return proc.ArchInf(float(_need(sec, "b0", prefix)), b, inn, _decay(sec), sec["burn_in"])
        if kind == "bilinear":
            return proc.Bilinear(float(_need(sec, "a0", prefix)), sec["a"], sec["c"], inn, _decay(sec),
                                 sec["burn_in"])
        if kind == "volterra":
            terms = {}
            for t in _need(sec, "terms", prefix):
                if not isinstance(t, list) or len(t) < 2:
                    raise ConfigError(f"'{prefix}terms' entries must be [j1, ..., jp, coefficient]")
                terms[tuple(int(v) for v in t[:-1])] = float(t[-1])
            return proc.Volterra(terms, inn, _decay(sec))
        if kind == "linear_dep_innov":
            inner = build_model(_need(sec, "inner", prefix), prefix + "inner.")
            return proc.LinearDepInnov(_need(sec, "coeffs", prefix), inner, sec["lo"], _decay(sec))
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid [{prefix.rstrip('.')}] section: {exc}") from None
    raise ConfigError(f"config key '{prefix}type' has unknown value {kind!r}")


def family_options(sec: dict) -> dict:
    opts = {}
    if sec.get("p") is not None:
        opts["p"] = sec["p"]
    if sec.get("bound") is not None:
        opts["bound"] = float(sec["bound"])
    return opts


def test_functions(pairs) -> tuple:
    out = []
    for p in pairs:
        if not (isinstance(p, list) and len(p) == 2):
            raise ConfigError("'mc.g' entries must be [lag, amplitude]")
        out.append(FourierFunction.cosine(int(p[0]), float(p[1])))
    return tuple(out)
