"""TOML run configuration: parsing, defaults, deterministic serialization."""

import copy
import math

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import DomainError

DEFAULTS = {
    "eos": {
        "kind": "capped_polytrope",
        "A": 1.0,
        "gamma": 1.5,
        # cap_b omitted -> 2 A gamma / c^2
        "c": 1.0,
        "G": 1.0,
        "rho_max": 0.01,
    },
    "tov": {
        "rho_c": 1e-3,
        "rtol": 1e-10,
        "u_switch_frac": 1e-3,
        "r_max_factor": 1e4,
        "storage_points": 2048,
    },
    "pulsation": {
        "n_modes": 4,
        "basis_size": 96,
        "doubling_tol": 1e-6,
    },
    "evolution": {
        "mode": "linear",
        "scheme": "modal",
        "grid_points": 96,
        "epsilon": 1e-3,
        "n_periods": 1.0,
        "steps_per_period": 2000,
        "filter_strength": 1e-3,
        "snapshot_every": 1,
        "mode_index": 0,
        "cauchy_psi0": [],        # polynomial coefficients in x
        "cauchy_psi1": [],
        "cauchy_delta_max": 1e-2,
    },
    "matching": {
        "delta_cut_frac": 0.1,
        "h_frac": 1.5e-3,
    },
    "output": {
        "dir": "out",
    },
}


def merge_defaults(doc):
    cfg = copy.deepcopy(DEFAULTS)
    for section, values in doc.items():
        if section not in cfg:
            raise DomainError("unknown config section %r" % section)
        if not isinstance(values, dict):
            raise DomainError("config section %r must be a table" % section)
        for key, val in values.items():
            if key not in cfg[section] and key != "cap_b":
                raise DomainError("unknown config key %s.%s" % (section, key))
            cfg[section][key] = val
    return cfg


def validate(cfg):
    for key in ("rtol", "u_switch_frac"):
        if cfg["tov"][key] <= 0:
            raise DomainError("tov.%s must be positive" % key)
    if cfg["pulsation"]["doubling_tol"] <= 0:
        raise DomainError("pulsation.doubling_tol must be positive")
    if cfg["evolution"]["steps_per_period"] <= 0:
        raise DomainError("evolution.steps_per_period must be positive")
    if cfg["eos"]["rho_max"] <= 0 or cfg["tov"]["rho_c"] <= 0:
        raise DomainError("densities must be positive")
    g = cfg["eos"]["gamma"]
    if not 1.0 < g < 2.0:
        raise DomainError("eos.gamma must lie in (1, 2)")
    ratio = g / (g - 1.0)
    if abs(ratio - round(ratio)) > 1e-9:
        raise DomainError("(A2) violated: gamma/(gamma-1) = %.6f is not an integer" % ratio)
    return cfg


def load_config(path):
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    return validate(merge_defaults(doc))


def load_config_text(text):
    return validate(merge_defaults(tomllib.loads(text)))


def _fmt_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int,)):
        return repr(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return repr(v)
    if isinstance(v, str):
        return '"%s"' % v.replace("\\", "\\\\").replace('"', '\\"')
    if isinstance(v, list):
        return "[" + ", ".join(_fmt_value(x) for x in v) + "]"
    raise DomainError("cannot serialize config value %r" % (v,))


def dumps_toml(cfg):
    """Deterministic TOML text: sections and keys in sorted order."""
    lines = []
    for section in sorted(cfg):
        lines.append("[%s]" % section)
        for key in sorted(cfg[section]):
            lines.append("%s = %s" % (key, _fmt_value(cfg[section][key])))
        lines.append("")
    return "\n".join(lines)


def eos_from_config(cfg):
    from .eos import EosModel

    sec = cfg["eos"]
    return EosModel(A=sec["A"], gamma=sec["gamma"], cap_b=sec.get("cap_b"),
                    c=sec["c"], G=sec["G"], kind=sec["kind"])
