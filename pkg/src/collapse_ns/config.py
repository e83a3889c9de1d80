"""INI study configuration with sections ``profile``, ``fluid``, ``solver``, ``study``."""

from __future__ import annotations

import configparser
from dataclasses import fields

from .study import StudyConfig

_FLUID = ("gamma", "a", "rho_floor", "mu", "eta", "viscosity_scale")
_SOLVER = ("nx", "ns", "cfl", "kappa", "t_end", "sample_dt", "limit_refine")
_STUDY = ("mode", "epsilons", "output", "workers", "rho0", "u0_amplitude", "delta0", "korn")


def _parse_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _convert(name: str, raw: str):
    kinds = {f.name: f.type for f in fields(StudyConfig)}
    kind = str(kinds[name])
    if name == "epsilons":
        return _parse_list(raw)
    if name == "korn":
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if name in ("mode", "output"):
        return raw.strip() or None
    if name == "rho_floor":
        return None if raw.strip().lower() in ("", "auto", "none") else float(raw)
    if kind.startswith("int"):
        return int(raw)
    return float(raw)


def parse_config(text: str) -> StudyConfig:
    """Parse INI text; unknown keys in the fixed sections are rejected."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_string(text)
    kwargs: dict = {}
    if parser.has_section("profile"):
        kwargs["profile"] = {k: v.strip() for k, v in parser.items("profile")}
    for section, keys in (("fluid", _FLUID), ("solver", _SOLVER), ("study", _STUDY)):
        if not parser.has_section(section):
            continue
        for key, raw in parser.items(section):
            if key not in keys:
                raise ValueError(f"unknown key {key!r} in section [{section}]")
            kwargs[key] = _convert(key, raw)
    unknown = set(parser.sections()) - {"profile", "fluid", "solver", "study"}
    if unknown:
        raise ValueError(f"unknown sections: {sorted(unknown)}")
    return StudyConfig(**kwargs)


def load_config(path: str) -> StudyConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def dump_config(config: StudyConfig) -> str:
    """INI text that parses back to ``config``."""
    parser = configparser.ConfigParser(interpolation=None)
    parser["profile"] = {k: str(v) for k, v in config.profile.items()}
    for section, keys in (("fluid", _FLUID), ("solver", _SOLVER), ("study", _STUDY)):
        block = {}
        for key in keys:
            val = getattr(config, key)
            if val is None:
                val = "auto" if key == "rho_floor" else ""
            elif key == "epsilons":
                val = ", ".join(repr(e) for e in val)
            block[key] = repr(val) if isinstance(val, float) else str(val)
        parser[section] = block
    import io

    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
