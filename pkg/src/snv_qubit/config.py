"""Run configuration: a minimal YAML subset read/written without dependencies.

A file holds one level of sections:

    device:
      eta: 80.0
    noise:
      leak_power: 1.0

Every key must exist in the built-in defaults (``presets.DEFAULTS``); values
are coerced to the type of the default.
"""

import copy
import hashlib
import json
import math
import os
import re

from snv_qubit.constants import MHZ, PER_MS
from snv_qubit.errors import ConfigError
from snv_qubit.noise import noise_model
from snv_qubit.params import (
    DeviceParams,
    JahnTellerStrain,
    NuclearSpinModel,
    RamanDriveParams,
    ReadoutModel,
)
from snv_qubit.presets import DEFAULTS, NOISE_OVERRIDES

CONFIG_ENV = "SNV_SIM_CONFIG"
DEFAULTS_NAME = "defaults"


def _yaml_scalar(value):
    """Format a Python value as a YAML scalar."""
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        if not value:
            return "''"
        # Quote if it contains special chars or looks like a bool/number/null
        if re.search(r"[:{}\[\],&*#?|>!%@`]", value) or value in (
            "true",
            "false",
            "yes",
            "no",
            "null",
        ):
            return f"'{value}'"
        return value
    return str(value)


def _parse_yaml_scalar(raw):
    """Parse a YAML scalar string to a Python value."""
    s = raw.strip()
    if not s or s == "null":
        return None
    if s in ("true", "yes"):
        return True
    if s in ("false", "no"):
        return False
    if len(s) >= 2 and s[0] == s[-1] and s[0] in ("'", '"'):
        return s[1:-1]
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    return s


def write_config(path, data):
    """Write a one-level-nested dict as YAML."""
    lines = ["# snv-sim run configuration", ""]
    for key, value in data.items():
        if isinstance(value, dict):
            lines.append(f"{key}:")
            for k, v in value.items():
                lines.append(f"  {k}: {_yaml_scalar(v)}")
        else:
            lines.append(f"{key}: {_yaml_scalar(value)}")
    lines.append("")
    with open(path, "w") as f:
        f.write("\n".join(lines))


def _parse_lines(lines, source="<string>"):
    """Parse YAML lines into a dict of sections."""
    data = {}
    current_key = None
    for lineno, raw_line in enumerate(lines, start=1):
        stripped = raw_line.rstrip("\n")
        # Skip comments and blank lines
        if not stripped or stripped.lstrip().startswith("#"):
            continue
        indent = len(stripped) - len(stripped.lstrip())
        content = stripped.strip()
        if ":" not in content:
            raise ConfigError(f"{source}:{lineno}: expected 'key: value', got {content!r}")
        k, _, v = content.partition(":")
        k = k.strip()
        v = v.split(" #", 1)[0].strip()
        if indent >= 2:
            if current_key is None:
                raise ConfigError(f"{source}:{lineno}: indented key {k!r} outside a section")
            data[current_key][k] = _parse_yaml_scalar(v)
        elif v:
            raise ConfigError(f"{source}:{lineno}: top-level key {k!r} must be a section")
        else:
            current_key = k
            data.setdefault(current_key, {})
    return data


def read_config(path):
    """Read a sectioned YAML file into a dict."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as f:
        return _parse_lines(f, path)


def read_config_string(text):
    return _parse_lines(text.splitlines(keepends=True))


def coerce(key, value, default):
    """Convert ``value`` to the type of ``default`` or raise ConfigError."""
    if value is None:
        if default is None:
            return None
        raise ConfigError(f"{key} may not be null")
    if isinstance(value, str) and not isinstance(default, str):
        value = _parse_yaml_scalar(value)
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{key} must be true or false, got {value!r}")
    if isinstance(default, int):
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    if default is None or isinstance(default, float):
        if isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value):
            return float(value)
        raise ConfigError(f"{key} must be a number, got {value!r}")
    if isinstance(default, str):
        return str(value)
    raise ConfigError(f"{key}: unsupported value {value!r}")


def merge(base, overrides, source="config"):
    """Layer ``overrides`` onto ``base``, rejecting unknown sections and keys."""
    merged = copy.deepcopy(base)
    for section, values in overrides.items():
        if section not in DEFAULTS:
            raise ConfigError(f"{source}: unknown section {section!r}")
        if not isinstance(values, dict):
            raise ConfigError(f"{source}: section {section!r} must hold key: value lines")
        for key, value in values.items():
            if key not in DEFAULTS[section]:
                raise ConfigError(f"{source}: unknown key {section}.{key}")
            merged[section][key] = coerce(f"{section}.{key}", value, DEFAULTS[section][key])
    return merged


def resolve_key(key, preferred=None):
    """``section.key`` or a bare key looked up in ``preferred`` first, then any unique section."""
    if "." in key:
        section, _, name = key.partition(".")
        if section not in DEFAULTS:
            raise ConfigError(f"unknown section {section!r} in {key}")
        if name not in DEFAULTS[section]:
            raise ConfigError(f"unknown key {key}")
        return section, name
    if preferred in DEFAULTS and key in DEFAULTS[preferred]:
        return preferred, key
    owners = [section for section, keys in DEFAULTS.items() if key in keys]
    if not owners:
        raise ConfigError(f"unknown key {key}")
    if len(owners) > 1:
        raise ConfigError(
            f"ambiguous key {key}; qualify it as one of "
            + ", ".join(f"{s}.{key}" for s in owners)
        )
    return owners[0], key


def parse_assignments(assignments, preferred=None):
    """``["key=value", ...]`` -> ``{section: {key: raw}}``."""
    overrides = {}
    for item in assignments or ():
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set expects key=value, got {item!r}")
        section, name = resolve_key(key.strip(), preferred)
        overrides.setdefault(section, {})[name] = _parse_yaml_scalar(raw)
    return overrides


class RunConfig:
    """Resolved configuration with typed accessors for every parameter block."""

    def __init__(self, data=None):
        self.data = merge(DEFAULTS, data or {})

    @classmethod
    def load(cls, source=None, assignments=None, preferred=None):
        """Defaults, then the config file, then ``--set`` assignments.

        ``source`` is ``"defaults"``, a path, or None (use $SNV_SIM_CONFIG if set).
        """
        if source is None:
            source = os.environ.get(CONFIG_ENV) or DEFAULTS_NAME
        data = copy.deepcopy(DEFAULTS)
        if source != DEFAULTS_NAME:
            data = merge(data, read_config(source), source)
        data = merge(data, parse_assignments(assignments, preferred), "--set")
        config = cls.__new__(cls)
        config.data = data
        return config

    def section(self, name):
        try:
            return self.data[name]
        except KeyError:
            raise ConfigError(f"missing section {name!r}") from None

    def hash(self):
        canonical = json.dumps(self.data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def write(self, path):
        write_config(path, self.data)

    def _build(self, factory, section, **values):
        try:
            return factory(**values)
        except ValueError as e:
            raise ConfigError(f"{section}: {e}") from None

    def device(self):
        return self._build(DeviceParams, "device", **self.section("device"))

    def strain(self):
        s = self.section("strain")
        return self._build(JahnTellerStrain, "strain", a=s["a"], b=s["b"], c=s["c"])

    def nuclear(self):
        s = self.section("nuclear")
        if not s["enabled"]:
            return None
        p = s["population_plus"]
        return self._build(
            NuclearSpinModel,
            "nuclear",
            hyperfine_a=self.section("device")["hyperfine_a"],
            populations=(p, 1.0 - p),
        )

    def readout(self):
        return self._build(ReadoutModel, "readout", **self.section("readout"))

    def noise(self, experiment=None):
        """Noise model, with ``bath``/``leak_power`` overridden by the experiment section."""
        s = dict(self.section("noise"))
        if experiment is not None:
            for key in NOISE_OVERRIDES:
                if key in self.section(experiment):
                    s[key] = self.section(experiment)[key]
        tau_c = s["bath_tau_c"] / PER_MS if s["bath_tau_c"] is not None else None
        try:
            return noise_model(
                self.device(),
                bath=s["bath"],
                bath_tau_c=tau_c,
                bath_shape=s["bath_shape"],
                quasi_static=s["quasi_static"] * MHZ,
                leak_power=s["leak_power"],
                leak_detuning=s["leak_detuning"],
                intrinsic_gamma1=s["intrinsic_gamma1"] * PER_MS,
            )
        except ValueError as e:
            raise ConfigError(f"noise: {e}") from None

    def drive(self, experiment):
        s = self.section(experiment)
        values = {key: s[key] for key in ("delta", "power", "rabi", "two_photon_delta") if key in s}
        if s.get("duration") is not None:
            values["duration"] = s["duration"]
        return self._build(RamanDriveParams, experiment, **values)

    @property
    def seed(self):
        return self.section("run")["seed"]

    @property
    def shots(self):
        return self.section("run")["shots"]

    @property
    def threads(self):
        return self.section("run")["threads"]

    @property
    def output_dir(self):
        return self.section("run")["output_dir"]

    @output_dir.setter
    def output_dir(self, path):
        self.section("run")["output_dir"] = str(path)
