"""Flat ``key = value`` experiment configuration.

Every key is optional; unspecified keys take the defaults below.  Lines
starting with ``#`` are comments.  Complex amplitudes accept Python syntax,
e.g. ``h = 0.6+0.1j``.

=============================  ==================  ==========================================
key                            default             meaning
=============================  ==================  ==========================================
a, b                           0.70710678...       slit amplitudes, ``|a|^2 + |b|^2 = 1``
h, v                           0, 1                right-slit marker polarisation ``h|H> + v|V>``
gamma                          1.0                 transverse coherence in [0, 1]
theta                          pi/8                half-wave-plate angle (rad), used by ``wp+``/``wp-``
slit_separation_m              600e-9              centre-to-centre slit distance
slit_width_m                   100e-9              single-slit width
voltage_kv                     200                 sets the wavelength when ``wavelength_m`` is unset
wavelength_m                   (from voltage)      electron de Broglie wavelength
camera_length_m                1.0                 effective propagation distance
x_min_m, x_max_m               -/+ first null      screen window (central envelope lobe)
n_x                            2001                screen grid points
n_electrons                    90000               incident electrons per simulation run
photon_generation_probability  1e-3                marker photon yield (collection folded in)
timing_jitter_ps               50                  Gaussian photon timing jitter (sigma)
dark_count_rate_hz             0                   per detector
coincidence_window_ps          2000                pairing window
electron_rate_hz               1e5                 mean electron arrival rate
seed                           0                   unsigned 64-bit RNG seed
settings                       all nine            comma list of labels such as ``xx,zz``
=============================  ==================  ==========================================
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

import numpy as np

from .coincidence.events import ALL_SETTINGS, check_setting
from .coincidence.simulate import RunConfig
from .model import EraserParams, ScreenGeometry, de_broglie_wavelength


class ConfigError(ValueError):
    pass


_S = 1 / math.sqrt(2)

DEFAULTS = {
    "a": _S,
    "b": _S,
    "h": 0.0,
    "v": 1.0,
    "gamma": 1.0,
    "theta": math.pi / 8,
    "slit_separation_m": 600e-9,
    "slit_width_m": 100e-9,
    "voltage_kv": 200.0,
    "wavelength_m": None,
    "camera_length_m": 1.0,
    "x_min_m": None,
    "x_max_m": None,
    "n_x": 2001,
    "n_electrons": 90000,
    "photon_generation_probability": 1e-3,
    "timing_jitter_ps": 50.0,
    "dark_count_rate_hz": 0.0,
    "coincidence_window_ps": 2000,
    "electron_rate_hz": 1e5,
    "seed": 0,
    "settings": ALL_SETTINGS,
}

_COMPLEX = {"a", "b", "h", "v"}
_INT = {"n_x", "n_electrons", "coincidence_window_ps", "seed"}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _COMPLEX:
            z = complex(raw.replace(" ", ""))
            return z.real if z.imag == 0 else z
        if key in _INT:
            return int(raw)
        if key == "settings":
            labels = tuple(s.strip() for s in raw.split(",") if s.strip())
            return tuple(check_setting(s) for s in labels)
        if raw.lower() in ("", "none", "auto"):
            return None
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from None


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=lambda: dict(DEFAULTS))

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        vals = dict(DEFAULTS)
        for key, raw in mapping.items():
            if key not in DEFAULTS:
                raise ConfigError(f"unknown configuration key {key!r}")
            vals[key] = _parse_value(key, raw) if isinstance(raw, str) else raw
        cfg = cls(vals)
        cfg.params()  # validate early
        cfg.geometry()
        return cfg

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                           inline_comment_prefixes=("#",))
        parser.optionxform = str
        try:
            parser.read_string("[__flat__]\n" + text)
        except configparser.Error as exc:
            raise ConfigError(f"unreadable configuration: {exc}") from None
        mapping = {}
        for section in parser.sections():
            mapping.update(parser[section])
        return cls.from_mapping(mapping)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        if path is None:
            return cls.from_mapping({})
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read configuration {path}: {exc}") from None

    def __getitem__(self, key):
        return self.values[key]

    def params(self) -> EraserParams:
        v = self.values
        try:
            return EraserParams(v["a"], v["b"], v["h"], v["v"], v["gamma"], v["theta"])
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None

    def wavelength(self) -> float:
        if self.values["wavelength_m"] is not None:
            return float(self.values["wavelength_m"])
        return de_broglie_wavelength(self.values["voltage_kv"])

    def geometry(self) -> ScreenGeometry:
        v = self.values
        lam = self.wavelength()
        null = lam * v["camera_length_m"] / v["slit_width_m"]
        lo = -null if v["x_min_m"] is None else v["x_min_m"]
        hi = null if v["x_max_m"] is None else v["x_max_m"]
        try:
            return ScreenGeometry(v["slit_separation_m"], v["slit_width_m"], lam,
                                  v["camera_length_m"], np.linspace(lo, hi, v["n_x"]))
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None

    def run_config(self, seed: int | None = None, settings=None) -> RunConfig:
        v = self.values
        try:
            return RunConfig(
                params=self.params(),
                geometry=self.geometry(),
                n_electrons=v["n_electrons"],
                photon_generation_probability=v["photon_generation_probability"],
                timing_jitter_ps=v["timing_jitter_ps"],
                dark_count_rate_hz=v["dark_count_rate_hz"],
                coincidence_window_ps=v["coincidence_window_ps"],
                seed=v["seed"] if seed is None else seed,
                settings=tuple(settings) if settings else v["settings"],
                electron_rate_hz=v["electron_rate_hz"],
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None

    def echo(self) -> dict:
        """JSON-ready copy of the resolved configuration."""
        out = {}
        for key, val in self.values.items():
            if isinstance(val, complex):
                val = [val.real, val.imag]
            elif isinstance(val, tuple):
                val = list(val)
            out[key] = val
        return out
