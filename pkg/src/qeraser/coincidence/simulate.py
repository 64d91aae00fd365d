"""Monte Carlo generation of electron and photon detection events."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..model import (
    EraserParams,
    ScreenGeometry,
    ZeroProbabilityBranch,
    build_joint_state,
    condition_on_photon,
    electron_state_without_photon,
    envelope,
    pattern_values,
    phase_difference,
    photon_projector,
)
from .events import ALL_SETTINGS, ELECTRON, PHOTON, EventStream, check_setting

CHUNK_SIZE = 1 << 16
MIN_POINTS_PER_PERIOD = 50

# electron events start this long after t = 0 so jittered photons stay nonnegative
_T0_PS = 1_000_000


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce an event stream.

    ``settings`` is the measurement schedule: the incident electrons are split
    into equal consecutive blocks, one per setting.
    """

    params: EraserParams
    geometry: ScreenGeometry
    n_electrons: int
    photon_generation_probability: float = 1e-3
    timing_jitter_ps: float = 50.0
    dark_count_rate_hz: float = 0.0
    coincidence_window_ps: int = 2000
    seed: int = 0
    settings: tuple[str, ...] = ALL_SETTINGS
    electron_rate_hz: float = 1e5
    chunk_size: int = field(default=CHUNK_SIZE, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(check_setting(s) for s in self.settings))
        if self.n_electrons <= 0:
            raise ValueError("n_electrons must be positive")
        if self.coincidence_window_ps <= 0:
            raise ValueError("coincidence_window_ps must be positive")
        if not 0.0 <= self.photon_generation_probability <= 1.0:
            raise ValueError("photon_generation_probability must lie in [0, 1]")
        if not self.settings:
            raise ValueError("at least one measurement setting is required")
        if self.electron_rate_hz <= 0 or self.timing_jitter_ps < 0 or self.dark_count_rate_hz < 0:
            raise ValueError("rates must be positive and jitter nonnegative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        p, g = self.params, self.geometry
        x = g.x_grid
        grid = {"x_min_m": float(x[0]), "x_max_m": float(x[-1]), "n_x": int(x.size)}
        if not np.array_equal(np.linspace(x[0], x[-1], x.size), x):
            grid = {"x_grid_m": x.tolist()}
        cplx = lambda z: [z.real, z.imag]  # noqa: E731
        return {
            "a": cplx(p.a), "b": cplx(p.b), "h": cplx(p.h), "v": cplx(p.v),
            "gamma": p.gamma, "theta": p.theta,
            "slit_separation_m": g.slit_separation, "slit_width_m": g.slit_width,
            "wavelength_m": g.wavelength, "camera_length_m": g.camera_length,
            **grid,
            "n_electrons": self.n_electrons,
            "photon_generation_probability": self.photon_generation_probability,
            "timing_jitter_ps": self.timing_jitter_ps,
            "dark_count_rate_hz": self.dark_count_rate_hz,
            "coincidence_window_ps": self.coincidence_window_ps,
            "seed": self.seed,
            "settings": list(self.settings),
            "electron_rate_hz": self.electron_rate_hz,
            "chunk_size": self.chunk_size,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        cplx = lambda v: complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)  # noqa: E731
        params = EraserParams(cplx(d["a"]), cplx(d["b"]), cplx(d["h"]), cplx(d["v"]),
                              d["gamma"], d["theta"])
        if "x_grid_m" in d:
            grid = np.asarray(d["x_grid_m"], dtype=float)
        else:
            grid = np.linspace(d["x_min_m"], d["x_max_m"], d["n_x"])
        geom = ScreenGeometry(d["slit_separation_m"], d["slit_width_m"], d["wavelength_m"],
                              d["camera_length_m"], grid)
        return cls(params, geom, int(d["n_electrons"]), d["photon_generation_probability"],
                   d["timing_jitter_ps"], d["dark_count_rate_hz"], int(d["coincidence_window_ps"]),
                   int(d["seed"]), tuple(d["settings"]), d["electron_rate_hz"],
                   int(d.get("chunk_size", CHUNK_SIZE)))


class _Sampler:
    """Per-setting photon Born probabilities and electron position samplers."""

    def __init__(self, cfg: RunConfig):
        g = cfg.geometry
        x = g.x_grid
        if x.size < 2:
            raise ValueError("x_grid needs at least two points for position sampling")
        self.x = x
        self.i0 = envelope(g, x)
        self.phi = phase_difference(g, x)
        self.half_sep = 0.5 * g.slit_separation
        rho = build_joint_state(cfg.params)
        needs_diffraction = any(s[0] != "z" for s in cfg.settings)
        if needs_diffraction and g.points_per_period() < MIN_POINTS_PER_PERIOD:
            raise ValueError(f"x_grid resolves {g.points_per_period():.1f} points per fringe period; "
                             f"at least {MIN_POINTS_PER_PERIOD} are required")
        self.no_loss = electron_state_without_photon(cfg.params).mat
        self.p_plus = {}
        self.branch = {}
        for basis in {s[1] for s in cfg.settings}:
            probs = {}
            for outcome in (1, -1):
                try:
                    rho_e, prob = condition_on_photon(rho, photon_projector(basis, outcome))
                except ZeroProbabilityBranch:
                    continue
                probs[outcome] = prob
                self.branch[basis, outcome] = rho_e.mat
            if not probs:
                raise ValueError(f"photon basis {basis!r} has no outcome with nonzero probability")
            self.p_plus[basis] = probs.get(1, 0.0)
        # built up front so chunk workers only read shared state
        self.cdfs = {}
        if needs_diffraction:
            self.cdfs[None] = self._cdf(self.no_loss)
            for key, rho_e in self.branch.items():
                self.cdfs[key] = self._cdf(rho_e)

    def _cdf(self, rho_e) -> np.ndarray:
        f = np.clip(pattern_values(rho_e, self.i0, self.phi), 0.0, None)
        mass = 0.5 * (f[1:] + f[:-1]) * np.diff(self.x)
        cdf = np.concatenate([[0.0], np.cumsum(mass)])
        if cdf[-1] <= 0:
            raise ValueError("electron pattern has no weight on x_grid")
        return cdf / cdf[-1]

    def positions(self, e_axis: str, key, u: np.ndarray) -> np.ndarray:
        """Screen (or slit-image) coordinates for uniforms ``u``; ``key`` is a photon branch or None."""
        rho_e = self.no_loss if key is None else self.branch[key]
        if e_axis == "z":
            # real-space image of the slits: left slit at -d/2
            p_left = rho_e[0, 0].real / (rho_e[0, 0] + rho_e[1, 1]).real
            return np.where(u < p_left, -self.half_sep, self.half_sep)
        return np.interp(u, self.cdfs[key], self.x)


def _chunk(cfg: RunConfig, sampler: _Sampler, k: int):
    start = k * cfg.chunk_size
    stop = min(start + cfg.chunk_size, cfg.n_electrons)
    m = stop - start
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0, k)))
    gaps = rng.exponential(1e12 / cfg.electron_rate_hz, m)
    u_loss = rng.random(m)
    u_out = rng.random(m)
    u_pos = rng.random(m)
    jitter = rng.normal(0.0, 1.0, m) * cfg.timing_jitter_ps

    n_set = len(cfg.settings)
    sett = ((np.arange(start, stop, dtype=np.int64) * n_set) // cfg.n_electrons).astype(np.int16)
    loss = u_loss < cfg.photon_generation_probability
    outcome = np.zeros(m, dtype=np.int8)
    x = np.empty(m)
    for si, label in enumerate(cfg.settings):
        in_set = sett == si
        e_axis, basis = label
        sel = in_set & ~loss
        if sel.any():
            x[sel] = sampler.positions(e_axis, None, u_pos[sel])
        sel = in_set & loss
        if not sel.any():
            continue
        plus = u_out < sampler.p_plus[basis]
        outcome[sel & plus] = 1
        outcome[sel & ~plus] = -1
        for out in (1, -1):
            pick = sel & (outcome == out)
            if pick.any():
                x[pick] = sampler.positions(e_axis, (basis, out), u_pos[pick])
    rel_t = np.cumsum(gaps)
    return rel_t, x, loss, outcome, jitter, sett


def simulate_events(cfg: RunConfig, workers: int = 1) -> EventStream:
    """Generate the time-ordered detection stream for ``cfg``.

    Work is split into chunks of ``cfg.chunk_size`` electrons with seeds
    derived from ``(seed, chunk index)``, so the result is independent of
    ``workers``.
    """
    sampler = _Sampler(cfg)
    n_chunks = math.ceil(cfg.n_electrons / cfg.chunk_size)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda k: _chunk(cfg, sampler, k), range(n_chunks)))
    else:
        parts = [_chunk(cfg, sampler, k) for k in range(n_chunks)]

    offsets = np.concatenate([[0.0], np.cumsum([p[0][-1] for p in parts])[:-1]])
    t_e = np.concatenate([np.rint(_T0_PS + off + p[0]) for off, p in zip(offsets, parts)]).astype(np.int64)
    x_e = np.concatenate([p[1] for p in parts])
    loss = np.concatenate([p[2] for p in parts])
    outcome = np.concatenate([p[3] for p in parts])
    jitter = np.concatenate([p[4] for p in parts])
    sett_e = np.concatenate([p[5] for p in parts])

    t_ph = np.maximum(t_e[loss] + np.rint(jitter[loss]).astype(np.int64), 0)
    det_ph = np.where(outcome[loss] == 1, 0, 1).astype(np.int8)
    sett_ph = sett_e[loss]

    t_dark, det_dark, sett_dark = _dark_counts(cfg, t_e, sett_e)

    n_e, n_p, n_d = t_e.size, t_ph.size, t_dark.size
    kind = np.concatenate([np.full(n_e, ELECTRON), np.full(n_p + n_d, PHOTON)]).astype(np.int8)
    t = np.concatenate([t_e, t_ph, t_dark])
    xs = np.concatenate([x_e, np.full(n_p + n_d, np.nan)])
    lf = np.concatenate([loss, np.zeros(n_p + n_d, dtype=bool)])
    det = np.concatenate([np.full(n_e, -1, dtype=np.int8), det_ph, det_dark])
    sett = np.concatenate([sett_e, sett_ph, sett_dark])
    order = np.lexsort((np.arange(t.size), kind, t))
    return EventStream(kind[order], t[order], xs[order], lf[order], det[order], sett[order],
                       cfg.settings, cfg.to_dict())


def _dark_counts(cfg: RunConfig, t_e: np.ndarray, sett_e: np.ndarray):
    empty = (np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int8), np.zeros(0, dtype=np.int16))
    if cfg.dark_count_rate_hz <= 0:
        return empty
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(1,)))
    t_end = int(t_e[-1]) + _T0_PS
    times, dets = [], []
    for det in (0, 1):
        n = rng.poisson(cfg.dark_count_rate_hz * t_end * 1e-12)
        times.append(rng.integers(0, t_end, n, endpoint=True))
        dets.append(np.full(n, det, dtype=np.int8))
    t = np.concatenate(times).astype(np.int64)
    if t.size == 0:
        return empty
    # a dark count inherits the setting active at its arrival time
    idx = np.clip(np.searchsorted(t_e, t, side="right") - 1, 0, t_e.size - 1)
    return t, np.concatenate(dets), sett_e[idx]
