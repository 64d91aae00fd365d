"""Electron-photon joint state, photon measurements and far-field patterns.

The electron leaves the double slit in ``a|L> + b|R>``.  Passing the left
slit emits a photon ``|H>``; passing the right slit emits ``h|H> + v|V>``.
Finite transverse coherence ``gamma`` mixes the pure entangled state with
its which-path-dephased counterpart.

Screen patterns use the convention

    I(x) = I0(x) * [rho_LL + rho_RR + 2 Re(rho_LR exp(i phi(x)))]

so that the cosine quadrature of a pattern measures <sigma_x> of the electron
and the sine quadrature measures <sigma_y>.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from . import qmat
from .qmat import DensityMatrix, as_density, ket, projector, tensor_product

_PROB_FLOOR = 1e-12


class ZeroProbabilityBranch(ValueError):
    """The requested photon outcome has (numerically) zero probability."""


@dataclass(frozen=True)
class EraserParams:
    """Physical configuration of the eraser.

    ``a``, ``b`` are slit amplitudes, ``h``, ``v`` the polarisation of the
    right-slit marker photon, ``gamma`` the transverse coherence and
    ``theta`` the half-wave-plate orientation in radians.
    """

    a: complex = 1 / math.sqrt(2)
    b: complex = 1 / math.sqrt(2)
    h: complex = 0.0
    v: complex = 1.0
    gamma: float = 1.0
    theta: float = math.pi / 8

    def __post_init__(self):
        for name in ("a", "b", "h", "v"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "theta", float(self.theta))
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) > 1e-12:
            raise ValueError(f"|a|^2 + |b|^2 must be 1, got {abs(self.a)**2 + abs(self.b)**2!r}")
        if abs(abs(self.h) ** 2 + abs(self.v) ** 2 - 1.0) > 1e-12:
            raise ValueError(f"|h|^2 + |v|^2 must be 1, got {abs(self.h)**2 + abs(self.v)**2!r}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma!r}")

    @classmethod
    def from_overlap(cls, h2: float, gamma: float = 1.0, **kw) -> "EraserParams":
        """Real marker amplitudes with overlap ``|h|^2 = h2`` (balanced slits by default)."""
        h2 = min(max(float(h2), 0.0), 1.0)
        return cls(h=math.sqrt(h2), v=math.sqrt(1.0 - h2), gamma=gamma, **kw)

    @property
    def marker(self) -> np.ndarray:
        """Polarisation state of the right-slit photon."""
        return np.array([self.h, self.v], dtype=complex)


def de_broglie_wavelength(kilovolts: float) -> float:
    """Relativistic electron wavelength in metres for an accelerating voltage in kV."""
    energy = kilovolts * 1e3 * constants.e
    mc2 = constants.m_e * constants.c**2
    momentum = math.sqrt(energy * (energy + 2 * mc2)) / constants.c
    return constants.h / momentum


@dataclass(frozen=True)
class ScreenGeometry:
    """Far-field double-slit geometry; all lengths in metres."""

    slit_separation: float
    slit_width: float
    wavelength: float
    camera_length: float
    x_grid: np.ndarray = field(repr=False)

    def __post_init__(self):
        x = np.array(self.x_grid, dtype=float)
        x.setflags(write=False)
        object.__setattr__(self, "x_grid", x)
        if not self.slit_separation > self.slit_width > 0:
            raise ValueError("need slit_separation > slit_width > 0")
        if not (self.wavelength > 0 and self.camera_length > 0):
            raise ValueError("wavelength and camera_length must be positive")
        if x.ndim != 1 or x.size == 0:
            raise ValueError("x_grid must be a non-empty 1-d sequence")
        if np.any(np.diff(x) <= 0):
            raise ValueError("x_grid must be strictly increasing")

    @property
    def fringe_period(self) -> float:
        return self.wavelength * self.camera_length / self.slit_separation

    @property
    def first_null(self) -> float:
        """Screen position of the first zero of the single-slit envelope."""
        return self.wavelength * self.camera_length / self.slit_width

    def points_per_period(self) -> float:
        if self.x_grid.size < 2:
            return 0.0
        return self.fringe_period / float(np.max(np.diff(self.x_grid)))

    def with_grid(self, x_grid) -> "ScreenGeometry":
        return ScreenGeometry(self.slit_separation, self.slit_width, self.wavelength,
                              self.camera_length, x_grid)


def default_geometry(n_x: int = 2001, half_width: float | None = None,
                     kilovolts: float = 200.0) -> ScreenGeometry:
    """600 nm separation, 100 nm slits, 200 keV electrons, 1 m camera length.

    The grid spans the central envelope lobe unless ``half_width`` is given.
    """
    lam = de_broglie_wavelength(kilovolts)
    d, w, cam = 600e-9, 100e-9, 1.0
    if half_width is None:
        half_width = lam * cam / w
    return ScreenGeometry(d, w, lam, cam, np.linspace(-half_width, half_width, n_x))


def envelope(g: ScreenGeometry, x) -> np.ndarray:
    """Single-slit envelope ``sinc^2(pi w x / (lambda L))``, 1 at the centre."""
    arg = g.slit_width * np.asarray(x, dtype=float) / (g.wavelength * g.camera_length)
    return np.sinc(arg) ** 2


def phase_difference(g: ScreenGeometry, x) -> np.ndarray:
    """Path phase ``2 pi d x / (lambda L)`` between the two slits."""
    return 2 * np.pi * g.slit_separation * np.asarray(x, dtype=float) / (g.wavelength * g.camera_length)


def build_joint_state(p: EraserParams) -> DensityMatrix:
    """4x4 electron-photon density matrix for the configuration ``p``."""
    marker = p.marker
    left = ket("L", "H")
    right = np.kron(ket("R"), marker)
    psi = p.a * left + p.b * right
    dephased = abs(p.a) ** 2 * projector(left) + abs(p.b) ** 2 * projector(right)
    rho = p.gamma * projector(psi) + (1.0 - p.gamma) * dephased
    return qmat.validate_density(rho)


def electron_state_without_photon(p: EraserParams) -> DensityMatrix:
    """Electron state for the no-loss channel (no marker photon generated)."""
    rho = np.array([[abs(p.a) ** 2, p.gamma * p.a * np.conj(p.b)],
                    [p.gamma * np.conj(p.a) * p.b, abs(p.b) ** 2]], dtype=complex)
    return qmat.validate_density(rho)


def waveplate_unitary(theta: float) -> np.ndarray:
    """Jones matrix of a half-wave plate with its fast axis at ``theta``.

    Columns are the images of ``|H>`` and ``|V>``.
    """
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    return np.array([[c, s], [s, -c]], dtype=complex)


def photon_projector(setting: str, outcome: int) -> np.ndarray:
    """Projector onto the ``outcome`` (+1/-1) eigenvector of sigma_``setting``."""
    key = setting.lower().removeprefix("sigma_").removeprefix("sigma")
    if key not in qmat.PAULI:
        raise ValueError(f"unknown photon setting {setting!r}")
    if outcome not in (1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {outcome!r}")
    return 0.5 * (qmat.ID2 + outcome * qmat.PAULI[key])


def waveplate_projector(theta: float, outcome: int) -> np.ndarray:
    """Effective projector for wave plate at ``theta`` then a PBS port.

    ``outcome=+1`` is the transmitted (H) port, ``-1`` the reflected (V) one.
    """
    u = waveplate_unitary(theta)
    port = photon_projector("z", outcome)
    return u.conj().T @ port @ u


def branch_probability(rho, P) -> float:
    rho = as_density(rho)
    full = tensor_product(qmat.ID2, P)
    return float(np.trace(rho.mat @ full).real)


def condition_on_photon(rho, P) -> tuple[DensityMatrix, float]:
    """Electron state after detecting the photon in projector ``P``.

    Returns ``(rho_e, probability)``; raises :class:`ZeroProbabilityBranch`
    below a probability of 1e-12.
    """
    rho = as_density(rho)
    P = qmat.as_matrix(P)
    if np.max(np.abs(P @ P - P)) > 1e-10:
        raise ValueError("P is not a projector")
    full = tensor_product(qmat.ID2, P)
    post = full @ rho.mat @ full
    prob = float(np.trace(post).real)
    if prob < _PROB_FLOOR:
        raise ZeroProbabilityBranch(f"photon outcome has probability {prob:.3g}")
    rho_e = qmat.partial_trace(post, qmat.PHOTON) / prob
    return qmat.validate_density(rho_e), prob


def electron_state(rho) -> DensityMatrix:
    """Unconditioned electron state (photon traced out)."""
    return qmat.validate_density(qmat.partial_trace(rho, qmat.PHOTON))


@dataclass(frozen=True)
class IntensityPattern:
    x: np.ndarray
    intensity: np.ndarray
    envelope: np.ndarray
    phase: np.ndarray
    normalization: float = 1.0

    def scaled(self) -> np.ndarray:
        """Intensity weighted by the represented probability."""
        return self.normalization * self.intensity

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x_m", "intensity", "envelope", "phase_rad"])
            for row in zip(self.x, self.intensity, self.envelope, self.phase):
                w.writerow([repr(float(val)) for val in row])


def pattern_values(rho_e, i0, phi) -> np.ndarray:
    m = qmat.as_matrix(rho_e)
    pop = (m[0, 0] + m[1, 1]).real
    return i0 * (pop + 2.0 * np.real(m[0, 1] * np.exp(1j * phi)))


def intensity_pattern(rho_e, g: ScreenGeometry, normalization: float = 1.0) -> IntensityPattern:
    """Screen pattern of the electron state ``rho_e`` evaluated on ``g.x_grid``."""
    rho_e = as_density(rho_e)
    x = g.x_grid
    i0 = envelope(g, x)
    phi = phase_difference(g, x)
    return IntensityPattern(x, pattern_values(rho_e.mat, i0, phi), i0, phi, normalization)


def fringe_visibility(rho_e) -> float:
    """Fringe visibility ``2|rho_LR| / (rho_LL + rho_RR)``."""
    m = as_density(rho_e).mat
    pop = (m[0, 0] + m[1, 1]).real
    if pop < _PROB_FLOOR:
        raise ValueError("electron state has no population")
    return float(2.0 * abs(m[0, 1]) / pop)


def fringe_visibility_numeric(rho_e, g: ScreenGeometry | None = None, n: int = 64) -> float:
    """Visibility read off the envelope-normalised pattern over one fringe period.

    Samples ``I(x)/I0(x)`` at ``n`` equispaced points of one period starting at
    the optical axis and extracts mean and first harmonic by a discrete
    Fourier sum, giving ``(Imax - Imin)/(Imax + Imin)`` without grid error.
    """
    g = g or default_geometry(n_x=2)
    x = np.arange(n) * (g.fringe_period / n)
    pat = intensity_pattern(rho_e, g.with_grid(x))
    ratio = pat.intensity / pat.envelope
    k = np.exp(-2j * np.pi * np.arange(n) / n)
    mean = ratio.mean()
    amp = 2.0 * abs(np.dot(ratio, k)) / n
    imax, imin = mean + amp, mean - amp
    return float((imax - imin) / (imax + imin))
