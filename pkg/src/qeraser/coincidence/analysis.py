"""From matched pairs to conditioned patterns, fringe fits and correlators."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..entanglement import AXES, PauliCorrelators
from ..model import ScreenGeometry, envelope, phase_difference
from .events import ALL_SETTINGS
from .matching import MatchResult

_MAX_COND = 1e12
_IRLS_ITERATIONS = 4


class DegenerateFitError(ValueError):
    pass


class MissingSettingsError(ValueError):
    pass


def grid_bins(geometry: ScreenGeometry, n_bins: int = 120) -> np.ndarray:
    """Equal-width bin edges spanning the geometry's screen grid."""
    x = geometry.x_grid
    return np.linspace(x[0], x[-1], n_bins + 1)


@dataclass(frozen=True)
class ConditionedHistogram:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def intensity(self) -> np.ndarray:
        """Counts per unit length, normalised to unit area (zeros if empty)."""
        widths = np.diff(self.edges)
        if self.total == 0:
            return np.zeros_like(widths)
        return self.counts / (self.total * widths)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x_lo_m", "x_hi_m", "counts", "intensity"])
            for lo, hi, n, dens in zip(self.edges[:-1], self.edges[1:], self.counts, self.intensity()):
                w.writerow([repr(float(lo)), repr(float(hi)), int(n), repr(float(dens))])


def histogram_conditioned(pairs: MatchResult, bins, setting: str | None = None,
                          detector: int | None = None) -> ConditionedHistogram:
    """Histogram of paired electron positions filtered by setting and photon detector.

    ``detector`` is 0 (SPD0, outcome +1), 1 (SPD1, outcome -1) or None for
    both.  No matching pairs gives an all-zero histogram.
    """
    edges = np.asarray(bins, dtype=float)
    mask = pairs.select(setting, detector)
    counts, _ = np.histogram(pairs.x_m[mask], bins=edges)
    return ConditionedHistogram(edges, counts.astype(np.int64))


def _fringe_basis(geometry: ScreenGeometry, edges: np.ndarray) -> np.ndarray:
    """Bin integrals of I0, I0 cos(phi), I0 sin(phi).

    Integrates segment averages on ``x_grid``, matching the piecewise density
    the event sampler draws from.
    """
    x = geometry.x_grid
    i0 = envelope(geometry, x)
    phi = phase_difference(geometry, x)
    cols = []
    for f in (i0, i0 * np.cos(phi), i0 * np.sin(phi)):
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(x))])
        cols.append(np.diff(np.interp(edges, x, cum)))
    return np.column_stack(cols)


@dataclass(frozen=True)
class FringeFit:
    """``counts ~ p*I0 + q*I0 cos(phi) + r*I0 sin(phi)`` per bin."""

    coef: np.ndarray
    cov: np.ndarray
    n_events: int

    @property
    def sx(self) -> float:
        """Electron <sigma_x> of the conditioned state (q / p)."""
        return float(self.coef[1] / self.coef[0])

    @property
    def sy(self) -> float:
        return float(self.coef[2] / self.coef[0])

    def _ratio_var(self, k: int) -> float:
        p, num = self.coef[0], self.coef[k]
        c = self.cov
        return float(c[k, k] / p**2 + num**2 * c[0, 0] / p**4 - 2 * num * c[0, k] / p**3)

    @property
    def sx_err(self) -> float:
        return float(np.sqrt(max(self._ratio_var(1), 0.0)))

    @property
    def sy_err(self) -> float:
        return float(np.sqrt(max(self._ratio_var(2), 0.0)))

    @property
    def visibility(self) -> float:
        return float(np.hypot(self.coef[1], self.coef[2]) / self.coef[0])

    @property
    def visibility_err(self) -> float:
        p, q, r = self.coef
        amp = np.hypot(q, r)
        if amp == 0:
            return float(np.sqrt(self.cov[1, 1]) / p)
        grad = np.array([-amp / p**2, q / (amp * p), r / (amp * p)])
        return float(np.sqrt(max(grad @ self.cov @ grad, 0.0)))


def fit_fringes(hist: ConditionedHistogram, geometry: ScreenGeometry) -> FringeFit:
    """Weighted least-squares fit of the three fringe components.

    Weights are inverse Poisson variances taken from the model itself and
    refined over a few iterations (variance floored at one count).
    """
    x = geometry.x_grid
    if x[-1] - x[0] < geometry.fringe_period:
        raise DegenerateFitError("screen grid spans less than one fringe period")
    if hist.total == 0:
        raise DegenerateFitError("histogram is empty")
    A = _fringe_basis(geometry, hist.edges)
    y = hist.counts.astype(float)
    var = np.maximum(y, 1.0)
    for _ in range(_IRLS_ITERATIONS):
        Aw = A / var[:, None]
        normal = A.T @ Aw
        if np.linalg.cond(normal) > _MAX_COND:
            raise DegenerateFitError("fringe fit normal matrix is singular; envelope support too narrow")
        cov = np.linalg.inv(normal)
        coef = cov @ (Aw.T @ y)
        var = np.maximum(A @ coef, 1.0)
    if coef[0] <= 0:
        raise DegenerateFitError("fitted mean intensity is not positive")
    return FringeFit(coef, cov, hist.total)


def _combine(values, variances):
    values = np.asarray(values, dtype=float)
    variances = np.asarray(variances, dtype=float)
    if np.any(variances <= 0):
        # an exact (zero-variance) estimate dominates
        exact = variances <= 0
        return float(values[exact].mean()), 0.0
    w = 1.0 / variances
    return float((w * values).sum() / w.sum()), float(1.0 / w.sum())


def _spin_mean(outcomes: np.ndarray):
    n = outcomes.size
    m = float(outcomes.mean())
    return m, max(1.0 - m * m, 0.0) / n


def estimate_correlators(pairs: MatchResult, geometry: ScreenGeometry,
                         bins=None) -> PauliCorrelators:
    """Estimate all 15 Pauli expectations with standard errors.

    Photon outcome is +1 for SPD0 and -1 for SPD1.  For electron ``z``
    settings the which-slit tag is the sign of the slit-image position
    (left slit = +1).  For ``x``/``y`` settings each photon branch is fitted
    with :func:`fit_fringes` and the cosine/sine quadratures give the
    conditioned electron expectation.
    """
    if bins is None:
        bins = grid_bins(geometry)
    present = {s for s in ALL_SETTINGS if pairs.select(s).any()}
    missing = [s for s in ALL_SETTINGS if s not in present]
    if missing:
        raise MissingSettingsError(f"no coincidences for settings: {', '.join(missing)}")

    d = np.zeros((3, 3))
    d_var = np.zeros((3, 3))
    b_parts = {ax: ([], []) for ax in AXES}
    c_parts = {ax: ([], []) for ax in AXES}
    for label in ALL_SETTINGS:
        e_ax, p_ax = label
        i, j = AXES.index(e_ax), AXES.index(p_ax)
        mask = pairs.select(label)
        photon = np.where(pairs.det[mask] == 0, 1.0, -1.0)
        n = photon.size
        c_val, c_v = _spin_mean(photon)
        c_parts[p_ax][0].append(c_val)
        c_parts[p_ax][1].append(c_v)
        if e_ax == "z":
            electron = np.where(pairs.x_m[mask] < 0, 1.0, -1.0)
            d[i, j], d_var[i, j] = _spin_mean(electron * photon)
            b_val, b_v = _spin_mean(electron)
        else:
            probs, means, mvars = [], [], []
            for det, sign in ((0, 1.0), (1, -1.0)):
                n_s = int(np.count_nonzero(photon == sign))
                if n_s == 0:
                    probs.append(0.0), means.append(0.0), mvars.append(0.0)
                    continue
                fit = fit_fringes(histogram_conditioned(pairs, bins, label, det), geometry)
                probs.append(n_s / n)
                means.append(fit.sx if e_ax == "x" else fit.sy)
                mvars.append((fit.sx_err if e_ax == "x" else fit.sy_err) ** 2)
            (pp, pm), (mp, mm), (vp, vm) = probs, means, mvars
            d[i, j] = pp * mp - pm * mm
            d_var[i, j] = pp**2 * vp + pm**2 * vm + (mp + mm) ** 2 * pp * pm / n
            b_val = pp * mp + pm * mm
            b_v = pp**2 * vp + pm**2 * vm + (mp - mm) ** 2 * pp * pm / n
        b_parts[e_ax][0].append(b_val)
        b_parts[e_ax][1].append(b_v)

    b, b_err, c, c_err = np.zeros(3), np.zeros(3), np.zeros(3), np.zeros(3)
    for k, ax in enumerate(AXES):
        b[k], bv = _combine(*b_parts[ax])
        c[k], cv = _combine(*c_parts[ax])
        b_err[k], c_err[k] = np.sqrt(bv), np.sqrt(cv)
    return PauliCorrelators(b, c, d, b_err, c_err, np.sqrt(d_var))
