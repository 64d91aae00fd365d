"""Entanglement measures, Bell-state witness and Pauli-basis tomography."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import qmat
from .model import condition_on_photon, photon_projector
from .qmat import DensityMatrix, as_density

AXES = ("x", "y", "z")

# eigenvalues of rho * rho_tilde below this count as zero
_WOOTTERS_CLAMP = 1e-14
# square roots amplify rounding: lambda_1 - sum(rest) below this is reported as 0
_CONCURRENCE_FLOOR = 1e-10

SYSY = np.kron(qmat.SY, qmat.SY)


def spin_flip(rho) -> np.ndarray:
    """``(sy (x) sy) rho^* (sy (x) sy)``."""
    m = qmat.as_matrix(rho)
    return SYSY @ m.conj() @ SYSY


def _wootters(mu) -> float:
    mu = np.where(np.abs(mu) < _WOOTTERS_CLAMP, 0.0, mu)
    lam = np.sort(np.sqrt(np.clip(mu, 0.0, None)))[::-1]
    c = lam[0] - lam[1:].sum()
    if c < _CONCURRENCE_FLOOR:
        return 0.0
    return float(min(c, 1.0))


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit state.

    Uses the square roots of the eigenvalues of the (non-Hermitian) product
    ``rho @ spin_flip(rho)``; tiny imaginary/negative parts are discarded.
    """
    m = as_density(rho).mat
    if m.shape != (4, 4):
        raise ValueError("concurrence needs a two-qubit state")
    mu = np.linalg.eigvals(m @ spin_flip(m)).real
    return _wootters(mu)


def concurrence_via_sqrt(rho) -> float:
    """Same quantity from the spectrum of ``sqrt(sqrt(rho) rho~ sqrt(rho))``.

    Independent route through the Hermitian kernel; used as a cross-check.
    """
    m = as_density(rho).mat
    root = qmat.psd_sqrt(m)
    inner = root @ spin_flip(m) @ root
    mu, _ = qmat.hermitian_eigensystem(0.5 * (inner + inner.conj().T))
    return _wootters(mu)


def pure_concurrence(psi) -> float:
    """``2 |det|`` of the 2x2 amplitude matrix of a normalised pure state."""
    amp = np.asarray(psi, dtype=complex).reshape(2, 2)
    return float(2.0 * abs(np.linalg.det(amp)))


def negativity(rho) -> float:
    """Sum of the negative eigenvalues (in modulus) of the photon partial transpose."""
    m = as_density(rho).mat
    vals, _ = qmat.hermitian_eigensystem(qmat.partial_transpose(m, qmat.PHOTON))
    return float(np.abs(vals[vals < 0]).sum())


@dataclass
class PauliCorrelators:
    """Electron singles ``b``, photon singles ``c`` and two-body ``d``.

    ``d[i, j] = <sigma_i (x) sigma_j>`` with ``i`` the electron axis.
    """

    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    b_err: np.ndarray | None = None
    c_err: np.ndarray | None = None
    d_err: np.ndarray | None = None
    tol: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float).reshape(3)
        self.c = np.asarray(self.c, dtype=float).reshape(3)
        self.d = np.asarray(self.d, dtype=float).reshape(3, 3)

    def in_range(self) -> bool:
        lim = 1.0 + self.tol
        return all(np.all(np.abs(arr) <= lim) for arr in (self.b, self.c, self.d))

    def dd(self, ij: str) -> float:
        """Two-body correlator by axis label, e.g. ``dd("xx")``."""
        return float(self.d[AXES.index(ij[0]), AXES.index(ij[1])])

    def to_dict(self) -> dict:
        out = {"b": self.b.tolist(), "c": self.c.tolist(), "d": self.d.tolist()}
        for name in ("b_err", "c_err", "d_err"):
            val = getattr(self, name)
            if val is not None:
                out[name] = np.asarray(val).tolist()
        return out


def pauli_correlators(rho) -> PauliCorrelators:
    m = as_density(rho).mat
    ev = lambda op: float(np.trace(op @ m).real)  # noqa: E731
    b = [ev(np.kron(qmat.PAULI[i], qmat.ID2)) for i in AXES]
    c = [ev(np.kron(qmat.ID2, qmat.PAULI[j])) for j in AXES]
    d = [[ev(np.kron(qmat.PAULI[i], qmat.PAULI[j])) for j in AXES] for i in AXES]
    return PauliCorrelators(b, c, d)


def bell_fidelity(k: PauliCorrelators) -> float:
    """Fidelity with ``(|LH> + |RV>)/sqrt(2)`` from the xx, yy, zz correlators."""
    return 0.25 * (1.0 + k.dd("xx") - k.dd("yy") + k.dd("zz"))


def witness_expectation(k: PauliCorrelators) -> float:
    """``<id - |psi><psi|>`` normalised so that negative values certify entanglement."""
    return 0.5 - bell_fidelity(k)


def eraser_criterion(k: PauliCorrelators) -> tuple[float, bool]:
    """``|<xx> + <zz>|`` and whether it exceeds 1.

    A ``False`` verdict is inconclusive; it never implies separability.
    """
    lhs = abs(k.dd("xx") + k.dd("zz"))
    return lhs, lhs > 1.0


def fringe_correlators(branches, tol: float = 1e-9) -> np.ndarray:
    """Electron correlators for one photon basis from conditioned fringes.

    ``branches`` is an iterable of ``(outcome, probability, rho_e)`` with
    ``outcome`` = +1/-1 for the two photon detector ports.  Each conditioned
    pattern ``1 + <sx> cos(phi) + <sy> sin(phi)`` contributes its signed,
    probability-weighted quadratures; which-slit populations give ``<sz>``.

    Returns ``array([d_x, d_y, d_z])`` for that photon basis.
    """
    branches = list(branches)
    total = sum(p for _, p, _ in branches)
    if abs(total - 1.0) > tol:
        raise ValueError(f"branch probabilities sum to {total!r}, not 1")
    out = np.zeros(3)
    for outcome, prob, rho_e in branches:
        m = qmat.as_matrix(rho_e)
        out[0] += prob * outcome * 2.0 * m[0, 1].real
        out[1] += prob * outcome * -2.0 * m[0, 1].imag
        out[2] += prob * outcome * (m[0, 0] - m[1, 1]).real
    return out


def correlators_from_conditioning(rho, basis: str) -> np.ndarray:
    """Condition ``rho`` on both outcomes of photon ``basis`` and bridge to correlators."""
    branches = []
    for outcome in (1, -1):
        try:
            rho_e, prob = condition_on_photon(rho, photon_projector(basis, outcome))
        except ValueError:
            continue  # zero-probability branch contributes nothing
        branches.append((outcome, prob, rho_e))
    return fringe_correlators(branches)


@dataclass(frozen=True)
class Reconstruction:
    state: DensityMatrix
    raw: np.ndarray
    adjustment: float


def linear_inversion(k: PauliCorrelators) -> np.ndarray:
    rho = np.kron(qmat.ID2, qmat.ID2).astype(complex)
    for i, ax in enumerate(AXES):
        rho += k.b[i] * np.kron(qmat.PAULI[ax], qmat.ID2)
        rho += k.c[i] * np.kron(qmat.ID2, qmat.PAULI[ax])
        for j, ay in enumerate(AXES):
            rho += k.d[i, j] * np.kron(qmat.PAULI[ax], qmat.PAULI[ay])
    return rho / 4.0


def reconstruct_state(k: PauliCorrelators, tol: float = qmat.DEFAULT_TOL) -> Reconstruction:
    """Linear-inversion tomography with eigenvalue clipping.

    ``adjustment`` is the trace distance between the raw inversion and the
    returned physical state (0 when no projection was needed).
    """
    raw = linear_inversion(k)
    vals, vecs = qmat.hermitian_eigensystem(raw)
    if vals[-1] >= -tol:
        return Reconstruction(qmat.validate_density(raw, tol), raw, 0.0)
    clipped = np.clip(vals, 0.0, None)
    clipped /= clipped.sum()
    proj = (vecs * clipped) @ vecs.conj().T
    diff_vals, _ = qmat.hermitian_eigensystem(raw - proj)
    return Reconstruction(qmat.validate_density(proj, tol), raw, float(0.5 * np.abs(diff_vals).sum()))


@dataclass
class EntanglementReport:
    concurrence: float
    negativity: float
    bell_fidelity: float
    witness_expectation: float
    eraser_lhs: float
    flags: list[str]

    def to_dict(self) -> dict:
        return {
            "concurrence": self.concurrence,
            "negativity": self.negativity,
            "bell_fidelity": self.bell_fidelity,
            "witness_expectation": self.witness_expectation,
            "eraser_lhs": self.eraser_lhs,
            "flags": list(self.flags),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def entanglement_report(rho, tol: float = 1e-12) -> EntanglementReport:
    """Evaluate every measure and criterion; ``flags`` names those that fired."""
    rho = as_density(rho)
    k = pauli_correlators(rho)
    conc = concurrence(rho)
    neg = negativity(rho)
    fid = bell_fidelity(k)
    lhs, eraser = eraser_criterion(k)
    flags = []
    if conc > tol:
        flags.append("concurrence")
    if neg > tol:
        flags.append("negativity")
    if fid > 0.5 + tol:
        flags.append("bell_fidelity")
    if eraser and lhs > 1.0 + tol:
        flags.append("eraser_criterion")
    return EntanglementReport(conc, neg, fid, 0.5 - fid, lhs, flags)
