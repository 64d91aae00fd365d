"""Small dense complex-matrix kernel for one- and two-qubit operators.

All two-qubit matrices use the basis order ``(LH, LV, RH, RV)``, i.e. the
electron (which-slit) qubit is the left tensor factor and the photon
(polarisation) qubit the right one.  ``|L>``/``|H>`` are the ``+1``
eigenvectors of sigma_z.

Matrices are plain ``numpy`` arrays.  :class:`DensityMatrix` is a thin,
validated wrapper used where a physical state is required.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-9

ID2 = np.eye(2, dtype=complex)
ID4 = np.eye(4, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"x": SX, "y": SY, "z": SZ}

ELECTRON = "electron"
PHOTON = "photon"

# Jacobi stops once the off-diagonal Frobenius norm drops below this
_JACOBI_OFFDIAG = 1e-12
_JACOBI_MAX_SWEEPS = 50


class InvalidDensityMatrix(ValueError):
    """Raised when a matrix fails one or more density-matrix invariants.

    ``failures`` holds ``(invariant, amount)`` pairs, where ``invariant`` is
    one of ``"shape"``, ``"trace"``, ``"hermiticity"`` or ``"eigenvalue"``
    and ``amount`` is the size of the violation.
    """

    def __init__(self, failures):
        self.failures = list(failures)
        msg = "; ".join(f"{name} violated by {amount:.3g}" for name, amount in self.failures)
        super().__init__(f"invalid density matrix: {msg}")


class NotHermitianError(ValueError):
    pass


class NotPositiveError(ValueError):
    pass


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a square complex ndarray (unwrapping DensityMatrix)."""
    if isinstance(m, DensityMatrix):
        return m.mat
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def adjoint(m) -> np.ndarray:
    return as_matrix(m).conj().T


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product ``a (x) b``; for qubits ``a`` is the electron factor."""
    return np.kron(as_matrix(a), as_matrix(b))


def ket(*labels: str) -> np.ndarray:
    """Basis ket from labels, e.g. ``ket("L", "H")`` -> ``|LH>``."""
    single = {
        "L": np.array([1, 0], dtype=complex),
        "R": np.array([0, 1], dtype=complex),
        "H": np.array([1, 0], dtype=complex),
        "V": np.array([0, 1], dtype=complex),
    }
    out = np.ones(1, dtype=complex)
    for lab in labels:
        out = np.kron(out, single[lab])
    return out


def projector(vec) -> np.ndarray:
    """``|v><v|`` for a (not necessarily normalised) vector."""
    v = np.asarray(vec, dtype=complex).ravel()
    return np.outer(v, v.conj())


def partial_trace(rho, subsystem: str = PHOTON) -> np.ndarray:
    """Trace out ``subsystem`` ("electron" or "photon") of a 4x4 operator.

    Returns the 2x2 operator of the remaining qubit.  Trace is preserved.
    """
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError(f"partial_trace needs a 4x4 matrix, got {m.shape}")
    t = m.reshape(2, 2, 2, 2)  # indices (e, ph, e', ph')
    if subsystem == PHOTON:
        return np.einsum("ijkj->ik", t)
    if subsystem == ELECTRON:
        return np.einsum("ijil->jl", t)
    raise ValueError(f"unknown subsystem {subsystem!r}")


def partial_transpose(rho, subsystem: str = PHOTON) -> np.ndarray:
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError(f"partial_transpose needs a 4x4 matrix, got {m.shape}")
    t = m.reshape(2, 2, 2, 2)
    if subsystem == PHOTON:
        t = t.transpose(0, 3, 2, 1)
    elif subsystem == ELECTRON:
        t = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"unknown subsystem {subsystem!r}")
    return t.reshape(4, 4)


def hermiticity_error(m) -> float:
    a = as_matrix(m)
    return float(np.max(np.abs(a - a.conj().T)))


def _eigh_2x2(m: np.ndarray):
    a = m[0, 0].real
    d = m[1, 1].real
    b = m[0, 1]
    mean = 0.5 * (a + d)
    rad = np.hypot(0.5 * (a - d), abs(b))
    vals = np.array([mean + rad, mean - rad])
    if abs(b) == 0.0:
        if a >= d:
            vecs = np.eye(2, dtype=complex)
        else:
            vecs = np.array([[0, 1], [1, 0]], dtype=complex)
        return np.array([max(a, d), min(a, d)]), vecs
    cols = []
    for lam in vals:
        # (a - lam) x + b y = 0 and conj(b) x + (d - lam) y = 0; take the better-conditioned row
        u = np.array([b, lam - a], dtype=complex)
        w = np.array([lam - d, np.conj(b)], dtype=complex)
        vec = u if np.linalg.norm(u) >= np.linalg.norm(w) else w
        cols.append(vec / np.linalg.norm(vec))
    vecs = np.column_stack(cols)
    # re-orthogonalise the second column against the first
    v0 = vecs[:, 0]
    v1 = vecs[:, 1] - np.vdot(v0, vecs[:, 1]) * v0
    vecs[:, 1] = v1 / np.linalg.norm(v1)
    return vals, vecs


def _eigh_jacobi(m: np.ndarray):
    """Cyclic complex Jacobi for a Hermitian matrix."""
    a = m.copy()
    n = a.shape[0]
    vecs = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), 1.0)
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = np.linalg.norm(a[offmask])
        if off < _JACOBI_OFFDIAG * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300 or mag < 1e-18 * scale:
                    a[p, q] = a[q, p] = 0.0
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # J = diag phase on q, followed by a real Givens rotation in (p, q)
                rot = np.eye(n, dtype=complex)
                rot[p, p] = c
                rot[q, q] = c * np.conj(phase)
                rot[p, q] = s
                rot[q, p] = -s * np.conj(phase)
                a = rot.conj().T @ a @ rot
                a[p, q] = a[q, p] = 0.0
                vecs = vecs @ rot
    else:
        raise RuntimeError("Jacobi eigensolver did not converge")
    return np.diag(a).real.copy(), vecs


def hermitian_eigensystem(m, tol: float = DEFAULT_TOL):
    """Eigen-decomposition of a Hermitian matrix.

    Returns ``(values, vectors)`` with real eigenvalues in descending order
    and orthonormal eigenvectors as the columns of ``vectors``.  2x2 inputs
    use the closed form; larger ones use cyclic Jacobi rotations.
    """
    a = as_matrix(m)
    herr = hermiticity_error(a)
    if herr > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max |M - M^H| = {herr:.3g})")
    a = 0.5 * (a + a.conj().T)
    if a.shape == (1, 1):
        return np.array([a[0, 0].real]), np.ones((1, 1), dtype=complex)
    if a.shape == (2, 2):
        vals, vecs = _eigh_2x2(a)
    else:
        vals, vecs = _eigh_jacobi(a)
    order = np.argsort(-vals, kind="stable")
    return vals[order], vecs[:, order]


def psd_sqrt(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Principal square root of a Hermitian positive-semidefinite matrix.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero, as are positive
    eigenvalues that are indistinguishable from rounding noise.
    """
    vals, vecs = hermitian_eigensystem(m, tol=tol)
    if vals.size and vals[-1] < -tol:
        raise NotPositiveError(f"matrix has eigenvalue {vals[-1]:.3g} < -{tol:g}")
    noise = 64 * np.finfo(float).eps * max(abs(vals[0]), 1.0)
    roots = np.sqrt(np.where(vals > noise, vals, 0.0))
    return (vecs * roots) @ vecs.conj().T


def density_diagnostics(m, tol: float = DEFAULT_TOL):
    """List ``(invariant, amount)`` violations of the density-matrix invariants."""
    a = np.asarray(m.mat if isinstance(m, DensityMatrix) else m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in (2, 4):
        return [("shape", float("inf"))]
    failures = []
    tr_dev = abs(np.trace(a) - 1.0)
    if tr_dev > tol:
        failures.append(("trace", float(tr_dev)))
    herr = hermiticity_error(a)
    if herr > tol:
        failures.append(("hermiticity", herr))
        return failures
    vals, _ = hermitian_eigensystem(a, tol=np.inf)
    if vals[-1] < -tol:
        failures.append(("eigenvalue", float(-vals[-1])))
    return failures


@dataclass(frozen=True)
class DensityMatrix:
    """A validated 2x2 or 4x4 density matrix (see :func:`validate_density`)."""

    mat: np.ndarray
    tol: float = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self):
        arr = np.array(self.mat, dtype=complex)
        arr.setflags(write=False)
        object.__setattr__(self, "mat", arr)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.mat if dtype is None else self.mat.astype(dtype)

    def expect(self, op) -> float:
        """Real part of ``Tr(op @ rho)``."""
        return float(np.trace(as_matrix(op) @ self.mat).real)


def validate_density(m, tol: float = DEFAULT_TOL) -> DensityMatrix:
    """Check trace, Hermiticity and positivity, and wrap ``m``.

    Raises :class:`InvalidDensityMatrix` listing every failed invariant.
    """
    failures = density_diagnostics(m, tol)
    if failures:
        raise InvalidDensityMatrix(failures)
    a = np.asarray(m.mat if isinstance(m, DensityMatrix) else m, dtype=complex)
    return DensityMatrix(0.5 * (a + a.conj().T), tol)


def as_density(rho, tol: float = DEFAULT_TOL) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    return validate_density(rho, tol)
