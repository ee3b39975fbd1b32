"""Dense complex linear algebra used throughout the simulator.

States are 1-D complex ndarrays, operators are square 2-D complex
ndarrays.  Everything here is pure: no function mutates its inputs, so
values can be shared freely across sweep workers.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

# Tolerance for clipping tiny negative eigenvalues of density matrices
# produced by fixed-step integration round-off.
DENSITY_EIG_TOL = 1e-9

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _require_square(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError(f"{name} has non-finite entries")
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conjugate(np.swapaxes(a, -1, -2))


def ket(amplitudes) -> np.ndarray:
    """Normalized state vector from a sequence of amplitudes."""
    v = np.asarray(amplitudes, dtype=complex).ravel()
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / norm


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def matrix_exp(a: np.ndarray) -> np.ndarray:
    """Matrix exponential e^A of a square complex matrix.

    Delegates to scipy's scaling-and-squaring Pade implementation,
    which is accurate to ~1e-14 relative for the small, well-scaled
    generators (|A| <= 10) appearing in piecewise propagators.
    """
    a = _require_square(a)
    return scipy.linalg.expm(a)


def expm_hermitian(h: np.ndarray, scale: complex = 1.0) -> np.ndarray:
    """exp(scale * H) for Hermitian H via eigendecomposition.

    Faster and exactly unitary (to round-off) for anti-Hermitian
    arguments such as -i*H*dt propagator steps.
    """
    h = _require_square(h, "H")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(scale * w)) @ dagger(v)


def unitary_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """Gate fidelity |Tr(U V^dag)| / d, invariant under global phases.

    Also meaningful when U is a (sub-unitary) truncation of a larger
    propagator onto the computational subspace.
    """
    u = _require_square(u, "U")
    v = _require_square(v, "V")
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    d = u.shape[0]
    return float(abs(np.trace(u @ dagger(v))) / d)


def validate_density_matrix(rho: np.ndarray, eig_tol: float = DENSITY_EIG_TOL) -> np.ndarray:
    """Check Hermiticity/trace/positivity and return a cleaned copy.

    Eigenvalues in (-eig_tol, 0) are clipped to zero and the state is
    renormalized; anything more negative raises.
    """
    rho = _require_square(rho, "rho")
    if np.max(np.abs(rho - dagger(rho))) > 1e-8:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > 1e-6:
        raise ValueError(f"density matrix trace {np.trace(rho):.3g} != 1")
    rho = 0.5 * (rho + dagger(rho))
    w, v = np.linalg.eigh(rho)
    if np.min(w) < -eig_tol:
        raise ValueError(f"density matrix eigenvalue {np.min(w):.3g} below -{eig_tol:g}")
    w = np.clip(w, 0.0, None)
    rho = (v * w) @ dagger(v)
    return rho / np.trace(rho).real


def state_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    For pure sigma = |psi><psi| this reduces to <psi|rho|psi>.
    """
    rho = validate_density_matrix(rho)
    sigma = validate_density_matrix(sigma)
    if rho.shape != sigma.shape:
        raise ValueError("dimension mismatch")
    w, v = np.linalg.eigh(rho)
    sq = (v * np.sqrt(np.clip(w, 0, None))) @ dagger(v)
    inner = sq @ sigma @ sq
    ew = np.linalg.eigvalsh(inner)
    f = np.sum(np.sqrt(np.clip(ew, 0.0, None))) ** 2
    return float(min(max(f.real, 0.0), 1.0))


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with row-major composite index i_a*dim_b + i_b."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def matrix_to_json(a: np.ndarray) -> dict:
    """Serialize to {rows, cols, re, im} with deterministic field order."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError("expected a 2-D array")
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "re": a.real.tolist(),
        "im": a.imag.tolist(),
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    a = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    if a.shape != (obj["rows"], obj["cols"]):
        raise ValueError("shape fields disagree with data")
    return a
