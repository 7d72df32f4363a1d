"""Small dense linear algebra: norms, spectra, Jordan structure, exponentials.

All public matrices are real ``float64`` arrays of dimension 2..8; complex
arithmetic only appears internally (eigenvalues, Jordan probing at complex
eigenvalues).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NumericOverflow


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a square matrix, grouped into distinct values."""

    eigenvalues: tuple[complex, ...]
    multiplicities: tuple[int, ...]
    spectral_radius: float


def as_matrix(m, name="matrix") -> np.ndarray:
    """Validate ``m`` as a finite square real matrix and return a float copy."""
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InvalidInput(f"{name} must be a nonempty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} has non-finite entries")
    return a


def eigenvalues(m) -> np.ndarray:
    """All eigenvalues (with repetition) as a complex array."""
    return np.linalg.eigvals(as_matrix(m)).astype(complex)


def spectral_radius(m) -> float:
    """Largest eigenvalue modulus of ``m``."""
    return float(np.max(np.abs(eigenvalues(m))))


def spectrum(m, tol: float = 1e-9) -> Spectrum:
    """Distinct eigenvalues (clustered within ``tol`` relative) with multiplicities."""
    ev = eigenvalues(m)
    rho = float(np.max(np.abs(ev)))
    scale = max(rho, 1.0)
    order = sorted(range(len(ev)), key=lambda i: (-abs(ev[i]), -ev[i].real, -ev[i].imag))
    values: list[complex] = []
    counts: list[int] = []
    for i in order:
        z = complex(ev[i])
        for j, v in enumerate(values):
            if abs(z - v) <= tol * scale:
                counts[j] += 1
                break
        else:
            values.append(z)
            counts.append(1)
    return Spectrum(tuple(values), tuple(counts), rho)


def _norm2_small(a: np.ndarray) -> float:
    if a.shape == (2, 2):
        # closed form for the largest singular value of a 2x2 matrix
        p, q, r, s = a[0, 0], a[0, 1], a[1, 0], a[1, 1]
        fro2 = p * p + q * q + r * r + s * s
        det = p * s - q * r
        disc = max(fro2 * fro2 - 4.0 * det * det, 0.0)
        return math.sqrt(0.5 * (fro2 + math.sqrt(disc)))
    return float(np.linalg.norm(a, 2))


def operator_norm(m) -> float:
    """Euclidean operator norm (largest singular value)."""
    return _norm2_small(as_matrix(m))


def _numerical_rank(a: np.ndarray, threshold: float) -> int:
    sv = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(sv > threshold))


def jordan_order(m, lam: complex, tol: float = 1e-8) -> int:
    """Size of the largest Jordan block of ``m`` at eigenvalue ``lam``.

    Uses the rank sequence of ``(m - lam I)^j``: the number of blocks of size
    at least ``j`` is ``rank(N^(j-1)) - rank(N^j)``. Singular values below
    ``tol * scale**j`` count as zero, with ``scale = max(||m||, |lam|, 1e-300)``
    so the threshold is invariant under rescaling ``m`` and ``lam`` together.
    Returns 0 when ``lam`` is not an eigenvalue within that threshold.
    """
    if not tol > 0:
        raise InvalidInput("tol must be positive")
    a = as_matrix(m)
    d = a.shape[0]
    lam = complex(lam)
    scale = max(float(np.linalg.norm(a, 2)), abs(lam), 1e-300)
    n = (a - lam * np.eye(d)) / scale
    ranks = [d]
    power = np.eye(d, dtype=complex)
    for _ in range(d):
        power = power @ n
        ranks.append(_numerical_rank(power, tol))
        if ranks[-1] == ranks[-2]:
            break
    largest = 0
    for j in range(1, len(ranks)):
        if ranks[j - 1] - ranks[j] > 0:
            largest = j
    return largest


_TAYLOR_DEGREE = 18


def matrix_exp(m, t: float = 1.0) -> np.ndarray:
    """``exp(t m)`` by scaling and squaring around a truncated Taylor series."""
    a = as_matrix(m)
    t = float(t)
    if not math.isfinite(t):
        raise InvalidInput("t must be finite")
    x = t * a
    d = a.shape[0]
    nrm = float(np.linalg.norm(x, 1))
    squarings = 0
    if nrm > 0.5:
        squarings = int(math.ceil(math.log2(nrm / 0.5)))
    x = x / (2.0 ** squarings)
    # Horner evaluation of sum_{j<=deg} x^j / j!
    e = np.eye(d)
    for j in range(_TAYLOR_DEGREE, 0, -1):
        e = np.eye(d) + (x @ e) / j
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(squarings):
            e = e @ e
            if not np.all(np.isfinite(e)):
                raise NumericOverflow(f"matrix exponential overflowed (||t m||_1 = {nrm:.3g})")
    return e

