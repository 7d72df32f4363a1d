"""Dominant products: candidate search and finite-horizon certificates.

A simple word ``pi`` is dominant when, after dividing the family by its joint
spectral radius, every product whose word is not a power of a rotation of
``pi`` has spectral radius below a fixed ``q < 1``. That quantifies over all
lengths; :func:`verify_dominance` can only enumerate up to a horizon, and the
certificate it returns says so.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BudgetExceeded, InvalidInput
from .growth import DEFAULT_BUDGET, MatrixFamily
from .matlib import eigenvalues, spectral_radius
from .words import (Word, WordLike, as_word, is_power_of_rotation, is_simple, lyndon_words,
                    necklaces, word_str)

DEFAULT_Q = 0.95
DEFAULT_HORIZON = 12

FINITE_HORIZON_NOTE = (
    "finite-horizon certificate: products up to the stated length were enumerated; "
    "dominance over all lengths is not established"
)


@dataclass(frozen=True)
class LeadingEigenvalue:
    value: complex
    unique: bool
    simple: bool
    modulus: float


def leading_eigenvalue(prod, tol: float = 1e-8) -> LeadingEigenvalue:
    """Largest-modulus eigenvalue and whether it is unique and simple.

    A complex conjugate pair counts as unique. ``value`` is the real member, or
    the member with positive imaginary part.
    """
    ev = eigenvalues(prod)
    rho = float(np.max(np.abs(ev)))
    scale = max(rho, 1e-300)
    lead = [complex(z) for z in ev if abs(z) >= rho - tol * scale]
    # cluster the leading eigenvalues into distinct values
    clusters: list[list[complex]] = []
    for z in lead:
        for c in clusters:
            if abs(z - c[0]) <= tol * scale:
                c.append(z)
                break
        else:
            clusters.append([z])
    reps = [sum(c) / len(c) for c in clusters]
    reps_sorted = sorted(range(len(reps)), key=lambda i: (-reps[i].real, -reps[i].imag))
    pick = reps_sorted[0]
    value = reps[pick]
    if abs(value.imag) <= tol * scale:
        value = complex(value.real, 0.0)
        unique = len(clusters) == 1
    else:
        conj_present = any(abs(r - value.conjugate()) <= tol * scale for r in reps)
        unique = len(clusters) == 2 and conj_present
        if value.imag < 0:
            value = value.conjugate()
    simple = len(clusters[pick]) == 1
    return LeadingEigenvalue(value, unique, simple, rho)


@dataclass(frozen=True)
class Candidate:
    pi: Word
    rho_estimate: float
    lmax: int
    partial: bool = False


def candidate_dominant(fam: MatrixFamily, lmax: int = 8, *, budget: int = DEFAULT_BUDGET) -> Candidate:
    """Simple word of length <= ``lmax`` maximising ``rho(P_w)^(1/|w|)``.

    Only Lyndon words are scanned (each cyclic class of simple words once, by
    its least rotation), shortest first, and a later word replaces the current
    best only if it is larger by more than a relative 1e-12.
    """
    if lmax < 1:
        raise InvalidInput("lmax must be positive")
    words = sorted(lyndon_words(len(fam), lmax), key=lambda w: (len(w), w))
    partial = len(words) > budget
    if partial:
        words = words[:budget]
    best, best_rate = None, -1.0
    for w in words:
        rate = spectral_radius(fam.product(w)) ** (1.0 / len(w))
        if best is None or rate > best_rate * (1 + 1e-12):
            best, best_rate = w, rate
    return Candidate(best, best_rate, lmax, partial)


@dataclass(frozen=True)
class DominanceCertificate:
    pi: Word
    horizon: int
    q: float
    rho_estimate: float
    leading: LeadingEigenvalue
    violations: tuple[Word, ...]
    max_normalized_radius: float
    worst_word: Word
    words_checked: int
    note: str = field(default=FINITE_HORIZON_NOTE)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "pi": word_str(self.pi),
            "horizon": self.horizon,
            "q": self.q,
            "rho_estimate": self.rho_estimate,
            "leading_value": [self.leading.value.real, self.leading.value.imag],
            "leading_unique": self.leading.unique,
            "leading_simple": self.leading.simple,
            "violations": [word_str(w) for w in self.violations],
            "max_normalized_radius": self.max_normalized_radius,
            "worst_word": word_str(self.worst_word),
            "words_checked": self.words_checked,
            "certified": self.ok,
            "note": self.note,
        }

    def to_text(self) -> str:
        d = self.to_dict()
        lines = [f"{k}: {v}" for k, v in d.items() if k not in ("violations", "leading_value")]
        lines.insert(4, f"leading_value: {_fmt_complex(self.leading.value)}")
        lines.append("violations: " + (", ".join(d["violations"]) if d["violations"] else "none"))
        return "\n".join(lines) + "\n"


def _fmt_complex(z: complex) -> str:
    if z.imag == 0:
        return f"{z.real:.12g}"
    return f"{z.real:.12g}{z.imag:+.12g}i"


def verify_dominance(fam: MatrixFamily, pi: WordLike, horizon: int = DEFAULT_HORIZON,
                     q: float = DEFAULT_Q, *, rho: Optional[float] = None, tol: float = 1e-8,
                     budget: int = DEFAULT_BUDGET) -> DominanceCertificate:
    """Check the dominance gap for every product up to length ``horizon``.

    The family is normalised by ``rho`` (default: ``rho(P_pi)^(1/|pi|)``, the
    value a candidate search would report). Spectral radius is invariant under
    rotation of the word, so one word per cyclic class is enumerated;
    violations are reported by their least rotation.
    """
    if not 0 < q < 1:
        raise InvalidInput("q must lie in (0, 1)")
    if horizon < 1:
        raise InvalidInput("horizon must be positive")
    pi = as_word(pi)
    if not pi or not is_simple(pi):
        raise InvalidInput("pi must be a nonempty simple word")
    if max(pi) >= len(fam):
        raise InvalidInput("pi uses letters outside the family")
    pi_prod = fam.product(pi)
    if rho is None:
        rho = spectral_radius(pi_prod) ** (1.0 / len(pi))
    if not rho > 0:
        raise InvalidInput("normalisation constant must be positive")
    m = len(fam)
    count = sum(m ** j for j in range(1, horizon + 1))
    if count > budget:
        raise BudgetExceeded(f"{count} products exceed the budget of {budget}", achieved=0)
    violations = []
    worst, worst_word, checked = 0.0, (), 0
    log_rho = math.log(rho)
    for w in necklaces(m, horizon):
        if is_power_of_rotation(w, pi):
            continue
        checked += 1
        r = spectral_radius(fam.product(w))
        nr = math.exp(math.log(r) - len(w) * log_rho) if r > 0 else 0.0
        if nr > worst:
            worst, worst_word = nr, w
        if nr >= q:
            violations.append(w)
    lead = leading_eigenvalue(pi_prod, tol)
    return DominanceCertificate(pi, horizon, q, float(rho), lead, tuple(violations),
                                worst, worst_word, checked)
