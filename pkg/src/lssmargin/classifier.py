"""Marginal-instability classification of two-block upper-triangular families.

For a family in the form ``[[A1, C], [0, A2]]`` whose diagonal blocks each
have a dominant word with a unique simple leading eigenvalue, the family (after
normalisation) is marginally unstable exactly when

1. the two dominant words agree up to rotation, and
2. the leading eigenvalues of the two block products of that word are equal,
   and the full product has a nontrivial Jordan block at that eigenvalue.

Growth is then linear in the product length; otherwise products stay bounded.
The block structure is an input: finding a common invariant subspace is not
attempted. Dominance is certified only up to a finite horizon, so every
verdict is conditional on those certificates.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dominance import (DEFAULT_HORIZON, DEFAULT_Q, FINITE_HORIZON_NOTE, DominanceCertificate,
                        candidate_dominant, leading_eigenvalue, verify_dominance)
from .errors import DominanceUncertified, HypothesesUnmet, InvalidInput
from .growth import MatrixFamily
from .matlib import as_matrix, jordan_order
from .words import Word, WordLike, as_word, cyclically_equal, word_str


class Verdict(str, enum.Enum):
    STABLE = "MarginallyStable"
    UNSTABLE = "MarginallyUnstable"


@dataclass(frozen=True)
class BlockFamily:
    block1: MatrixFamily
    block2: MatrixFamily
    couplings: tuple[np.ndarray, ...]

    def __init__(self, block1, block2, couplings):
        b1 = block1 if isinstance(block1, MatrixFamily) else MatrixFamily(block1)
        b2 = block2 if isinstance(block2, MatrixFamily) else MatrixFamily(block2)
        if len(b1) != len(b2) or len(b1) != len(couplings):
            raise InvalidInput("blocks and couplings must share one alphabet")
        cs = []
        for i, c in enumerate(couplings):
            c = np.array(c, dtype=float).reshape(b1.dim, b2.dim) if np.size(c) == b1.dim * b2.dim else None
            if c is None:
                raise InvalidInput(f"coupling {i} must be {b1.dim}x{b2.dim}")
            if not np.all(np.isfinite(c)):
                raise InvalidInput(f"coupling {i} has non-finite entries")
            c.setflags(write=False)
            cs.append(c)
        object.__setattr__(self, "block1", b1)
        object.__setattr__(self, "block2", b2)
        object.__setattr__(self, "couplings", tuple(cs))

    @property
    def d1(self) -> int:
        return self.block1.dim

    @property
    def d2(self) -> int:
        return self.block2.dim

    def __len__(self) -> int:
        return len(self.block1)

    @classmethod
    def from_family(cls, fam: MatrixFamily, d1: int) -> "BlockFamily":
        """Read the blocks off a family already in block upper-triangular form."""
        d = fam.dim
        if not 0 < d1 < d:
            raise InvalidInput(f"d1 must be in 1..{d - 1}")
        for i, m in enumerate(fam):
            if np.any(m[d1:, :d1] != 0):
                raise InvalidInput(f"matrix {i} is not block upper-triangular for d1={d1}")
        return cls(MatrixFamily([m[:d1, :d1] for m in fam]),
                   MatrixFamily([m[d1:, d1:] for m in fam]),
                   [m[:d1, d1:] for m in fam])

    def scaled_couplings(self, c: float) -> "BlockFamily":
        return BlockFamily(self.block1, self.block2, [c * q for q in self.couplings])


def assemble(bf: BlockFamily) -> MatrixFamily:
    """Matrices ``[[block1, coupling], [0, block2]]``, one per letter."""
    d1, d2 = bf.d1, bf.d2
    mats = []
    for a, b, c in zip(bf.block1, bf.block2, bf.couplings):
        m = np.zeros((d1 + d2, d1 + d2))
        m[:d1, :d1] = a
        m[:d1, d1:] = c
        m[d1:, d1:] = b
        mats.append(m)
    return MatrixFamily(mats, bf.block1.labels)


def coupling_sum(bf: BlockFamily, segment_words: Sequence[WordLike]) -> np.ndarray:
    """Top-right block of the product over concatenated segments, summed segment-wise.

    Computes ``sum_r P1_1 ... P1_(r-1) Q_r P2_(r+1) ... P2_k`` where ``Pi_j`` is
    the block-``i`` product of segment ``j`` and ``Q_r`` the top-right block of
    the full product of segment ``r``.
    """
    segs = [as_word(w) for w in segment_words]
    if not segs:
        raise InvalidInput("need at least one segment")
    full = assemble(bf)
    d1 = bf.d1
    p1 = [bf.block1.product(w) for w in segs]
    p2 = [bf.block2.product(w) for w in segs]
    q = [full.product(w)[:d1, d1:] for w in segs]
    k = len(segs)
    # suffix products of block 2, prefix products of block 1
    suffix = [np.eye(bf.d2) for _ in range(k + 1)]
    for j in range(k - 1, -1, -1):
        suffix[j] = p2[j] @ suffix[j + 1]
    total = np.zeros((d1, bf.d2))
    prefix = np.eye(d1)
    for r in range(k):
        total += prefix @ q[r] @ suffix[r + 1]
        prefix = prefix @ p1[r]
    return total


@dataclass(frozen=True)
class Evidence:
    pi1: Word
    pi2: Word
    cyclic_match: bool
    lambda1: complex
    lambda2: complex
    eigen_match: bool
    eigen_residual: float
    jordan_order: int
    jordan_nontrivial: bool


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    growth: str
    evidence: Evidence
    certificates: tuple[DominanceCertificate, DominanceCertificate]
    rho1: float
    rho2: float
    horizon: int
    q: float
    tol: float

    @property
    def rho(self) -> float:
        return max(self.rho1, self.rho2)

    def to_dict(self) -> dict:
        ev = self.evidence
        return {
            "verdict": self.verdict.value,
            "growth": self.growth,
            "blocks": 2,
            "rho_block1": self.rho1,
            "rho_block2": self.rho2,
            "pi1": word_str(ev.pi1),
            "pi2": word_str(ev.pi2),
            "cyclic_match": ev.cyclic_match,
            "lambda1": [ev.lambda1.real, ev.lambda1.imag],
            "lambda2": [ev.lambda2.real, ev.lambda2.imag],
            "eigen_match": ev.eigen_match,
            "eigen_residual": ev.eigen_residual,
            "jordan_order": ev.jordan_order,
            "jordan_nontrivial": ev.jordan_nontrivial,
            "horizon": self.horizon,
            "q": self.q,
            "tol": self.tol,
            "certificates": [c.to_dict() for c in self.certificates],
            "note": "verdict conditional on dominance; " + FINITE_HORIZON_NOTE,
        }

    def to_text(self) -> str:
        ev = self.evidence
        lines = [
            f"verdict: {self.verdict.value}",
            f"growth: {self.growth}",
            f"block JSR estimates: {self.rho1:.12g}, {self.rho2:.12g}",
            f"dominant words: pi1={word_str(ev.pi1)} pi2={word_str(ev.pi2)} cyclic_match={ev.cyclic_match}",
            f"leading eigenvalues: lambda1={_c(ev.lambda1)} lambda2={_c(ev.lambda2)} "
            f"eigen_match={ev.eigen_match} (residual {ev.eigen_residual:.3g})",
            f"jordan order of pi(A) at lambda: {ev.jordan_order} nontrivial={ev.jordan_nontrivial}",
        ]
        for i, c in enumerate(self.certificates, 1):
            lines.append(f"block {i} certificate: pi={word_str(c.pi)} horizon={c.horizon} q={c.q} "
                         f"max normalized radius={c.max_normalized_radius:.6g} "
                         f"violations={len(c.violations)}")
        lines.append("note: verdict conditional on dominance; " + FINITE_HORIZON_NOTE)
        return "\n".join(lines) + "\n"


def _c(z: complex) -> str:
    return f"{z.real:.12g}" if z.imag == 0 else f"{z.real:.12g}{z.imag:+.12g}i"


def _block_hypotheses(block: MatrixFamily, idx: int, horizon: int, q: float, tol: float, lmax: int):
    cand = candidate_dominant(block, lmax)
    cert = verify_dominance(block, cand.pi, horizon, q, rho=cand.rho_estimate, tol=tol)
    if not cert.ok:
        raise DominanceUncertified(
            f"block {idx}: candidate pi={word_str(cand.pi)} has violations "
            f"{', '.join(word_str(w) for w in cert.violations[:5])} at horizon {horizon}",
            block=idx, certificate=cert)
    lead = cert.leading
    if not (lead.unique and lead.simple):
        raise HypothesesUnmet(
            f"block {idx}: leading eigenvalue of pi={word_str(cand.pi)} is "
            f"{'not unique' if not lead.unique else 'not simple'}",
            block=idx, reason="leading-eigenvalue")
    return cand, cert


def _eigen_distance(l1: complex, l2: complex) -> float:
    # complex leading eigenvalues come in conjugate pairs; compare as sets
    return min(abs(l1 - l2), abs(l1 - l2.conjugate()))


def classify(bf: BlockFamily, horizon: int = DEFAULT_HORIZON, q: float = DEFAULT_Q,
             tol: float = 1e-8, lmax: Optional[int] = None) -> Classification:
    """Decide marginal stability of the assembled family.

    Raises :class:`HypothesesUnmet` (or its subclass
    :class:`DominanceUncertified`) naming the failing block when a block has no
    certified dominant word with a unique simple leading eigenvalue.
    ``lmax`` bounds the candidate search (default ``min(horizon, 8)``).
    """
    if lmax is None:
        lmax = min(horizon, 8)
    c1, cert1 = _block_hypotheses(bf.block1, 1, horizon, q, tol, lmax)
    c2, cert2 = _block_hypotheses(bf.block2, 2, horizon, q, tol, lmax)
    pi1, pi2 = c1.pi, c2.pi
    cyclic = cyclically_equal(pi1, pi2)
    lam1 = cert1.leading.value
    if cyclic:
        # evaluate both blocks on the same word so the products line up
        lam2 = leading_eigenvalue(bf.block2.product(pi1), tol).value
    else:
        lam2 = cert2.leading.value
    residual = _eigen_distance(lam1, lam2)
    eigen_match = residual <= tol * max(abs(lam1), abs(lam2))
    jord = 0
    if cyclic and eigen_match:
        lam = 0.5 * (lam1 + (lam2 if abs(lam1 - lam2) <= abs(lam1 - lam2.conjugate()) else lam2.conjugate()))
        jord = jordan_order(assemble(bf).product(pi1), lam, tol)
    nontrivial = jord >= 2
    unstable = cyclic and eigen_match and nontrivial
    ev = Evidence(pi1, pi2, cyclic, lam1, lam2, eigen_match, residual, jord, nontrivial)
    return Classification(Verdict.UNSTABLE if unstable else Verdict.STABLE,
                          "linear" if unstable else "bounded", ev, (cert1, cert2),
                          c1.rho_estimate, c2.rho_estimate, horizon, q, tol)


# -- the 2x2 marginally stable example -------------------------------------------

EXAMPLE1_B = ((1.0, 1.0), (0.0, 1.0))


def example1_blocks(a: float = 2.0, s: float = 0.1, B=EXAMPLE1_B, a1_corner: float = -1.0) -> BlockFamily:
    """Blocks of the pair ``{s B, [[1, a], [0, a1_corner]]}``, letter 0 = ``s B``.

    ``B`` must be upper triangular. The default ``a1_corner = -1`` gives the
    marginally stable pair; ``+1`` gives a Jordan block and linear growth.
    """
    B = as_matrix(B, "B")
    if B.shape != (2, 2) or B[1, 0] != 0:
        raise InvalidInput("B must be a 2x2 upper-triangular matrix")
    sb = s * B
    return BlockFamily([[[sb[0, 0]]], [[1.0]]],
                       [[[sb[1, 1]]], [[a1_corner]]],
                       [[[sb[0, 1]]], [[a]]])


def example1_family(a: float = 2.0, s: float = 0.1, B=EXAMPLE1_B, a1_corner: float = -1.0) -> MatrixFamily:
    fam = assemble(example1_blocks(a, s, B, a1_corner))
    return MatrixFamily(fam.matrices, ["sB", "A1"])
