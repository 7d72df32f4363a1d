"""Worst-case product-norm growth.

``M_k`` here is the maximum norm of a length-``k`` product itself, with no
``1/k`` root; the joint spectral radius is ``lim M_k^(1/k)`` and marginal
instability shows up as ``M_k`` growing polynomially while the radius is 1.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import BudgetExceeded, InsufficientData, InvalidInput
from .matlib import _norm2_small, as_matrix, spectral_radius
from .words import Word, WordLike, as_word, word_str

DEFAULT_BUDGET = 20_000_000

Norm = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class MatrixFamily:
    """Finite indexed family of same-size square matrices; letter ``i`` is ``matrices[i]``."""

    matrices: tuple[np.ndarray, ...]
    labels: tuple[str, ...] = ()

    def __init__(self, matrices, labels: Optional[Sequence[str]] = None):
        mats = tuple(as_matrix(m, name=f"matrix {i}") for i, m in enumerate(matrices))
        if not mats:
            raise InvalidInput("a matrix family must be nonempty")
        dims = {m.shape[0] for m in mats}
        if len(dims) != 1:
            raise InvalidInput(f"matrices have mixed dimensions {sorted(dims)}")
        for m in mats:
            m.setflags(write=False)
        if labels is None:
            labels = [f"A{i}" for i in range(len(mats))]
        labels = tuple(str(s) for s in labels)
        if len(labels) != len(mats):
            raise InvalidInput("one label per matrix is required")
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]

    def __len__(self) -> int:
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.matrices[i]

    def product(self, w: WordLike) -> np.ndarray:
        """``A[w0] @ A[w1] @ ...``; the empty word gives the identity."""
        out = np.eye(self.dim)
        for c in as_word(w):
            if c >= len(self.matrices):
                raise InvalidInput(f"letter {c} outside alphabet of size {len(self)}")
            out = out @ self.matrices[c]
        return out

    def scaled(self, factor: float) -> "MatrixFamily":
        return MatrixFamily([m * factor for m in self.matrices], self.labels)


@dataclass(frozen=True)
class GrowthSeries:
    entries: tuple[tuple[int, float, Word], ...]

    @property
    def ks(self) -> np.ndarray:
        return np.array([e[0] for e in self.entries], dtype=float)

    @property
    def mks(self) -> np.ndarray:
        return np.array([e[1] for e in self.entries], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["k", "mk", "witness"])
        for k, mk, w in self.entries:
            wr.writerow([k, repr(mk), word_str(w)])
        return buf.getvalue()


@dataclass(frozen=True)
class JsrBounds:
    lower: float
    upper: float
    witness_word_lower: Word
    k_used: int
    witness_word_upper: Word = field(default=())


def _frobenius(a: np.ndarray) -> float:
    return math.sqrt(float(np.einsum("ij,ij->", a, a)))


def _enumerate_max(mats, k, prefix, prefix_prod, norm, bound_norm, cap, incumbent, prune):
    """Depth-first maximisation over all completions of ``prefix`` to length ``k``.

    Returns ``(best_value, best_word, leaves_visited)``. Letters are tried in
    increasing order and only a strictly larger value replaces the incumbent,
    so the reported word is the lexicographically least maximiser found.
    """
    best = [incumbent, None]
    visited = [0]
    m = len(mats)

    def rec(depth, prod, word):
        remaining = k - depth
        if remaining == 0:
            visited[0] += 1
            val = norm(prod)
            if val > best[0]:
                best[0], best[1] = val, tuple(word)
            return
        if prune and depth > 0 and bound_norm(prod) * cap[remaining] <= best[0]:
            return
        for c in range(m):
            word.append(c)
            rec(depth + 1, prod @ mats[c], word)
            word.pop()

    rec(len(prefix), prefix_prod, list(prefix))
    return best[0], best[1], visited[0]


def _worker(args):
    mats, k, c, norm_kind, prune = args
    norm, bound = _norms(norm_kind, None)
    cap = _caps(mats, k, norm)
    return _enumerate_max(mats, k, (c,), mats[c].copy(), norm, bound, cap, -1.0, prune)


def _norms(norm_kind, norm):
    if norm is not None:
        return norm, norm
    # Frobenius dominates the spectral norm, so it is a safe pruning bound
    return _norm2_small, _frobenius


def _caps(mats, k, norm):
    c = max(norm(m) for m in mats)
    return [c ** r for r in range(k + 1)]


def exact_mk(fam: MatrixFamily, k: int, *, prune: bool = True, budget: int = DEFAULT_BUDGET,
             norm: Optional[Norm] = None, workers: int = 1) -> tuple[float, Word]:
    """Exact ``M_k`` and a maximising word.

    With ``prune`` the search drops a prefix ``P`` as soon as
    ``bound(P) * c^(remaining) <= incumbent``, where ``c`` is the largest
    single-letter norm and ``bound`` dominates the norm in use, which is safe
    for any submultiplicative norm. ``norm`` replaces the Euclidean operator
    norm (e.g. a polytope-induced norm); it must be submultiplicative.
    ``workers > 1`` splits the search over the first letter across processes
    (Euclidean norm only); results are identical to the serial search.
    """
    if k < 1:
        raise InvalidInput("k must be positive")
    m = len(fam)
    if m ** k > budget:
        achieved = int(math.floor(math.log(budget) / math.log(m))) if m > 1 else k
        raise BudgetExceeded(f"{m}^{k} products exceed the budget of {budget}", achieved=achieved)
    mats = fam.matrices
    if workers > 1 and m > 1 and norm is None:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_worker, [(mats, k, c, "2", prune) for c in range(m)]))
        best, word = -1.0, None
        for val, w, _ in results:  # first-letter order keeps lexicographic tie-breaking
            if w is not None and val > best:
                best, word = val, w
        return float(best), word
    nrm, bound = _norms("2", norm)
    cap = _caps(mats, k, nrm)
    best, word, _ = _enumerate_max(mats, k, (), np.eye(fam.dim), nrm, bound, cap, -1.0, prune)
    return float(best), word


def mk_series(fam: MatrixFamily, kmax: int, *, kmin: int = 1, budget: int = DEFAULT_BUDGET,
              norm: Optional[Norm] = None, prune: bool = True) -> GrowthSeries:
    """``M_k`` for ``k = kmin..kmax``; on budget overflow the partial series rides on the error."""
    entries = []
    for k in range(kmin, kmax + 1):
        try:
            mk, w = exact_mk(fam, k, budget=budget, norm=norm, prune=prune)
        except BudgetExceeded as exc:
            raise BudgetExceeded(str(exc), achieved=k - 1, partial=GrowthSeries(tuple(entries))) from None
        entries.append((k, mk, w))
    return GrowthSeries(tuple(entries))


def _all_products(fam: MatrixFamily, kmax: int):
    """Yield ``(word, product)`` for every word of length ``1..kmax`` (depth first)."""
    mats = fam.matrices

    def rec(word, prod):
        for c, a in enumerate(mats):
            w2 = word + (c,)
            p2 = prod @ a
            yield w2, p2
            if len(w2) < kmax:
                yield from rec(w2, p2)

    yield from rec((), np.eye(fam.dim))


def jsr_bounds(fam: MatrixFamily, kmax: int, *, budget: int = DEFAULT_BUDGET) -> JsrBounds:
    """Brute-force bracket ``max rho(P_w)^(1/|w|) <= JSR <= min_k M_k^(1/k)``.

    If ``kmax`` exceeds the budget, the bounds are computed up to the largest
    admissible length and returned on the raised error's ``partial``.
    """
    if kmax < 1:
        raise InvalidInput("kmax must be positive")
    m = len(fam)
    total = sum(m ** j for j in range(1, kmax + 1))
    k_ok = kmax
    while k_ok > 0 and sum(m ** j for j in range(1, k_ok + 1)) > budget:
        k_ok -= 1
    if k_ok == 0:
        raise BudgetExceeded("even length-1 enumeration exceeds the budget", achieved=0)
    lower, lw = 0.0, ()
    upper_by_k: dict[int, tuple[float, Word]] = {}
    for w, p in _all_products(fam, k_ok):
        r = spectral_radius(p) ** (1.0 / len(w))
        if r > lower * (1 + 1e-12) or not lw:
            lower, lw = r, w
        nv = _norm2_small(p)
        cur = upper_by_k.get(len(w))
        if cur is None or nv > cur[0]:
            upper_by_k[len(w)] = (nv, w)
    upper, uw = min(((v ** (1.0 / k), w) for k, (v, w) in upper_by_k.items()), key=lambda t: t[0])
    res = JsrBounds(lower, max(upper, lower), lw, k_ok, uw)
    if k_ok < kmax:
        raise BudgetExceeded(f"{total} products exceed the budget of {budget}", achieved=k_ok, partial=res)
    return res


def loglog_slope(ks, values) -> tuple[float, float]:
    """Least-squares slope of ``log(values)`` on ``log(ks)`` and its standard error."""
    x = np.log(np.asarray(ks, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if len(x) < 3 or np.ptp(x) == 0:
        raise InsufficientData("need at least 3 distinct points for a slope and its error")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean())) / sxx
    resid = y - y.mean() - slope * xc
    stderr = math.sqrt(float(resid @ resid) / (len(x) - 2) / sxx)
    return slope, stderr


def growth_exponent(series: GrowthSeries, k_min: int = 1) -> tuple[float, float]:
    """Polynomial growth exponent of ``M_k`` fitted over ``k >= k_min``."""
    pts = [(k, mk) for k, mk, _ in series.entries if k >= k_min]
    if len(pts) < 3:
        raise InsufficientData(f"only {len(pts)} points with k >= {k_min}")
    ks, mks = zip(*pts)
    return loglog_slope(ks, mks)
