"""A 3x3 pair whose worst-case products grow like ``N^(1/3)``.

``A0 = diag(1, 1, 0)`` and ``A1 = [[1, a^T], [0, R]]`` with ``R`` the rotation
by ``alpha`` and ``a = (sin alpha, cos alpha - 1)``. Powers of ``A1`` keep the
same shape with ``alpha`` replaced by ``n alpha``, which gives closed forms for
every product ending in ``A0``. When ``alpha / pi`` is a quadratic irrational
the products are ``O(N^(1/3))`` and the bound is attained along
``(A0 A1^n)^(n^2)`` for ``n`` with ``{n alpha / 2pi} <= 1/n``.

Angles ``n alpha`` are reduced modulo ``2 pi`` in extended precision (mpmath)
before any sine or cosine is taken.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence, Union

import mpmath as mp
import numpy as np

from .errors import InsufficientData, InvalidInput
from .growth import MatrixFamily, loglog_slope

AlphaLike = Union[float, str, "mp.mpf"]

ALPHA_TOKENS = ("pi*sqrt2", "pi*phi")
DIRECT_MAX = 10 ** 6
C1 = math.exp(-4 * math.pi ** 2)
_DPS = 60


def resolve_alpha(alpha: AlphaLike) -> "mp.mpf":
    """High-precision value of ``alpha``; accepts ``pi*sqrt2`` and ``pi*phi``."""
    with mp.workdps(_DPS):
        if isinstance(alpha, str):
            tok = alpha.strip().lower().replace(" ", "")
            if tok in ("pi*sqrt2", "pi*sqrt(2)"):
                return +(mp.pi * mp.sqrt(2))
            if tok in ("pi*phi", "pi*golden"):
                return +(mp.pi * (1 + mp.sqrt(5)) / 2)
            try:
                alpha = float(tok)
            except ValueError:
                raise InvalidInput(f"unknown alpha token {alpha!r}; use a number or one of {ALPHA_TOKENS}") from None
        val = mp.mpf(alpha)
        if not mp.isfinite(val):
            raise InvalidInput("alpha must be finite")
        return val


def reduce_angle(alpha: AlphaLike, n: int) -> float:
    """``n alpha`` reduced to ``[0, 2 pi)``, with the reduction done in mpmath."""
    a = resolve_alpha(alpha)
    digits = _DPS + len(str(abs(int(n))))
    with mp.workdps(digits):
        t = mp.fmod(a * int(n), 2 * mp.pi)
        if t < 0:
            t += 2 * mp.pi
        return float(t)


def _a1(t: float) -> np.ndarray:
    s, c = math.sin(t), math.cos(t)
    return np.array([[1.0, s, c - 1.0], [0.0, c, -s], [0.0, s, c]])


@dataclass(frozen=True)
class CubicPair:
    alpha: float
    a0: np.ndarray
    a1: np.ndarray
    p: np.ndarray
    r: np.ndarray
    a_vec: np.ndarray

    @property
    def family(self) -> MatrixFamily:
        """Letter 0 is ``A0``, letter 1 is ``A1``."""
        return MatrixFamily([self.a0, self.a1], ["A0", "A1"])


def build_pair(alpha: AlphaLike) -> CubicPair:
    """The pair for ``alpha``; irrationality of ``alpha / pi`` is not checked."""
    t = reduce_angle(alpha, 1)
    a1 = _a1(t)
    return CubicPair(float(resolve_alpha(alpha)), np.diag([1.0, 1.0, 0.0]), a1,
                     np.diag([1.0, 0.0]), a1[1:, 1:].copy(), a1[0, 1:].copy())


def qn_e1(alpha: AlphaLike, n: int) -> float:
    """First entry of the top-right block of ``A1^n``, which is ``sin(n alpha)``."""
    if n < 0:
        raise InvalidInput("n must be nonnegative")
    return math.sin(reduce_angle(alpha, n)) if n else 0.0


def coupling_closed_form(alpha: AlphaLike, ns: Sequence[int]) -> float:
    """``sum_r sin(n_r alpha) prod_{j>r} cos(n_j alpha)``.

    This is the (1,2) entry of ``A1^n1 A0 A1^n2 A0 ... A1^nk A0``.
    """
    if not len(ns):
        raise InvalidInput("ns must be nonempty")
    total = 0.0
    for n in ns:
        t = reduce_angle(alpha, n)
        total = total * math.cos(t) + math.sin(t)
    return total


# -- upper bound machinery ----------------------------------------------------------


@dataclass(frozen=True)
class SRecursion:
    alpha: float
    ns: tuple[int, ...]
    s_values: tuple[float, ...]  # S_0 = 0, S_1, ..., S_k
    r0: int
    bound_tight: float
    bound_stated: float

    @property
    def final(self) -> float:
        return self.s_values[-1]


def s_recursion(alpha: AlphaLike, ns: Sequence[int]) -> SRecursion:
    """``S_r = |sin n_r alpha| + S_(r-1) |cos n_r alpha|`` with ``S_0 = 0``.

    ``r0`` is the largest ``r`` with ``S_r < 8``. Two bounds on ``S_k`` are
    reported. ``bound_tight`` chains the cubic inequality of
    :func:`lemma3_check` with ``p = S_(r-1)``:
    ``S_k^3 <= S_(r0+1)^3 + sum_(r > r0+1) 20 / |sin n_r alpha|``.
    ``bound_stated`` is ``(9 + sum_r 20 / |sin n_r alpha|)^(1/3)``, which is
    weaker by design but only checked empirically.
    When ``r0 >= k - 1`` both bounds fall back to 9.
    """
    if not len(ns):
        raise InvalidInput("ns must be nonempty")
    ns = tuple(int(n) for n in ns)
    sines, s_vals = [], [0.0]
    for n in ns:
        t = reduce_angle(alpha, n)
        sn, cs = abs(math.sin(t)), abs(math.cos(t))
        sines.append(sn)
        s_vals.append(sn + s_vals[-1] * cs)
    k = len(ns)
    r0 = max(r for r in range(k + 1) if s_vals[r] < 8)
    inv = [20.0 / s if s > 0 else math.inf for s in sines]
    stated = (9.0 + sum(inv)) ** (1.0 / 3.0)
    if r0 >= k - 1:
        tight = 9.0
    else:
        tight = (s_vals[r0 + 1] ** 3 + sum(inv[r0 + 1:])) ** (1.0 / 3.0)
    return SRecursion(float(resolve_alpha(alpha)), ns, tuple(s_vals), r0, tight, stated)


def lemma3_check(p: float, t: float) -> bool:
    """``sin t + p cos t <= (p^3 + 20 / sin t)^(1/3)`` for ``p >= 2``, ``t in (0, pi/2]``."""
    if not (p >= 2 and 0 < t <= math.pi / 2):
        raise InvalidInput("need p >= 2 and t in (0, pi/2]")
    return bool(lemma3_grid(np.array([p]), np.array([t]))[0, 0])


def lemma3_grid(ps, ts) -> np.ndarray:
    """Vectorized :func:`lemma3_check` over the outer grid ``ps x ts``."""
    ps, ts = np.asarray(ps, dtype=float), np.asarray(ts, dtype=float)
    if np.any(ps < 2) or np.any(ts <= 0) or np.any(ts > math.pi / 2):
        raise InvalidInput("need p >= 2 and t in (0, pi/2]")
    P, T = np.meshgrid(ps, ts, indexing="ij")
    lhs = np.sin(T) + P * np.cos(T)
    rhs = np.cbrt(P ** 3 + 20.0 / np.sin(T))
    return lhs <= rhs + 1e-12


# -- Diophantine search ---------------------------------------------------------------


@dataclass(frozen=True)
class ConvergentTable:
    x: float
    partial_quotients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...]
    m_alpha_estimate: float
    terminated: bool  # x is rational at working precision


def continued_fraction(x, depth: int = 30) -> ConvergentTable:
    """Partial quotients ``[a0; a1, ...]`` and convergents ``p/q`` of ``x``.

    ``x`` may be a float, an mpmath number or an alpha token (then ``x`` is
    that token's value divided by ``pi``). ``m_alpha_estimate`` is the
    smallest ``q^2 |x - p/q|`` over convergents with ``q >= 2``; it
    overestimates the true Liouville constant.
    """
    if not 1 <= depth <= 40:
        raise InvalidInput("depth must be in 1..40")
    with mp.workdps(_DPS):
        xv = resolve_alpha(x) / mp.pi if isinstance(x, str) else mp.mpf(x)
        if not mp.isfinite(xv):
            raise InvalidInput("x must be finite")
        quotients, convs = [], []
        p0, q0, p1, q1 = 0, 1, 1, 0
        r = xv
        terminated = False
        tiny = mp.mpf(10) ** (-(_DPS - 10))
        for _ in range(depth):
            a = int(mp.floor(r))
            quotients.append(a)
            p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
            convs.append((p1, q1))
            frac = r - a
            if frac < tiny:
                terminated = True
                break
            r = 1 / frac
        errs = [q * q * abs(xv - mp.mpf(p) / q) for p, q in convs if q >= 2]
        errs = [e for e in errs if e > 0]
        m_est = float(min(errs)) if errs else float("nan")
    return ConvergentTable(float(xv), tuple(quotients), tuple(convs), m_est, terminated)


def m_alpha_estimate(alpha: AlphaLike, depth: int = 30) -> float:
    """``min q^2 |alpha/pi - p/q|`` over the convergents of ``alpha / pi``."""
    with mp.workdps(_DPS):
        return continued_fraction(resolve_alpha(alpha) / mp.pi, depth).m_alpha_estimate


def frac_part(alpha: AlphaLike, n: int) -> float:
    """``{n alpha / 2pi}`` in extended precision."""
    a = resolve_alpha(alpha)
    with mp.workdps(_DPS + len(str(abs(int(n))))):
        v = a * int(n) / (2 * mp.pi)
        return float(v - mp.floor(v))


class GoodNSequence(tuple):
    """Tuple of good ``n``; ``precision_limited`` is set when fewer than requested were found."""

    precision_limited: bool = False


def good_n_sequence(alpha: AlphaLike, count: int, depth: int = 40) -> GoodNSequence:
    """The first ``count`` integers ``n >= 2`` with ``{n alpha / 2pi} <= 1/n``.

    Candidates are the denominators of convergents of ``alpha / 2pi`` that lie
    below it; each is checked directly before inclusion.
    """
    if count < 1:
        raise InvalidInput("count must be positive")
    with mp.workdps(_DPS):
        x = resolve_alpha(alpha) / (2 * mp.pi)
        x = x - mp.floor(x)
        table = continued_fraction(x, depth)
    out = []
    for p, q in table.convergents:
        if q < 2 or (out and q <= out[-1]):
            continue
        if frac_part(alpha, q) <= 1.0 / q:
            out.append(q)
            if len(out) == count:
                break
    seq = GoodNSequence(out)
    seq.precision_limited = len(out) < count
    return seq


# -- growth witnesses ------------------------------------------------------------------


def _one_minus_cos(t: float) -> float:
    return 2.0 * math.sin(0.5 * t) ** 2


def _pow_cos(t: float, m: int) -> tuple[float, float]:
    """``(c^m, 1 - c^m)`` for ``c = cos t``, accurate when ``c`` is near 1."""
    c = math.cos(t)
    if c <= 0:
        v = c ** m
        return v, 1.0 - v
    e = m * math.log1p(-_one_minus_cos(t))
    return math.exp(e), -math.expm1(e)


def block_closed_form(t: float, m: int) -> np.ndarray:
    """``(A0 A1(t))^m`` in closed form; ``A1(t)`` is ``A1`` with angle ``t``."""
    if m < 1:
        raise InvalidInput("m must be positive")
    s, c = math.sin(t), math.cos(t)
    cm1, one_minus = _pow_cos(t, m - 1)
    omc = _one_minus_cos(t)
    g = one_minus / omc if omc > 0 else float(m - 1)
    out = np.zeros((3, 3))
    out[0, 0] = 1.0
    out[0, 1] = s + s * c * g
    out[0, 2] = (c - 1.0) - s * s * g
    out[1, 1] = cm1 * c
    out[1, 2] = -cm1 * s
    return out


def tail_block_closed_form(t: float, m: int) -> np.ndarray:
    """``(A1(t) A0)^m = A1(t) (A0 A1(t))^(m-1) A0``, the rotation of the block ending in ``A0``."""
    if m < 1:
        raise InvalidInput("m must be positive")
    inner = block_closed_form(t, m - 1) if m > 1 else np.eye(3)
    return _a1(t) @ inner @ np.diag([1.0, 1.0, 0.0])


def cubic_lower_formula(t: float, m: int) -> float:
    """``sin t (1 - cos(t)^m) / (1 - cos t)``."""
    omc = _one_minus_cos(t)
    if omc == 0:
        return 0.0
    return math.sin(t) * _pow_cos(t, m)[1] / omc


@dataclass(frozen=True)
class Witness:
    n: int
    N: int
    norm: float
    lower_formula: float
    path: str

    @property
    def ratio(self) -> float:
        return self.norm / self.N ** (1.0 / 3.0)


def growth_witness(alpha: AlphaLike, n: int, method: str = "auto") -> Witness:
    """Norm of ``(A0 A1^n)^(n^2)``, of length ``N = n^3 + n^2``.

    ``method="direct"`` multiplies float matrices (powers by repeated
    squaring); ``"closed"`` evaluates the closed-form product with the angle
    reduced in extended precision. ``"auto"`` is direct for ``N <= 10^6``.
    """
    if n < 1:
        raise InvalidInput("n must be positive")
    m = n * n
    N = n ** 3 + m
    if method == "auto":
        method = "direct" if N <= DIRECT_MAX else "closed"
    t = reduce_angle(alpha, n)
    lower = cubic_lower_formula(t, m)
    if method == "direct":
        pair = build_pair(alpha)
        x = pair.a0 @ np.linalg.matrix_power(pair.a1, n)
        prod = np.linalg.matrix_power(x, m)
    elif method == "closed":
        prod = block_closed_form(t, m)
    else:
        raise InvalidInput(f"unknown method {method!r}")
    return Witness(n, N, float(np.linalg.norm(prod, 2)), lower, method)


def _witness_job(args):
    return growth_witness(*args)


def witness_table(alpha: AlphaLike, ns: Sequence[int], method: str = "auto",
                  workers: int = 1) -> list[Witness]:
    jobs = [(str(alpha) if isinstance(alpha, str) else float(alpha), int(n), method) for n in ns]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_witness_job, jobs))
    return [_witness_job(j) for j in jobs]


def fit_cubic_exponent(alpha: AlphaLike, ns: Sequence[int], method: str = "auto") -> tuple[float, float]:
    """Slope and standard error of ``log norm`` against ``log N`` over witnesses."""
    ws = witness_table(alpha, sorted(set(int(n) for n in ns)), method)
    if len(ws) < 3:
        raise InsufficientData(f"need at least 3 distinct witnesses, got {len(ws)}")
    return loglog_slope([w.N for w in ws], [w.norm for w in ws])


def witnesses_csv(ws: Sequence[Witness]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["n", "N", "norm", "lower_formula", "ratio"])
    for w in ws:
        wr.writerow([w.n, w.N, repr(w.norm), repr(w.lower_formula), repr(w.ratio)])
    return buf.getvalue()


# -- infinite product ------------------------------------------------------------------


@dataclass(frozen=True)
class PrefixRow:
    j: int
    n: int
    Mk: int
    log_norm: float
    attenuation: float  # cos(t_j)^(n_j^2)

    @property
    def ratio(self) -> float:
        return self.log_norm / math.log(self.Mk)


@dataclass(frozen=True)
class ProductPrefixes:
    rows: tuple[PrefixRow, ...]
    c0: float
    c1: float
    truncated: bool

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["j", "Mk", "log_norm", "ratio"])
        for r in self.rows:
            wr.writerow([r.j, r.Mk, repr(r.log_norm), repr(r.ratio)])
        return buf.getvalue()


def infinite_product_prefixes(alpha: AlphaLike, j_max: int, pool: int = 8) -> ProductPrefixes:
    """Prefixes ``P_1 P_2 ... P_k`` of a product growing like ``M^(1/3)``.

    Each block is ``P_j = (A1^(n_j) A0)^(n_j^2)`` with ``n_j`` good, so every
    prefix ends in ``A0`` and its (1,2) entry is a sum of the block couplings. The next
    ``n_j`` is the smallest good ``n`` above ``n_(j-1)`` with
    ``C0 sum_j C1^(k-j) N_j^(1/3) >= (sum_j N_j)^(1/3 - 2^-k)``, where
    ``C1 = exp(-4 pi^2)`` and ``C0`` is the smallest ``lower / N^(1/3)`` over
    the first ``pool`` good ``n``. ``C1`` multiplies earlier blocks because each later
    block scales the earlier couplings by its attenuation. The log-norms are
    exact norms of the assembled prefix.
    """
    if not 1 <= j_max <= 5:
        raise InvalidInput("j_max must be in 1..5")
    cands = good_n_sequence(alpha, max(pool, j_max))
    if not cands:
        return ProductPrefixes((), float("nan"), C1, True)
    witnesses = {}
    for n in cands:
        t = reduce_angle(alpha, n)
        witnesses[n] = (t, abs(cubic_lower_formula(t, n * n)))
    c0 = min(lw / (n ** 3 + n * n) ** (1.0 / 3.0) for n, (_, lw) in witnesses.items())
    rows = []
    chosen: list[int] = []
    prod = np.eye(3)
    truncated = False
    for k in range(1, j_max + 1):
        pick = None
        for n in cands:
            if chosen and n <= chosen[-1]:
                continue
            Ns = [m ** 3 + m * m for m in chosen + [n]]
            lhs = c0 * sum(C1 ** (k - j) * Nj ** (1.0 / 3.0) for j, Nj in enumerate(Ns, 1))
            if lhs >= sum(Ns) ** (1.0 / 3.0 - 2.0 ** -k):
                pick = n
                break
        if pick is None:
            truncated = True
            break
        chosen.append(pick)
        t, _ = witnesses[pick]
        prod = prod @ tail_block_closed_form(t, pick * pick)
        Mk = sum(m ** 3 + m * m for m in chosen)
        rows.append(PrefixRow(k, pick, Mk, math.log(np.linalg.norm(prod, 2)),
                              _pow_cos(t, pick * pick)[0]))
    return ProductPrefixes(tuple(rows), c0, C1, truncated)
