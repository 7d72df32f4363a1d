"""Continuous-time switching systems with piecewise-constant switching laws.

Trajectories are propagated exactly segment by segment with matrix
exponentials, so the only error is that of :func:`matrix_exp`. The module is
built around the 4x4 pair ``{A1, B - sI}``, where ``A1`` has bounded flow and
``f(x) = sup_t ||exp(t A1) x||`` serves as a Lyapunov function.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInput
from .growth import MatrixFamily
from .matlib import as_matrix, matrix_exp

F_T_MAX = 4 * math.pi
F_DT = 1e-3


@dataclass(frozen=True)
class SwitchingLaw:
    """Piecewise-constant law: run ``letter`` for ``duration``, segment after segment."""

    segments: tuple[tuple[float, int], ...]

    def __init__(self, segments: Sequence[tuple[float, int]] = ()):
        segs = []
        for i, (d, c) in enumerate(segments):
            d, c = float(d), int(c)
            if not (math.isfinite(d) and d > 0):
                raise InvalidInput(f"segment {i}: duration must be positive and finite")
            if c < 0:
                raise InvalidInput(f"segment {i}: letter must be nonnegative")
            segs.append((d, c))
        object.__setattr__(self, "segments", tuple(segs))

    @property
    def total(self) -> float:
        return float(sum(d for d, _ in self.segments))

    @property
    def boundaries(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum([d for d, _ in self.segments])])

    def __add__(self, other: "SwitchingLaw") -> "SwitchingLaw":
        return SwitchingLaw(self.segments + other.segments)

    def __len__(self) -> int:
        return len(self.segments)

    def truncate(self, t_max: float) -> "SwitchingLaw":
        out, t = [], 0.0
        for d, c in self.segments:
            if t >= t_max:
                break
            out.append((min(d, t_max - t), c))
            t += d
        return SwitchingLaw(out)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    law: SwitchingLaw
    boundary_index: tuple[int, ...]  # sample index of each segment boundary, starting with 0

    @property
    def samples(self) -> list[tuple[float, np.ndarray]]:
        return list(zip(self.times.tolist(), self.states))

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)


@dataclass(frozen=True)
class CtReport:
    sup_norm: float
    sigma_estimate: float
    f_monotone_violations: int
    f_boundary_values: tuple[float, ...]
    decay_rate: Optional[float]  # slowest observed rate of f decrease on checked segments

    def to_dict(self) -> dict:
        return {
            "sup_norm": self.sup_norm,
            "sigma_estimate": self.sigma_estimate,
            "f_monotone_violations": self.f_monotone_violations,
            "observed_f_decay_rate": self.decay_rate,
        }


def propagate(fam: MatrixFamily, law: SwitchingLaw, x0, dt: float) -> Trajectory:
    """Sample ``x' = A(t) x`` every ``dt`` inside segments and at every boundary.

    Boundary states use ``exp(d A) x`` for the whole segment; interior samples
    step with ``exp(dt A)`` from the segment start.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape[0] != fam.dim:
        raise InvalidInput(f"x0 has length {x0.shape[0]}, family dimension is {fam.dim}")
    if not dt > 0:
        raise InvalidInput("dt must be positive")
    if law.segments:
        if min(d for d, _ in law.segments) < dt:
            raise InvalidInput("dt exceeds the shortest segment duration")
        if max(c for _, c in law.segments) >= len(fam):
            raise InvalidInput("law uses letters outside the family")
    steps = {}
    times, states, bidx = [0.0], [x0.copy()], [0]
    t, x = 0.0, x0.copy()
    for d, c in law.segments:
        a = fam[c]
        if c not in steps:
            steps[c] = matrix_exp(a, dt)
        e = steps[c]
        m = int(math.floor(d / dt - 1e-9))
        y = x
        for i in range(1, m + 1):
            y = e @ y
            times.append(t + i * dt)
            states.append(y)
        x = matrix_exp(a, d) @ x
        t += d
        if times[-1] >= t - 1e-12:  # drop an interior sample landing on the boundary
            times.pop()
            states.pop()
        times.append(t)
        states.append(x)
        bidx.append(len(times) - 1)
    return Trajectory(np.array(times), np.array(states), law, tuple(bidx))


@lru_cache(maxsize=16)
def _flow_grid(a1_bytes: bytes, d: int, t_max: float, dt: float) -> np.ndarray:
    a1 = np.frombuffer(a1_bytes, dtype=float).reshape(d, d)
    count = int(math.floor(t_max / dt + 1e-9)) + 1
    step = matrix_exp(a1, dt)
    grid = np.empty((count, d, d))
    grid[0] = np.eye(d)
    for i in range(1, count):
        grid[i] = step @ grid[i - 1]
    grid.setflags(write=False)
    return grid


def flow_grid(a1, t_max: float = F_T_MAX, dt: float = F_DT) -> np.ndarray:
    """``exp(t a1)`` for ``t = 0, dt, ..., t_max`` (cached)."""
    a1 = as_matrix(a1, "a1")
    if not (t_max > 0 and dt > 0):
        raise InvalidInput("t_max and dt must be positive")
    return _flow_grid(np.ascontiguousarray(a1).tobytes(), a1.shape[0], float(t_max), float(dt))


def lyapunov_f(a1, x, t_max: float = F_T_MAX, dt: float = F_DT) -> float:
    """``max ||exp(t a1) x||`` over the grid ``0, dt, ..., t_max``.

    This truncates ``sup over t >= 0``; it is exact up to grid error when the
    flow of ``a1`` is periodic with period at most ``t_max``.
    """
    return float(lyapunov_f_many(a1, np.asarray(x, dtype=float)[None, :], t_max, dt)[0])


def lyapunov_f_many(a1, xs, t_max: float = F_T_MAX, dt: float = F_DT, chunk: int = 256) -> np.ndarray:
    grid = flow_grid(a1, t_max, dt)
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != grid.shape[1]:
        raise InvalidInput("points must be rows of the matrix dimension")
    out = np.empty(len(xs))
    for s in range(0, len(xs), chunk):
        img = np.einsum("tij,nj->nti", grid, xs[s:s + chunk])
        out[s:s + chunk] = np.sqrt(np.max(np.einsum("nti,nti->nt", img, img), axis=1))
    return out


def sigma_estimate(traj: Trajectory, t_from: float) -> float:
    """``max log(||x(t)|| / ||x(0)||) / t`` over samples with ``t >= t_from``."""
    x0n = float(np.linalg.norm(traj.states[0]))
    mask = (traj.times >= t_from) & (traj.times > 0)
    if not np.any(mask) or x0n == 0:
        return 0.0
    # underflow to zero would give -inf; the smallest positive float keeps it finite
    nr = np.maximum(traj.norms()[mask] / x0n, np.finfo(float).tiny)
    vals = np.log(nr) / traj.times[mask]
    return float(np.max(vals))


def check_f_decreasing(fam: MatrixFamily, law: SwitchingLaw, x0, t_max: Optional[float] = None,
                       dt: float = 0.01, *, f_letter: int = 0, f_t_max: float = F_T_MAX,
                       f_dt: float = F_DT) -> CtReport:
    """Monitor ``f`` (built from letter ``f_letter``) along a trajectory.

    ``f`` is evaluated at every segment boundary; on each segment whose letter
    is not ``f_letter`` an increase beyond ``1e-6 f(x0)`` counts as a
    violation. The law is cut at ``t_max`` (default: its full length) and
    ``sigma`` is estimated over ``t >= t_max / 2``.
    """
    if t_max is None:
        t_max = law.total
    law = law.truncate(t_max)
    traj = propagate(fam, law, x0, dt)
    a1 = fam[f_letter]
    fb = lyapunov_f_many(a1, traj.states[list(traj.boundary_index)], f_t_max, f_dt)
    tol = 1e-6 * fb[0]
    violations = 0
    rate = math.inf
    for j, (d, c) in enumerate(law.segments):
        if c == f_letter:
            continue
        if fb[j + 1] > fb[j] + tol:
            violations += 1
        if fb[j] > 0 and fb[j + 1] > 0:
            rate = min(rate, -math.log(fb[j + 1] / fb[j]) / d)
    return CtReport(float(np.max(traj.norms())), sigma_estimate(traj, t_max / 2), violations,
                    tuple(float(v) for v in fb), rate if math.isfinite(rate) else None)


def _trial(args):
    fam, law, x0, dt = args
    return check_f_decreasing(fam, law, x0, None, dt)


def run_trials(fam: MatrixFamily, laws: Sequence[SwitchingLaw], x0, dt: float = 0.01,
               workers: int = 1) -> list[CtReport]:
    """:func:`check_f_decreasing` for each law; ``workers > 1`` uses processes."""
    jobs = [(fam, law, np.asarray(x0, dtype=float), dt) for law in laws]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_trial, jobs))
    return [_trial(j) for j in jobs]


def random_law(rng: np.random.Generator, segments: int = 20, letters: int = 2,
               dmin: float = 0.5, dmax: float = 5.0) -> SwitchingLaw:
    """Alternating-letter law with uniform durations in ``[dmin, dmax)`` and random first letter."""
    first = int(rng.integers(letters))
    durs = rng.uniform(dmin, dmax, segments)
    return SwitchingLaw([(float(d), (first + i) % letters) for i, d in enumerate(durs)])


def trajectory_csv(traj: Trajectory, f_values: Optional[Sequence[float]] = None) -> str:
    """Rows ``t,x1,...,xd,f`` (``f`` left empty when not supplied)."""
    d = traj.states.shape[1]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["t"] + [f"x{i + 1}" for i in range(d)] + ["f"])
    for i, (t, x) in enumerate(zip(traj.times, traj.states)):
        f = "" if f_values is None else repr(float(f_values[i]))
        wr.writerow([repr(float(t))] + [repr(float(v)) for v in x] + [f])
    return buf.getvalue()


# -- the 4x4 marginally stable pair ------------------------------------------------

EXAMPLE2_C = ((1.0, 1.0), (1.0, 1.0))
EXAMPLE2_B = ((1.0, 1.0, 1.0, 1.0),
              (1.0, 1.0, 1.0, 1.0),
              (0.0, 0.0, 1.0, 1.0),
              (0.0, 0.0, 1.0, 1.0))


def example2_a1(C=EXAMPLE2_C) -> np.ndarray:
    C = as_matrix(C, "C")
    if C.shape != (2, 2):
        raise InvalidInput("C must be 2x2")
    a1 = np.zeros((4, 4))
    a1[:2, 2:] = C
    a1[2, 3], a1[3, 2] = -1.0, 1.0
    return a1


def example2_family(C=EXAMPLE2_C, B=EXAMPLE2_B, s: float = 10.0) -> MatrixFamily:
    """``{A1, B - s I}``; letter 0 is ``A1``."""
    B = as_matrix(B, "B")
    if B.shape != (4, 4) or np.any(B[2:, :2] != 0):
        raise InvalidInput("B must be 4x4 block upper-triangular")
    return MatrixFamily([example2_a1(C), B - s * np.eye(4)], ["A1", "A2"])
