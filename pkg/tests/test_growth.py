import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lssmargin.errors import BudgetExceeded, InsufficientData, InvalidInput
from lssmargin.growth import (GrowthSeries, MatrixFamily, exact_mk, growth_exponent, jsr_bounds,
                              loglog_slope, mk_series)
from lssmargin.sublinear import build_pair

from conftest import GOLDEN, SQRT2_ALPHA


def brute_mk(fam, k):
    best, word = -1.0, None
    for w in itertools.product(range(len(fam)), repeat=k):
        v = np.linalg.norm(fam.product(w), 2)
        if v > best:
            best, word = v, w
    return best, word


def test_family_validation():
    with pytest.raises(InvalidInput):
        MatrixFamily([])
    with pytest.raises(InvalidInput):
        MatrixFamily([np.eye(2), np.eye(3)])
    with pytest.raises(InvalidInput):
        MatrixFamily([np.eye(2)], labels=["a", "b"])
    fam = MatrixFamily([np.eye(2)])
    assert fam.labels == ("A0",)
    assert np.array_equal(fam.product(""), np.eye(2))
    with pytest.raises(InvalidInput):
        fam.product("1")


def test_exact_mk_examples():
    assert exact_mk(MatrixFamily([np.eye(2)]), 5)[0] == pytest.approx(1.0)
    assert exact_mk(MatrixFamily([[[1, 1], [0, 1]]]), 1)[0] == pytest.approx(GOLDEN, abs=1e-10)
    fam = build_pair(SQRT2_ALPHA).family
    mk, w = exact_mk(fam, 6)
    ref, _ = brute_mk(fam, 6)
    assert mk == pytest.approx(ref, rel=1e-12)
    assert np.linalg.norm(fam.product(w), 2) == pytest.approx(mk, rel=1e-12)


def _random_family(rng, m, d):
    return MatrixFamily([rng.standard_normal((d, d)) for _ in range(m)])


def test_pruning_matches_unpruned(rng):
    for m, d, k in [(2, 2, 10), (3, 2, 7), (2, 3, 9), (4, 3, 5), (2, 4, 12)]:
        for _ in range(3):
            fam = _random_family(rng, m, d)
            assert m ** k <= 10 ** 5
            a, wa = exact_mk(fam, k, prune=True)
            b, wb = exact_mk(fam, k, prune=False)
            assert a == b
            assert wa == wb
            ref, _ = brute_mk(fam, k) if m ** k <= 5000 else (b, None)
            assert a == pytest.approx(ref, rel=1e-12)


def test_custom_norm_pruning(rng):
    from lssmargin.polynorm import build_parallelotope, induced_norm
    p = build_parallelotope(2.0)
    nrm = lambda a: induced_norm(p, a)  # noqa: E731
    fam = _random_family(rng, 2, 2)
    assert exact_mk(fam, 8, norm=nrm)[0] == exact_mk(fam, 8, norm=nrm, prune=False)[0]


def test_workers_match_serial(rng):
    fam = _random_family(rng, 3, 2)
    assert exact_mk(fam, 7, workers=2) == exact_mk(fam, 7)


def test_lexicographic_witness():
    # every word has the same norm, so the witness is the least word
    fam = MatrixFamily([np.eye(2), np.eye(2)])
    assert exact_mk(fam, 4)[1] == (0, 0, 0, 0)


def test_submultiplicative(rng):
    fam = _random_family(rng, 2, 2)
    mk = {k: exact_mk(fam, k)[0] for k in range(1, 9)}
    for j in range(1, 5):
        for k in range(1, 5):
            assert mk[j + k] <= mk[j] * mk[k] + 1e-9


def test_budget_exceeded():
    fam = MatrixFamily([np.eye(2), np.eye(2)])
    with pytest.raises(BudgetExceeded) as exc:
        exact_mk(fam, 11, budget=1000)
    assert exc.value.achieved == 9
    with pytest.raises(BudgetExceeded) as exc:
        mk_series(fam, 12, budget=1000)
    assert [e[0] for e in exc.value.partial.entries] == list(range(1, 10))


def test_jsr_bounds_examples(golden_pair, ex1_family):
    b = jsr_bounds(MatrixFamily([np.eye(2)]), 4)
    assert b.lower == pytest.approx(1.0) and b.upper == pytest.approx(1.0)
    b = jsr_bounds(golden_pair, 10)
    assert b.lower == pytest.approx(GOLDEN, abs=1e-12)
    assert b.lower - 0.02 <= GOLDEN <= b.upper + 0.02
    assert b.upper <= GOLDEN + 0.02
    b = jsr_bounds(ex1_family, 10)
    assert b.lower == pytest.approx(1.0, abs=1e-12)
    assert b.witness_word_lower == (1,)
    assert b.upper >= 1.0


def test_jsr_bounds_monotone(rng):
    fam = _random_family(rng, 2, 2)
    prev = None
    for k in range(1, 9):
        b = jsr_bounds(fam, k)
        assert b.lower <= b.upper + 1e-12
        if prev:
            assert b.lower >= prev.lower
            assert b.upper <= prev.upper
        prev = b


def test_single_matrix_bounds_converge(rng):
    done = 0
    while done < 5:
        m = rng.standard_normal((2, 2))
        ev = np.linalg.eigvals(m)
        if abs(abs(ev[0]) - abs(ev[1])) < 0.3 * max(abs(ev)):
            continue
        b = jsr_bounds(MatrixFamily([m]), 20)
        r = max(abs(ev))
        assert b.lower == pytest.approx(r, rel=1e-9)
        assert b.upper - b.lower <= 0.05 * r
        done += 1


def test_jsr_partial_on_budget():
    fam = MatrixFamily([np.eye(2), 0.5 * np.eye(2)])
    with pytest.raises(BudgetExceeded) as exc:
        jsr_bounds(fam, 20, budget=100)
    assert exc.value.achieved == 5
    assert exc.value.partial.lower == pytest.approx(1.0)


def test_growth_exponent_examples(ex1_family):
    s = mk_series(MatrixFamily([np.eye(2)]), 10)
    slope, _ = growth_exponent(s)
    assert abs(slope) <= 1e-12
    j = MatrixFamily([[[1, 1], [0, 1]]])
    s = GrowthSeries(tuple((k, exact_mk(j, k)[0], (0,) * k) for k in range(8, 65)))
    slope, err = growth_exponent(s, 8)
    assert slope == pytest.approx(1.0, abs=0.05)
    slope, _ = growth_exponent(mk_series(ex1_family, 12), 4)
    assert abs(slope) <= 0.1
    with pytest.raises(InsufficientData):
        growth_exponent(mk_series(ex1_family, 4), 3)


@given(st.floats(0.1, 3), st.floats(0.5, 10))
@settings(max_examples=50)
def test_loglog_slope_recovers_power(p, c):
    ks = np.arange(1, 20)
    slope, err = loglog_slope(ks, c * ks ** p)
    assert slope == pytest.approx(p, abs=1e-9)
    assert err < 1e-6


def test_csv_format(ex1_family):
    text = mk_series(ex1_family, 3).to_csv().splitlines()
    assert text[0] == "k,mk,witness"
    assert text[1].split(",")[2] == "1"
    assert float(text[1].split(",")[1]) == pytest.approx(1 + math.sqrt(2))
