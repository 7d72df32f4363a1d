import math

import numpy as np
import pytest

from lssmargin.classifier import (BlockFamily, Verdict, assemble, classify, coupling_sum,
                                  example1_blocks, example1_family)
from lssmargin.errors import DominanceUncertified, HypothesesUnmet, InvalidInput
from lssmargin.growth import MatrixFamily, exact_mk
from lssmargin.matlib import jordan_order
from lssmargin.sublinear import build_pair
from lssmargin.words import rotations

from conftest import GOLDEN, SQRT2_ALPHA


def golden_blocks(coupling_scale=1.0):
    g = [np.array([[1.0, 1.0], [0.0, 1.0]]) / GOLDEN, np.array([[1.0, 0.0], [1.0, 1.0]]) / GOLDEN]
    c = [coupling_scale * np.array([[1.0, 0.0], [0.0, 1.0]]), coupling_scale * np.array([[0.5, 1.0], [0.0, 0.0]])]
    return BlockFamily(g, g, c)


def pr_blocks(alpha=SQRT2_ALPHA):
    pair = build_pair(alpha)
    return BlockFamily([[[1.0]], [[1.0]]], [pair.p, pair.r], [np.zeros((1, 2)), pair.a_vec.reshape(1, 2)])


def test_assemble_example1_order():
    bf = BlockFamily([[[1.0]], [[0.1]]], [[[-1.0]], [[0.1]]], [[[2.0]], [[0.1]]])
    fam = assemble(bf)
    assert np.array_equal(fam[0], [[1, 2], [0, -1]])
    assert np.array_equal(fam[1], [[0.1, 0.1], [0, 0.1]])


def test_assemble_zero_couplings(rng):
    b1 = [rng.standard_normal((2, 2)) for _ in range(2)]
    b2 = [rng.standard_normal((1, 1)) for _ in range(2)]
    fam = assemble(BlockFamily(b1, b2, [np.zeros((2, 1))] * 2))
    for i in range(2):
        assert np.array_equal(fam[i][:2, 2:], np.zeros((2, 1)))
        assert np.array_equal(fam[i][2:, :2], np.zeros((1, 2)))


def test_assemble_reproduces_pr_pair():
    pair = build_pair(SQRT2_ALPHA)
    fam = assemble(pr_blocks())
    assert np.array_equal(fam[0], pair.a0)
    assert np.array_equal(fam[1], pair.a1)


def test_dimension_mismatch():
    with pytest.raises(InvalidInput):
        BlockFamily([[[1.0]]], [[[1.0]]], [np.zeros((2, 1))])
    with pytest.raises(InvalidInput):
        BlockFamily([[[1.0]], [[2.0]]], [[[1.0]]], [[[0.0]]])
    with pytest.raises(InvalidInput):
        BlockFamily.from_family(MatrixFamily([np.ones((2, 2))]), 1)


def test_from_family_roundtrip(ex1_family):
    bf = BlockFamily.from_family(ex1_family, 1)
    fam = assemble(bf)
    for a, b in zip(fam, ex1_family):
        assert np.array_equal(a, b)


def test_classify_example1(ex1_blocks):
    res = classify(ex1_blocks, 12, 0.95, 1e-8)
    assert res.verdict is Verdict.STABLE and res.growth == "bounded"
    ev = res.evidence
    assert ev.pi1 == (1,) and ev.pi2 == (1,)
    assert ev.cyclic_match
    assert ev.lambda1 == pytest.approx(1.0) and ev.lambda2 == pytest.approx(-1.0)
    assert not ev.eigen_match
    assert all(c.ok for c in res.certificates)
    assert "MarginallyStable" in res.to_text()
    assert res.to_dict()["verdict"] == "MarginallyStable"


def test_classify_single_jordan_block():
    res = classify(BlockFamily([[[1.0]]], [[[1.0]]], [[[1.0]]]))
    assert res.verdict is Verdict.UNSTABLE and res.growth == "linear"
    assert res.evidence.jordan_order == 2


def test_classify_modified_example1():
    bf = example1_blocks(2.0, 0.1, a1_corner=1.0)
    res = classify(bf)
    assert res.verdict is Verdict.UNSTABLE and res.growth == "linear"
    fam = assemble(bf)
    ratios = [exact_mk(fam, k)[0] / k for k in range(8, 17)]
    assert min(ratios) > 0 and max(ratios) / min(ratios) <= 3


def test_stable_means_bounded(ex1_blocks):
    fam = assemble(ex1_blocks)
    mks = [exact_mk(fam, k)[0] for k in range(1, 17)]
    c = max(mks[:8])
    assert max(mks) <= c * (1 + 1e-9)


def test_golden_blocks_unstable_with_linear_growth():
    bf = golden_blocks()
    res = classify(bf, horizon=10)
    assert res.evidence.pi1 == (0, 1)
    assert res.verdict is Verdict.UNSTABLE
    fam = assemble(bf)
    ratios = [exact_mk(fam, k)[0] / k for k in range(8, 15)]
    assert max(ratios) / min(ratios) <= 3


def test_rotation_of_dominant_word_keeps_evidence():
    bf = golden_blocks()
    res = classify(bf, horizon=10)
    fam = assemble(bf)
    lam = res.evidence.lambda1
    for w in rotations(res.evidence.pi1):
        p1, p2 = bf.block1.product(w), bf.block2.product(w)
        assert max(np.linalg.eigvals(p1), key=abs) == pytest.approx(lam, abs=1e-9)
        assert max(np.linalg.eigvals(p2), key=abs) == pytest.approx(lam, abs=1e-9)
        assert jordan_order(fam.product(w), lam) == res.evidence.jordan_order


def test_coupling_scaling_invariance(ex1_blocks):
    base = classify(ex1_blocks)
    for c in (-3.0, 0.01, 7.5):
        res = classify(ex1_blocks.scaled_couplings(c))
        assert res.verdict == base.verdict
        assert res.evidence.eigen_match == base.evidence.eigen_match
    bf = golden_blocks()
    lam = classify(bf, horizon=10).evidence.lambda1
    j0 = jordan_order(assemble(bf).product("01"), lam)
    for c in (-2.0, 0.1, 10.0):
        assert jordan_order(assemble(bf.scaled_couplings(c)).product("01"), lam) == j0


def test_hypotheses_refused():
    with pytest.raises(DominanceUncertified) as exc:
        classify(BlockFamily([[[1.0]], [[-1.0]]], [[[0.5]], [[0.1]]], [[[0.0]], [[0.0]]]))
    assert exc.value.block == 1 and exc.value.certificate.violations
    with pytest.raises(HypothesesUnmet) as exc:
        classify(BlockFamily([[[0.5]], [[0.1]]], [np.diag([1.0, -1.0]), 0.1 * np.eye(2)],
                             [np.zeros((1, 2))] * 2))
    assert exc.value.block == 2 and exc.value.reason == "leading-eigenvalue"


def test_coupling_sum_single_segment(ex1_blocks, rng):
    fam = assemble(ex1_blocks)
    for w in ["1", "0110", "10101"]:
        assert np.allclose(coupling_sum(ex1_blocks, [w]), fam.product(w)[:1, 1:], atol=1e-15)
    with pytest.raises(InvalidInput):
        coupling_sum(ex1_blocks, [])


def test_coupling_sum_examples(ex1_blocks):
    fam = assemble(ex1_blocks)
    assert np.allclose(coupling_sum(ex1_blocks, ["1", "0", "1"]), fam.product("101")[:1, 1:], atol=1e-12)
    bf = pr_blocks()
    fam = assemble(bf)
    assert np.allclose(coupling_sum(bf, ["011", "0", "11"]), fam.product("011011")[:1, 1:], atol=1e-10)


def random_segmentation(rng, length, letters=2):
    w = "".join(str(c) for c in rng.integers(0, letters, length))
    cuts = sorted(rng.choice(np.arange(1, length), size=int(rng.integers(0, min(6, length - 1) + 1)), replace=False))
    return w, [w[i:j] for i, j in zip([0] + list(cuts), list(cuts) + [length])]


def test_coupling_sum_random(rng, ex1_blocks):
    fams = [ex1_blocks, pr_blocks(), golden_blocks(),
            BlockFamily([rng.standard_normal((2, 2)) * 0.7 for _ in range(3)],
                        [rng.standard_normal((2, 2)) * 0.7 for _ in range(3)],
                        [rng.standard_normal((2, 2)) for _ in range(3)])]
    for bf in fams:
        full = assemble(bf)
        for _ in range(50):
            w, segs = random_segmentation(rng, int(rng.integers(2, 51)), len(bf))
            direct = full.product(w)[:bf.d1, bf.d1:]
            assert np.allclose(coupling_sum(bf, segs), direct, atol=1e-9 * max(1.0, np.abs(direct).max()))


def test_example1_builders():
    fam = example1_family(2.0, 0.1)
    assert fam.labels == ("sB", "A1")
    assert np.array_equal(fam[1], [[1, 2], [0, -1]])
    assert np.allclose(fam[0], [[0.1, 0.1], [0, 0.1]])
    with pytest.raises(InvalidInput):
        example1_blocks(B=[[1, 0], [1, 1]])
    assert math.isclose(classify(example1_blocks(2.0, 0.1)).rho, 1.0)
