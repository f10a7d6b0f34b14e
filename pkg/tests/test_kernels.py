import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import edit_distance_bfs, edit_paths_min, shared_ngrams_bruteforce, shared_substrings_bruteforce
from svcgrid.data import TermDataset
from svcgrid.kernels import (KernelKind, LevenshteinWeights, build_kernel_matrix, cross_kernel, gaussian_dist_kernel,
                             gaussian_kernel, jaccard, jaccard_matrix, jaccard_plus, levenshtein, levenshtein_matrix,
                             linear_kernel, string_kernel)

short = st.text(alphabet="abc", max_size=5)


def random_terms(seed, n=12):
    rng = np.random.default_rng(seed)
    vocab = ["spore", "coat", "mother", "cell", "sept", "cortex", "of", "the", "prespore", "engulf"]
    terms = set()
    while len(terms) < n:
        terms.add(" ".join(rng.choice(vocab, size=rng.integers(1, 4))))
    return sorted(terms)


# -- vector kernels ---------------------------------------------------------------


def test_gaussian_values():
    assert gaussian_kernel([1.5, -2], [1.5, -2], 3.0) == 1.0
    assert gaussian_kernel([0, 0], [1, 0], 1.0) == pytest.approx(np.exp(-1))
    assert gaussian_kernel([0, 0], [3, 4], 1e-12) == pytest.approx(1.0)
    assert gaussian_dist_kernel([0, 0], [3, 4], 0.5) == pytest.approx(np.exp(-2.5))
    assert linear_kernel([1, 2], [3, 4]) == 11


def test_gaussian_errors():
    with pytest.raises(ValueError):
        gaussian_kernel([0, 0], [0, 0, 0], 1.0)
    with pytest.raises(ValueError):
        gaussian_kernel([0], [1], 0.0)


def test_cross_kernel_matches_scalar():
    rng = np.random.default_rng(1)
    A, B = rng.normal(size=(4, 3)), rng.normal(size=(5, 3))
    K = cross_kernel("gaussian", A, B, 0.7)
    for i, j in itertools.product(range(4), range(5)):
        assert K[i, j] == pytest.approx(gaussian_kernel(A[i], B[j], 0.7), rel=1e-12)
    with pytest.raises(ValueError):
        cross_kernel("jrb", A, B, 1.0)


@pytest.mark.parametrize("kind", ["gaussian", "gaussian-dist", "linear"])
def test_vector_matrix_properties(kind):
    X = np.random.default_rng(2).normal(size=(15, 2))
    K = build_kernel_matrix(X, kind, 2.0).values
    assert np.array_equal(K, K.T)
    if kind != "linear":
        assert np.all(np.diag(K) == 1.0)
        assert np.all((K > 0) & (K <= 1))


def test_kind_parse():
    assert KernelKind.parse("RBF") is KernelKind.GAUSSIAN
    assert KernelKind.parse("jrb+") is KernelKind.JRB_PLUS
    with pytest.raises(ValueError):
        KernelKind.parse("poly")


# -- Levenshtein --------------------------------------------------------------------


def test_levenshtein_examples():
    assert levenshtein("spore", "spore") == 0
    assert levenshtein("", "abc") == 3
    assert levenshtein("kitten", "sitting") == edit_distance_bfs("kitten", "sitting") == 3


@settings(max_examples=150, deadline=None)
@given(short, short, st.floats(0, 3), st.floats(0, 3), st.floats(0, 3))
def test_levenshtein_matches_path_enumeration(a, b, wi, wd, ws):
    w = LevenshteinWeights(wi, wd, ws)
    assert levenshtein(a, b, w) == pytest.approx(edit_paths_min(a, b, wi, wd, ws), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.text(alphabet="abcd", max_size=5), st.text(alphabet="abcd", max_size=5))
def test_levenshtein_matches_bfs(a, b):
    assert levenshtein(a, b) == edit_distance_bfs(a, b)


def test_levenshtein_matrix_matches_pairs():
    words = ["spore", "sept", "", "prespore", "coat", "côte"]
    D = levenshtein_matrix(words)
    for i, j in itertools.product(range(len(words)), repeat=2):
        assert D[i, j] == levenshtein(words[i], words[j])


def test_levenshtein_metric_on_corpus():
    rng = np.random.default_rng(5)
    corpus = ["".join(rng.choice(list("abcde"), size=rng.integers(0, 8))) for _ in range(50)]
    D = levenshtein_matrix(corpus)
    assert np.array_equal(D, D.T)
    same = np.array([[a == b for b in corpus] for a in corpus])
    assert np.array_equal(D == 0, same)
    assert np.all(D[:, :, None] <= D[:, None, :] + D.T[None, :, :] + 1e-12)


def test_levenshtein_weights_validation():
    with pytest.raises(ValueError):
        LevenshteinWeights(-1, 1, 1)


# -- Jaccard ------------------------------------------------------------------------


def test_jaccard_examples():
    assert jaccard({"a", "b"}, {"a", "b"}) == 1
    assert jaccard({"a"}, {"b"}) == 0
    assert jaccard({"a", "b"}, {"b", "c"}) == pytest.approx(1 / 3)
    assert jaccard(set(), set()) == 0


@given(st.sets(st.integers(0, 6)), st.sets(st.integers(0, 6)))
def test_jaccard_bounds_symmetry(s1, s2):
    v = jaccard(s1, s2)
    assert 0 <= v <= 1
    assert v == jaccard(s2, s1)


def test_jaccard_matrix_matches_sets():
    rng = np.random.default_rng(3)
    F = (rng.random((9, 6)) < 0.4).astype(float)
    J = jaccard_matrix(F)
    sets = [set(np.flatnonzero(r)) for r in F]
    for i, j in itertools.product(range(9), repeat=2):
        assert J[i, j] == pytest.approx(jaccard(sets[i], sets[j]))


def test_jaccard_plus():
    J = jaccard_matrix((np.random.default_rng(0).random((20, 5)) < 0.3).astype(float))
    A = jaccard_plus(J, 0.05, seed=7)
    assert np.array_equal(A, jaccard_plus(J, 0.05, seed=7))
    assert not np.array_equal(A, jaccard_plus(J, 0.05, seed=8))
    assert np.array_equal(A, A.T)
    zero = J == 0
    assert np.all((A[zero] > 0) & (A[zero] <= 0.05))
    assert np.array_equal(A[~zero], J[~zero])
    assert np.array_equal(jaccard_plus(J, 0.0, seed=7), J)


# -- term kernels -------------------------------------------------------------------


def _jrb_direct(J, q, i, j):
    # scalar recomputation of exp(-q * sum_k (J_ik - J_jk)^2)
    total = 0.0
    for k in range(len(J)):
        total += (J[i][k] - J[j][k]) ** 2
    return np.exp(-q * total)


def test_jrb_three_terms_by_hand():
    ds = TermDataset(("spore coat", "coat protein", "mother cell"), ("spore", "coat", "protein", "mother", "cell"),
                     "TM-TM")
    # hand Jaccard: {spore,coat} vs {coat,protein} share 1 of 3
    J = [[1, 1 / 3, 0], [1 / 3, 1, 0], [0, 0, 1]]
    K = build_kernel_matrix(ds, "jrb", 0.8).values
    for i, j in itertools.product(range(3), repeat=2):
        assert K[i, j] == pytest.approx(_jrb_direct(J, 0.8, i, j), rel=1e-12)


def test_rbl_and_rbj():
    ds = TermDataset(("spore", "spores", "coat"), ("spore", "coat"), "TM-RD")
    K = build_kernel_matrix(ds, "rbl", 0.5).values
    assert np.all(np.diag(K) == 1)
    assert K[0, 1] == pytest.approx(np.exp(-0.5))
    R = build_kernel_matrix(ds, "rbj", 2.0).values
    assert R[0, 1] == 1.0  # identical radical sets
    assert R[0, 2] == pytest.approx(np.exp(-2.0))


@pytest.mark.parametrize("kind", ["lrb", "rbl", "jrb", "rbj", "jrb-plus"])
def test_term_matrix_properties(kind):
    ds = TermDataset(tuple(random_terms(0)), ("spore", "coat", "mother", "cell", "sept", "cortex", "engulf"), "TM-RD")
    K = build_kernel_matrix(ds, kind, 0.3).values
    assert np.array_equal(K, K.T)
    assert np.all(np.diag(K) == 1)
    assert np.all((K > 0) & (K <= 1))


@pytest.mark.parametrize("kind", ["lrb", "rbl"])
def test_levenshtein_kernels_decrease_in_q(kind):
    ds = TermDataset(tuple(random_terms(1)), ("spore",), "TM-TM")
    K1 = build_kernel_matrix(ds, kind, 0.01).values
    K2 = build_kernel_matrix(ds, kind, 0.02).values
    off = ~np.eye(len(K1), dtype=bool)
    assert np.all(K2[off] < K1[off])


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("kind", ["lrb", "jrb", "jrb-plus"])
def test_profile_kernels_psd(seed, kind):
    ds = TermDataset(tuple(random_terms(seed, 15)), ("spore", "coat", "mother", "cell", "sept", "cortex"), "TM-RD")
    K = build_kernel_matrix(ds, kind, 0.05, seed=seed).values
    assert np.linalg.eigvalsh(K).min() >= -1e-8


def test_precomputed():
    M = np.array([[1.0, 0.2], [0.2, 1.0]])
    assert np.array_equal(build_kernel_matrix(None, "precomputed", matrix=M).values, M)
    with pytest.raises(ValueError):
        build_kernel_matrix(None, "precomputed", matrix=np.array([[1.0, 0.2], [0.3, 1.0]]))
    with pytest.raises(ValueError):
        build_kernel_matrix(None, "precomputed")


def test_term_kernel_needs_terms():
    with pytest.raises(TypeError):
        build_kernel_matrix(np.zeros((3, 2)), "jrb", 1.0)
    with pytest.raises(ValueError):
        build_kernel_matrix(np.zeros((3, 2)), "gaussian", -1.0)


# -- string kernels -----------------------------------------------------------------


def test_spectrum_examples():
    assert string_kernel("ab", "ab", "spectrum", 2) == 1
    assert string_kernel("abc", "xbz", "spectrum", 2) == 0
    rng = np.random.default_rng(4)
    for _ in range(20):
        a = "".join(rng.choice(list("abc"), 10))
        b = "".join(rng.choice(list("abc"), 10))
        assert string_kernel(a, b, "spectrum", 3) == shared_ngrams_bruteforce(a, b, 3)


def test_constant_kernel_calibration_values():
    assert string_kernel("inner coat", "in the mother cell", "constant") == 22
    assert string_kernel("inner coat", "initiation of sporulation", "constant") == 27


@settings(max_examples=80, deadline=None)
@given(st.text(alphabet="abc ", max_size=8), st.text(alphabet="abc ", max_size=8))
def test_constant_kernel_matches_enumeration(a, b):
    assert string_kernel(a, b, "constant") == shared_substrings_bruteforce(a, b)
    assert string_kernel(a, b, "constant") == string_kernel(b, a, "constant")


def test_constant_kernel_rewards_order():
    assert string_kernel("abc", "abc", "constant") > string_kernel("abc", "cba", "constant") > 1


def test_string_kernel_matrix_normalised():
    ds = TermDataset(("inner coat", "in the mother cell", "initiation of sporulation"), ("coat",), "TM-TM")
    for kind in ("sk-constant", "sk-spectrum"):
        K = build_kernel_matrix(ds, kind, n=2).values
        assert np.all(np.diag(K) == 1)
        assert np.array_equal(K, K.T)
        assert np.linalg.eigvalsh(K).min() >= -1e-10


def test_string_kernel_errors():
    with pytest.raises(ValueError):
        string_kernel("a", "a", "spectrum", 0)
    with pytest.raises(ValueError):
        string_kernel("a", "a", "gappy")


def test_levenshtein_non_ascii():
    assert levenshtein("é" * 3, "") == 3
    assert levenshtein("côte", "cote") == 1
