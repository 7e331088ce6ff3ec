import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdp.errors import DimensionMismatch, EmptyAlphabet, InvalidTernary, NegativeProbability, NotNormalized, ZeroMarginalOutput
from rdp.prob import (
    Channel,
    Pmf,
    binary_entropy,
    compose,
    entropy,
    joint,
    mutual_information,
    output_marginal,
    posterior,
    ternary_entropy,
    validate_channel,
    validate_pmf,
)

A, B = 0.9, 0.5


def pmfs(min_size=1, max_size=5):
    return st.lists(st.floats(0.0, 1.0), min_size=min_size, max_size=max_size).filter(lambda v: sum(v) > 1e-3).map(
        lambda v: Pmf(np.array(v) / sum(v))
    )


@st.composite
def source_and_channel(draw, max_in=5, max_out=5):
    n = draw(st.integers(1, max_in))
    m = draw(st.integers(1, max_out))
    src = draw(pmfs(n, n))
    rows = [draw(pmfs(m, m)).probs for _ in range(n)]
    return src, Channel(np.array(rows))


def brute_marginal(src, ch):
    out = np.zeros(ch.n_outputs)
    for x, y in itertools.product(range(ch.n_inputs), range(ch.n_outputs)):
        out[y] += src.probs[x] * ch.rows[x, y]
    return out


# validation


def test_validate_uniform_binary():
    assert validate_pmf([0.5, 0.5]).alphabet_size == 2


def test_validate_bern_tenth():
    pmf = validate_pmf([0.1, 0.9])
    np.testing.assert_array_equal(pmf.probs, [0.1, 0.9])


def test_not_normalized_reports_deviation():
    with pytest.raises(NotNormalized) as info:
        validate_pmf([0.5, 0.6])
    assert info.value.deviation == pytest.approx(0.1)


def test_negative_and_empty():
    with pytest.raises(NegativeProbability):
        validate_pmf([1.2, -0.2])
    with pytest.raises(EmptyAlphabet):
        validate_pmf([])


def test_pmf_is_immutable():
    pmf = validate_pmf([0.5, 0.5])
    with pytest.raises(ValueError):
        pmf.probs[0] = 1.0


def test_channel_rows_validated():
    with pytest.raises(NotNormalized):
        validate_channel([[0.5, 0.6], [1.0, 0.0]])
    ch = validate_channel([[1.0, 0.0, 0.0]])
    assert (ch.n_inputs, ch.n_outputs) == (1, 3)


# marginals and joints


def test_output_marginal_identity():
    src = Pmf.bernoulli(0.3)
    np.testing.assert_allclose(output_marginal(src, Channel.identity(2)).probs, [0.7, 0.3])


def test_output_marginal_constant_channel():
    q = np.array([0.2, 0.5, 0.3])
    src = Pmf(np.array([0.6, 0.4]))
    np.testing.assert_allclose(output_marginal(src, Channel.constant(q, 2)).probs, q)


def test_output_marginal_binary_example():
    src = Pmf.bernoulli(0.1)
    ch = Channel.binary(A, B)
    got = output_marginal(src, ch).probs
    assert got[0] == pytest.approx(0.86, abs=1e-15)
    np.testing.assert_allclose(got, brute_marginal(src, ch), atol=1e-15)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        output_marginal(Pmf.uniform(3), Channel.identity(2))
    with pytest.raises(DimensionMismatch):
        joint(Pmf.uniform(3), Channel.identity(2))
    with pytest.raises(DimensionMismatch):
        mutual_information(Pmf.uniform(3), Channel.identity(2))


def test_joint_examples():
    np.testing.assert_allclose(joint(Pmf.uniform(2), Channel.identity(2)).probs, np.diag([0.5, 0.5]))
    got = joint(Pmf.bernoulli(0.1), Channel.binary(A, B)).probs
    np.testing.assert_allclose(got, [[0.81, 0.09], [0.05, 0.05]], atol=1e-15)
    # constant output 1: all mass lands in column 1
    const = joint(Pmf.bernoulli(0.3), Channel.constant(np.array([0.0, 1.0]), 2)).probs
    np.testing.assert_allclose(const, [[0.0, 0.7], [0.0, 0.3]])


# entropies


def test_entropy_values():
    assert entropy(Pmf.bernoulli(0.5)) == 1.0
    assert entropy(Pmf.bernoulli(0.0)) == 0.0
    direct = -0.1 * math.log2(0.1) - 0.9 * math.log2(0.9)
    assert entropy(Pmf.bernoulli(0.1)) == pytest.approx(direct, abs=1e-15)
    assert binary_entropy(0.1) == pytest.approx(0.46900, abs=5e-6)


def test_binary_entropy_domain():
    assert binary_entropy(0.0) == binary_entropy(1.0) == 0.0
    with pytest.raises(ValueError):
        binary_entropy(1.5)


def test_ternary_entropy_values():
    assert ternary_entropy(1 / 3, 1 / 3) == pytest.approx(math.log2(3), abs=1e-14)
    assert ternary_entropy(0.0, 0.3) == pytest.approx(binary_entropy(0.3), abs=1e-15)
    direct = -sum(v * math.log2(v) for v in (0.025, 0.1, 0.875))
    assert ternary_entropy(0.025, 0.1) == pytest.approx(direct, abs=1e-14)
    assert ternary_entropy(0.025, 0.1) == pytest.approx(0.63381, abs=5e-6)


def test_ternary_entropy_invalid():
    with pytest.raises(InvalidTernary):
        ternary_entropy(0.7, 0.5)
    with pytest.raises(InvalidTernary):
        ternary_entropy(-0.1, 0.5)


@given(st.floats(0.0, 1.0))
def test_ternary_with_zero_second_is_binary(alpha):
    assert ternary_entropy(alpha, 0.0) == pytest.approx(binary_entropy(alpha), abs=1e-14)


@given(pmfs(1, 8))
def test_entropy_bounds(pmf):
    h = entropy(pmf)
    assert -1e-12 <= h <= math.log2(pmf.alphabet_size) + 1e-12


# mutual information


def test_mi_examples():
    assert mutual_information(Pmf.uniform(2), Channel.identity(2)) == pytest.approx(1.0, abs=1e-15)
    assert mutual_information(Pmf.bernoulli(0.2), Channel.constant(np.array([0.4, 0.6]), 2)) == pytest.approx(0.0, abs=1e-15)


def test_mi_bsc():
    flip = 0.11
    ch = Channel(np.array([[1 - flip, flip], [flip, 1 - flip]]))
    # joint-sum evaluation as the independent check
    pj = 0.5 * ch.rows
    direct = sum(pj[x, y] * math.log2(pj[x, y] / 0.25) for x in range(2) for y in range(2))
    got = mutual_information(Pmf.uniform(2), ch)
    assert got == pytest.approx(direct, abs=1e-14)
    assert got == pytest.approx(1 - binary_entropy(flip), abs=1e-14)
    assert got == pytest.approx(0.500084, abs=1e-6)


def test_mi_zero_iff_rows_equal_on_support():
    src = Pmf(np.array([0.5, 0.5, 0.0]))
    ch = Channel(np.array([[0.3, 0.7], [0.3, 0.7], [1.0, 0.0]]))
    assert mutual_information(src, ch) == pytest.approx(0.0, abs=1e-15)
    ch2 = Channel(np.array([[0.3, 0.7], [0.31, 0.69], [1.0, 0.0]]))
    assert mutual_information(src, ch2) > 0


@settings(max_examples=200)
@given(source_and_channel())
def test_entropy_dominates_information(sc):
    src, ch = sc
    info = mutual_information(src, ch)
    assert -1e-12 <= info <= entropy(output_marginal(src, ch)) + 1e-12


@settings(max_examples=200)
@given(source_and_channel())
def test_joint_marginals(sc):
    src, ch = sc
    pj = joint(src, ch).probs
    np.testing.assert_allclose(pj.sum(axis=1), src.probs, atol=1e-12)
    np.testing.assert_allclose(pj.sum(axis=0), output_marginal(src, ch).probs, atol=1e-12)
    assert pj.sum() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=200)
@given(source_and_channel(), st.sampled_from([0.25, 0.5, 0.75]), st.randoms(use_true_random=False))
def test_mi_convex_in_channel(sc, lam, rnd):
    src, ch1 = sc
    gen = np.random.default_rng(rnd.randint(0, 2**32 - 1))
    ch2 = Channel(gen.dirichlet(np.ones(ch1.n_outputs), size=ch1.n_inputs))
    mix = Channel(lam * ch1.rows + (1 - lam) * ch2.rows)
    lhs = mutual_information(src, mix)
    rhs = lam * mutual_information(src, ch1) + (1 - lam) * mutual_information(src, ch2)
    assert lhs <= rhs + 1e-10


# posterior


def test_posterior_examples():
    np.testing.assert_allclose(posterior(Pmf.uniform(2), Channel.identity(2)).rows, np.eye(2))
    src = Pmf(np.array([0.2, 0.5, 0.3]))
    post = posterior(src, Channel.constant(np.array([0.4, 0.6]), 3))
    np.testing.assert_allclose(post.rows, [src.probs, src.probs], atol=1e-15)
    post = posterior(Pmf.bernoulli(0.1), Channel.binary(A, B))
    assert post.rows[0, 0] == pytest.approx(0.81 / 0.86, abs=1e-15)
    assert post.rows[0, 0] == pytest.approx(0.94186, abs=5e-6)


def test_posterior_zero_marginal_fills_source():
    src = Pmf(np.array([0.25, 0.75]))
    ch = Channel(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))
    with pytest.warns(ZeroMarginalOutput) as rec:
        post = posterior(src, ch)
    assert rec[0].message.symbols == (2,)
    np.testing.assert_allclose(post.rows[2], src.probs)


@settings(max_examples=200)
@given(source_and_channel())
def test_bayes_round_trip(sc):
    src, ch = sc
    marg = output_marginal(src, ch)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroMarginalOutput)
        post = posterior(src, ch)
    np.testing.assert_allclose(joint(marg, post).probs, joint(src, ch).probs.T, atol=1e-10)


def test_compose():
    flip = Channel(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_array_equal(compose(flip, flip).rows, np.eye(2))
    with pytest.raises(DimensionMismatch):
        compose(Channel.identity(2), Channel.identity(3))
