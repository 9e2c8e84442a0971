"""Information criteria against brute-force oracles."""

import math

import numpy as np
import pytest

from graftnet.criteria import (
    BinningConfig,
    DiscreteDistribution,
    InvalidFilterSelector,
    entropy_of_values,
    filter_entropy,
    invalid_filter_mask,
    joint_entropy,
    l1_norm_filter,
    layer_entropy,
    layer_info_sum,
)
from graftnet.errors import ConfigError, DomainError, LayerKindError, ValidationError
from graftnet.model import CONV, DENSE, LayerWeights


def entropy_oracle(values, bin_count, lo=None, hi=None):
    """Independent histogram-entropy implementation: plain Python loops.

    Uses the same published binning rule (floor((v - lo) / (hi - lo) * B),
    clipped to the edge bins) so agreement must be exact, not approximate.
    """
    vals = [float(v) for v in np.asarray(values).ravel()]
    if lo is None:
        lo, hi = min(vals), max(vals)
        if lo == hi:
            return 0.0
    counts = [0] * bin_count
    for v in vals:
        idx = int(math.floor((v - lo) / (hi - lo) * bin_count))
        idx = min(max(idx, 0), bin_count - 1)
        counts[idx] += 1
    h = 0.0
    for c in counts:
        if c:
            p = c / len(vals)
            h -= p * math.log(p)
    return h


def conv_layer(weights, name="conv1"):
    w = np.asarray(weights, dtype=np.float64)
    return LayerWeights(name, CONV, w, np.zeros(w.shape[0]))


class TestL1Norm:
    def test_all_ones(self):
        assert l1_norm_filter(np.ones((2, 3, 3))) == 18.0

    def test_all_zeros(self):
        assert l1_norm_filter(np.zeros((4, 3, 3))) == 0.0

    def test_mixed_signs(self):
        assert l1_norm_filter(np.array([[1.0, -2.0], [3.0, -4.0]])) == 10.0

    def test_zero_iff_all_zero(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            t = rng.normal(size=(3, 3))
            assert (l1_norm_filter(t) == 0.0) == (t == 0).all()


class TestEntropyOfValues:
    def test_constant_values_zero(self):
        cfg = BinningConfig(bin_count=10)
        assert entropy_of_values(np.full(50, 3.7), cfg) == 0.0

    def test_equal_mass_four_bins(self):
        # Values filling 4 bins with equal mass maximize entropy at ln 4.
        cfg = BinningConfig(bin_count=4)
        values = np.array([0.1, 0.1, 1.1, 1.1, 2.1, 2.1, 3.1, 3.1])
        assert abs(entropy_of_values(values, cfg) - math.log(4)) < 1e-9

    def test_matches_oracle_exactly_minmax(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            values = rng.normal(size=int(rng.integers(1, 400)))
            cfg = BinningConfig(bin_count=int(rng.integers(2, 32)))
            assert entropy_of_values(values, cfg) == entropy_oracle(values, cfg.bin_count)

    def test_matches_oracle_exactly_fixed_range(self):
        rng = np.random.default_rng(43)
        for _ in range(50):
            values = rng.normal(size=200)
            cfg = BinningConfig(bin_count=8, range_mode="fixed", range_lo=-1.0, range_hi=1.0)
            assert entropy_of_values(values, cfg) == entropy_oracle(values, 8, -1.0, 1.0)

    def test_bounds(self):
        rng = np.random.default_rng(44)
        for _ in range(50):
            values = rng.normal(size=int(rng.integers(1, 300)))
            b = int(rng.integers(2, 20))
            h = entropy_of_values(values, BinningConfig(bin_count=b))
            assert 0.0 <= h <= math.log(b) + 1e-12

    def test_permutation_invariance(self):
        rng = np.random.default_rng(45)
        values = rng.normal(size=128)
        cfg = BinningConfig(bin_count=7)
        assert entropy_of_values(values, cfg) == entropy_of_values(values[::-1].copy(), cfg)

    def test_scale_invariance_under_minmax(self):
        # Positive rescaling keeps bin occupancy, so entropy is unchanged
        # while the L1 norm scales; this is the contrast between criteria.
        rng = np.random.default_rng(46)
        values = rng.normal(size=200)
        cfg = BinningConfig(bin_count=10)
        h1 = entropy_of_values(values, cfg)
        h2 = entropy_of_values(values * 3.0, cfg)
        assert abs(h1 - h2) < 1e-12
        assert l1_norm_filter(values * 3.0) == pytest.approx(3.0 * l1_norm_filter(values))

    def test_rejects_empty_and_nonfinite(self):
        cfg = BinningConfig()
        with pytest.raises(DomainError):
            entropy_of_values(np.array([]), cfg)
        with pytest.raises(DomainError):
            entropy_of_values(np.array([1.0, np.nan]), cfg)

    def test_fixed_range_clamps_outliers(self):
        cfg = BinningConfig(bin_count=4, range_mode="fixed", range_lo=0.0, range_hi=1.0)
        # -5 lands in the first bin, +5 in the last.
        h = entropy_of_values(np.array([-5.0, 5.0]), cfg)
        assert abs(h - math.log(2)) < 1e-12


class TestFilterAndLayerEntropy:
    def test_constant_filter_zero(self):
        assert filter_entropy(np.full((2, 3, 3), 1.23), BinningConfig()) == 0.0

    def test_sign_flip_with_symmetric_fixed_range(self):
        rng = np.random.default_rng(47)
        f = rng.normal(size=(3, 3, 3))
        cfg = BinningConfig(bin_count=8, range_mode="fixed", range_lo=-2.0, range_hi=2.0)
        # Negation relabels bins symmetrically; the mass profile reverses,
        # leaving entropy unchanged (up to roundoff in p*log p ordering).
        assert filter_entropy(f, cfg) == pytest.approx(filter_entropy(-f, cfg), abs=1e-12)

    def test_filter_entropy_is_flat_entropy(self):
        rng = np.random.default_rng(48)
        f = rng.normal(size=(4, 3, 3))
        cfg = BinningConfig()
        assert filter_entropy(f, cfg) == entropy_of_values(f.ravel(), cfg)

    def test_layer_info_sum_constant_filters(self):
        layer = conv_layer(np.ones((4, 2, 3, 3)))
        assert layer_info_sum(layer, BinningConfig()) == 0.0

    def test_layer_info_sum_single_filter(self):
        rng = np.random.default_rng(49)
        w = rng.normal(size=(1, 2, 3, 3))
        cfg = BinningConfig()
        assert layer_info_sum(conv_layer(w), cfg) == filter_entropy(w[0], cfg)

    def test_layer_info_sum_composes(self):
        rng = np.random.default_rng(50)
        w = rng.normal(size=(3, 2, 3, 3))
        cfg = BinningConfig()
        expected = sum(filter_entropy(w[j], cfg) for j in range(3))
        assert layer_info_sum(conv_layer(w), cfg) == expected

    def test_layer_info_sum_rejects_dense(self):
        dense = LayerWeights("d", DENSE, np.ones((3, 4)), np.zeros(3))
        with pytest.raises(LayerKindError):
            layer_info_sum(dense, BinningConfig())

    def test_layer_entropy_constant_layer(self):
        assert layer_entropy(conv_layer(np.full((4, 2, 3, 3), 2.0)), BinningConfig()) == 0.0

    def test_layer_entropy_duplication_invariant(self):
        # Doubling every filter keeps bin proportions: the joint form does
        # not reward redundant filters, unlike the per-filter sum.
        rng = np.random.default_rng(51)
        w = rng.normal(size=(2, 2, 3, 3))
        doubled = np.concatenate([w, w], axis=0)
        cfg = BinningConfig()
        assert layer_entropy(conv_layer(doubled), cfg) == pytest.approx(
            layer_entropy(conv_layer(w), cfg), abs=1e-12
        )
        assert layer_info_sum(conv_layer(doubled), cfg) == pytest.approx(
            2.0 * layer_info_sum(conv_layer(w), cfg), abs=1e-12
        )

    def test_layer_entropy_matches_oracle(self):
        rng = np.random.default_rng(52)
        for _ in range(20):
            w = rng.normal(size=(3, 2, 3, 3))
            cfg = BinningConfig(bin_count=12)
            assert layer_entropy(conv_layer(w), cfg) == entropy_oracle(w, 12)


class TestInvalidFilterMask:
    def _layer_with_norms(self, norms):
        # Filter j is constant norms[j]/(2*3*3), so its L1 norm is norms[j].
        blocks = [np.full((2, 3, 3), n / 18.0) for n in norms]
        return conv_layer(np.stack(blocks))

    def test_absolute_threshold_example(self):
        layer = self._layer_with_norms([5.0, 3.0, 1.0, 0.5])
        mask = invalid_filter_mask(
            layer, "l1", InvalidFilterSelector("absolute_threshold", 2.0), BinningConfig()
        )
        assert mask.tolist() == [False, False, True, True]

    def test_bottom_fraction_marks_floor(self):
        layer = self._layer_with_norms([5.0, 3.0, 1.0, 0.5])
        mask = invalid_filter_mask(
            layer, "l1", InvalidFilterSelector("bottom_fraction", 0.25), BinningConfig()
        )
        assert mask.sum() == 1
        assert mask.tolist() == [False, False, False, True]

    def test_tie_break_lower_index_first(self):
        layer = self._layer_with_norms([2.0, 2.0, 2.0, 2.0])
        mask = invalid_filter_mask(
            layer, "l1", InvalidFilterSelector("bottom_fraction", 0.5), BinningConfig()
        )
        assert mask.tolist() == [True, True, False, False]

    def test_entropy_criterion_runs(self):
        rng = np.random.default_rng(53)
        layer = conv_layer(rng.normal(size=(6, 2, 3, 3)))
        mask = invalid_filter_mask(
            layer, "entropy", InvalidFilterSelector("bottom_fraction", 0.5), BinningConfig()
        )
        assert mask.sum() == 3

    def test_selector_validation(self):
        with pytest.raises(ConfigError):
            InvalidFilterSelector("bottom_fraction", 1.0)
        with pytest.raises(ConfigError):
            InvalidFilterSelector("absolute_threshold", -0.1)
        with pytest.raises(ConfigError):
            InvalidFilterSelector("nonsense", 0.5)


def random_joint(rng, nx, ny):
    """A random joint distribution over integer supports (exact sums)."""
    sx = rng.choice(np.arange(-20, 21), size=nx, replace=False).astype(float)
    sy = rng.choice(np.arange(-20, 21), size=ny, replace=False).astype(float)
    table = rng.uniform(0.05, 1.0, size=(nx, ny))
    table /= table.sum()
    x = DiscreteDistribution(tuple(sx), tuple(table.sum(axis=1)))
    y = DiscreteDistribution(tuple(sy), tuple(table.sum(axis=0)))
    return x, y, table


def entropy_of_mass(masses):
    return -sum(p * math.log(p) for p in masses if p > 0)


class TestJointEntropy:
    def test_independent_fair_coins(self):
        x = DiscreteDistribution((0.0, 1.0), (0.5, 0.5))
        y = DiscreteDistribution((0.0, 1.0), (0.5, 0.5))
        h = joint_entropy(x, y, np.full((2, 2), 0.25))
        assert abs(h - math.log(4)) < 1e-12

    def test_deterministic_copy_adds_nothing(self):
        x = DiscreteDistribution((0.0, 1.0, 2.0), (0.2, 0.3, 0.5))
        joint = np.diag(x.probs)
        h = joint_entropy(x, x, joint)
        assert abs(h - x.entropy()) < 1e-12

    def test_marginal_validation(self):
        x = DiscreteDistribution((0.0, 1.0), (0.5, 0.5))
        y = DiscreteDistribution((0.0, 1.0), (0.5, 0.5))
        bad = np.array([[0.4, 0.1], [0.2, 0.3]])  # row sums 0.5/0.5, cols 0.6/0.4
        with pytest.raises(ValidationError):
            joint_entropy(x, y, bad)

    def test_sum_variable_preserves_joint_entropy(self):
        # Brute-force check that pairing X with Z = X + Y (or Y with Z)
        # carries exactly the information of (X, Y): the defining identity
        # behind in-network filter addition adding no new information.
        rng = np.random.default_rng(54)
        for _ in range(200):
            nx = int(rng.integers(2, 9))
            ny = int(rng.integers(2, 9))
            x, y, table = random_joint(rng, nx, ny)
            h_xy = joint_entropy(x, y, table)

            xz = {}
            yz = {}
            for i, xv in enumerate(x.support):
                for j, yv in enumerate(y.support):
                    z = xv + yv  # exact: integer-valued supports
                    xz[(i, z)] = xz.get((i, z), 0.0) + table[i, j]
                    yz[(j, z)] = yz.get((j, z), 0.0) + table[i, j]
            h_xz = entropy_of_mass(xz.values())
            h_yz = entropy_of_mass(yz.values())
            assert abs(h_xy - h_xz) < 1e-9
            assert abs(h_xy - h_yz) < 1e-9

    def test_distribution_validation(self):
        with pytest.raises(ValidationError):
            DiscreteDistribution((0.0, 0.0), (0.5, 0.5))
        with pytest.raises(ValidationError):
            DiscreteDistribution((0.0, 1.0), (0.6, 0.6))
        with pytest.raises(ValidationError):
            DiscreteDistribution((0.0, 1.0), (-0.1, 1.1))
