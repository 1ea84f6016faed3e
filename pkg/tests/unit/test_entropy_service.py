"""
Unit tests for Entropy Service
"""

from math import log

import pytest

from hitlab.schemas.entropy import (
    ArithmeticSequence,
    ExplicitSequence,
    FullSequence,
    GeometricSequence,
    SepProfile,
)
from hitlab.schemas.system import SFT, TorusPoint
from hitlab.services.entropy_service import EntropyService
from hitlab.utils.exceptions import BudgetExceeded, ConfigurationError, NotASubshift, WindowOverflow

FULL = FullSequence()


class TestSequenceTimes:
    @pytest.mark.parametrize(
        "seq, expected",
        [
            (FullSequence(), [0, 1, 2, 3]),
            (ArithmeticSequence(a=3, b=2), [0, 2, 5, 8]),
            (GeometricSequence(c=2), [0, 2, 4, 8]),
            (ExplicitSequence(values=(5, 9, 40)), [0, 5, 9, 40]),
        ],
    )
    def test_times(self, seq, expected):
        assert EntropyService.sequence_times(seq, 4) == expected

    def test_explicit_too_short(self):
        with pytest.raises(ConfigurationError):
            EntropyService.sequence_times(ExplicitSequence(values=(5, 9)), 4)

    def test_explicit_must_increase(self):
        with pytest.raises(ValueError):
            ExplicitSequence(values=(5, 5))

    def test_horizon_cap(self, capped_settings):
        with capped_settings(max_horizon=5):
            with pytest.raises(BudgetExceeded):
                EntropyService.sequence_times(GeometricSequence(c=2), 4)

    def test_k_positive(self):
        with pytest.raises(ConfigurationError):
            EntropyService.sequence_times(FULL, 0)

    def test_window_positions(self):
        assert EntropyService.window_positions([0, 2, 8], 1) == [0, 1, 2, 3, 8, 9]


class TestExactCounts:
    """Separated-set counts on subshifts"""

    @pytest.mark.parametrize("k", [1, 2, 5, 8])
    def test_full_shift(self, full_shift, k):
        assert EntropyService.sep_count_exact(full_shift, FULL, k, 0.3) == 2 ** (k + 1)

    def test_geometric_times(self, full_shift):
        assert EntropyService.sep_count_exact(full_shift, GeometricSequence(c=2), 4, 0.3) == 256

    def test_golden_mean(self):
        golden_mean = SFT(alphabet_size=2, forbidden=("11",))

        assert EntropyService.sep_count_exact(golden_mean, FULL, 1, 0.3) == 3

    def test_split_sft_stays_at_two(self, split_sft):
        assert EntropyService.sep_count_exact(split_sft, FULL, 6, 0.1) == 2

    def test_metric_system_rejected(self, golden_rotation):
        with pytest.raises(NotASubshift):
            EntropyService.sep_count_exact(golden_rotation, FULL, 2, 0.3)

    def test_window_overflow(self, full_shift, capped_settings):
        with capped_settings(max_window=10):
            assert EntropyService.sep_count_exact(full_shift, FULL, 10, 0.3) == 2**11
            with pytest.raises(WindowOverflow):
                EntropyService.sep_count_exact(full_shift, FULL, 11, 0.3)


class TestGreedy:
    def test_sample_sizes(self, full_shift, golden_rotation, skew_product, wedge_fullshift):
        assert len(EntropyService.sample_points(full_shift, 3)) == 8
        assert len(EntropyService.sample_points(golden_rotation, 3)) == 8
        assert len(EntropyService.sample_points(skew_product, 4)) == 16
        assert len(EntropyService.sample_points(wedge_fullshift, 2)) == 8

    def test_rotation_grid(self, golden_rotation):
        sample = EntropyService.sample_points(golden_rotation, 2)

        assert [p.coords[0] for p in sample] == [0, 0.25, 0.5, 0.75]
        assert all(isinstance(p, TorusPoint) for p in sample)

    def test_subshift_signatures(self, full_shift):
        sample = EntropyService.sample_points(full_shift)

        assert EntropyService.sep_greedy(full_shift, sample, FULL, 2, 0.3) == 8

    def test_rotation_count_does_not_grow(self, golden_rotation):
        sample = EntropyService.sample_points(golden_rotation, 4)

        counts = [EntropyService.sep_greedy(golden_rotation, sample, FULL, k, 0.3) for k in (1, 2, 4)]

        assert counts[0] == counts[1] == counts[2]


class TestEstimates:
    """Slopes of log sep(k)"""

    def test_full_shift_profile(self, full_shift):
        profile = EntropyService.sep_profile(full_shift, FULL, 0.3, 6)

        assert profile.method == "exact"
        assert profile.counts == [4, 8, 16, 32, 64, 128]
        assert profile.slope == pytest.approx(log(2))

    def test_rotation_profile_is_flat(self, golden_rotation):
        profile = EntropyService.sep_profile(golden_rotation, FULL, 0.3, 4)

        assert profile.method == "greedy"
        assert profile.slope == pytest.approx(0.0, abs=1e-9)

    def test_k_max_at_least_two(self, full_shift):
        with pytest.raises(ConfigurationError):
            EntropyService.sep_profile(full_shift, FULL, 0.3, 1)

    def test_estimate_takes_max_over_epsilons(self, full_shift):
        estimate = EntropyService.seq_entropy_estimate(full_shift, FULL, [0.3, 0.1], 6)

        assert estimate.value == pytest.approx(log(2))
        assert set(estimate.per_epsilon) == {"0.3", "0.1"}
        assert len(estimate.profiles) == 2

    @pytest.mark.parametrize("epsilons", [[], [0.1, 0.3], [0.3, 0.3]])
    def test_epsilons_strictly_decreasing(self, full_shift, epsilons):
        with pytest.raises(ConfigurationError):
            EntropyService.seq_entropy_estimate(full_shift, FULL, epsilons, 4)

    def test_profile_csv(self):
        profile = SepProfile(counts=[2, 4], epsilon=0.3, slope=0.69, method="exact")

        lines = EntropyService.profile_csv(profile).splitlines()

        assert lines[0] == "k,sep,log_sep"
        assert lines[1].startswith("1,2,0.693")
        assert len(lines) == 3
