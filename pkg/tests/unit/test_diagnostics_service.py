"""
Unit tests for Diagnostics Service
"""

from fractions import Fraction

import pytest

from hitlab.schemas.diagnostics import LYAPUNOV_KEYS, LiYorkeWitness
from hitlab.schemas.system import BoxCell, EventuallyPeriodic, PrefixStream, TorusPoint, WordCell, WordSource
from hitlab.schemas.window import Verdict
from hitlab.services.diagnostics_service import CandidateFactory, DiagnosticsService
from hitlab.services.system_service import SystemService
from hitlab.utils.exceptions import BudgetExceeded, ConfigurationError, SampleTooSmall

ORIGIN = TorusPoint(coords=(Fraction(0),))
HALF = TorusPoint(coords=(Fraction(1, 2),))


class TestTransitivityHierarchy:
    """Transitivity, total transitivity, weak mixing and mixing"""

    @pytest.mark.parametrize(
        "test",
        [DiagnosticsService.transitivity_test, DiagnosticsService.weak_mixing_test, DiagnosticsService.mixing_test],
    )
    def test_full_shift_holds(self, full_shift, test):
        result = test(full_shift, 2, 32)

        assert result.verdict == Verdict.HOLDS
        assert result.witness is None
        assert result.runtime_ms >= 0

    def test_rotation_transitive_not_weakly_mixing(self, golden_rotation):
        assert DiagnosticsService.transitivity_test(golden_rotation, 3, 64).verdict == Verdict.HOLDS

        result = DiagnosticsService.weak_mixing_test(golden_rotation, 3, 64)

        assert result.verdict == Verdict.FAILS
        assert {"u", "v"} <= set(result.witness)

    def test_lambda_squares_weakly_mixing_not_mixing(self, lambda_squares):
        weak = DiagnosticsService.weak_mixing_test(lambda_squares, 2, 200)
        strong = DiagnosticsService.mixing_test(lambda_squares, 2, 200)

        assert weak.verdict == Verdict.HOLDS
        assert strong.verdict == Verdict.FAILS
        assert strong.witness["missing"] >= strong.params["tail_start_max"]

    def test_split_sft_not_transitive(self, split_sft):
        result = DiagnosticsService.transitivity_test(split_sft, 1, 16)

        assert result.verdict == Verdict.FAILS
        assert result.witness["u"].word != result.witness["v"].word

    def test_wedge_transitive_but_square_is_not(self, wedge_fullshift):
        assert DiagnosticsService.transitivity_test(wedge_fullshift, 1, 32).verdict == Verdict.HOLDS

        result = DiagnosticsService.total_transitivity_test(wedge_fullshift, 2, 1, 32)

        assert result.verdict == Verdict.FAILS
        assert result.params["k"] == 2

    def test_full_shift_totally_transitive(self, full_shift):
        assert DiagnosticsService.total_transitivity_test(full_shift, 3, 2, 32).verdict == Verdict.HOLDS

    def test_pair_cap(self, full_shift, capped_settings):
        with capped_settings(max_pairs=15):
            with pytest.raises(BudgetExceeded):
                DiagnosticsService.transitivity_test(full_shift, 2, 8)


class TestSensitivity:
    def test_sensitivity_constant(self, full_shift, golden_rotation):
        assert DiagnosticsService.sensitivity_constant(full_shift, 2, 8) == 1.0
        assert DiagnosticsService.sensitivity_constant(golden_rotation, 2, 8) == 0.0

    def test_multi_sensitivity(self, full_shift, golden_rotation):
        assert DiagnosticsService.multi_sensitivity_test(full_shift, 2, 2, 0.5, 8).verdict == Verdict.HOLDS
        assert DiagnosticsService.multi_sensitivity_test(golden_rotation, 2, 2, 0.2, 8).verdict == Verdict.HOLDS

    def test_multi_sensitivity_fails_on_isometry(self, golden_rotation):
        result = DiagnosticsService.multi_sensitivity_test(golden_rotation, 2, 2, 0.3, 8)

        assert result.verdict == Verdict.FAILS
        assert len(result.witness["cells"]) == 2
        assert result.params["tuples"] == 10

    def test_multi_sensitivity_tuple_cap(self, full_shift, capped_settings):
        with capped_settings(max_tuples=2):
            with pytest.raises(BudgetExceeded):
                DiagnosticsService.multi_sensitivity_test(full_shift, 2, 2, 0.5, 8)

    def test_thick_sensitivity_profile(self, full_shift):
        profile = DiagnosticsService.thick_sensitivity_profile(full_shift, 2, 0.5, 10)

        assert [row.max_run for row in profile.rows] == [9, 9, 9, 9]
        assert profile.min_run == 9

    def test_hierarchy_full_shift(self, full_shift):
        result = DiagnosticsService.sensitivity_hierarchy(full_shift, 1, 0.5, 16)

        assert set(result.levels) == {"sensitive", "syndetic", "thickly_syndetic", "thick", "cofinite"}
        assert all(level == Verdict.HOLDS for level in result.levels.values())

    def test_hierarchy_rotation(self, golden_rotation):
        result = DiagnosticsService.sensitivity_hierarchy(golden_rotation, 2, 0.3, 16)

        assert result.levels["sensitive"] == Verdict.FAILS
        assert result.witnesses["sensitive"] == BoxCell(resolution=2, corner=(0,))


class TestLyapunov:
    """Eight Lyapunov estimates on one discretization"""

    def test_full_shift(self, full_shift):
        report = DiagnosticsService.lyapunov_numbers(full_shift, 3, 16, burn_in=8, arity=3)

        assert report.threshold == 0.125
        assert report.estimates == {key: 1.0 for key in LYAPUNOV_KEYS}
        assert len(report.certified_relations) == 5
        assert report.params["sample_size"] == 8

    def test_rotation_nets_to_zero(self, golden_rotation):
        report = DiagnosticsService.lyapunov_numbers(golden_rotation, 3, 16, burn_in=8, arity=3)

        assert report.estimates == {key: 0.0 for key in LYAPUNOV_KEYS}
        assert report.raw["L_d"] == 0.125

    def test_default_burn_in(self, full_shift):
        report = DiagnosticsService.lyapunov_numbers(full_shift, 2, 20)

        assert report.params["burn_in"] == 10

    def test_sample_must_cover_cells(self, full_shift, zero_point):
        with pytest.raises(SampleTooSmall):
            DiagnosticsService.lyapunov_numbers(full_shift, 1, 8, sample=[zero_point])

    @pytest.mark.parametrize("kwargs", [{"burn_in": 9}, {"arity": 1}])
    def test_bad_parameters(self, full_shift, kwargs):
        with pytest.raises(ConfigurationError):
            DiagnosticsService.lyapunov_numbers(full_shift, 1, 8, **kwargs)

    def test_sweep_sorted_by_horizon(self, full_shift):
        sweep = DiagnosticsService.lyapunov_sweep(full_shift, 2, [16, 8])

        assert [row.horizon for row in sweep.rows] == [8, 16]
        assert [row.burn_in for row in sweep.rows] == [4, 8]


class TestCandidateFactory:
    def test_grid_candidates_skip_the_point(self, golden_rotation):
        factory = CandidateFactory(golden_rotation, ORIGIN, 1, 8, 0)

        candidates = list(factory.for_cell(BoxCell(resolution=1, corner=(0,))))

        assert [tag for tag, _ in candidates] == ["grid"] * 3
        assert ORIGIN not in [y for _, y in candidates]

    def test_symbolic_candidates_live_in_cell(self, full_shift, zero_point):
        factory = CandidateFactory(full_shift, zero_point, 2, 16, 3)

        candidates = list(factory.for_cell(WordCell(word="01")))

        assert candidates
        assert all(y != zero_point for _, y in candidates)
        assert candidates[0][0] == "tail_graft"
        assert all(SystemService.window(y, 0, 2) == "01" for _, y in candidates)


class TestPointSearches:
    """Li-Yorke, proximal and syndetic equicontinuity searches"""

    @pytest.mark.slow
    def test_li_yorke_full_shift(self, full_shift, zero_point):
        found = DiagnosticsService.li_yorke_search(full_shift, zero_point, 4, 0.4, 300)

        assert found is not None
        assert found.candidate == "doubling_gap"
        assert found.n_max == 256
        assert found.min_distance == 2.0**-11
        assert found.max_distance > 0.4

    def test_li_yorke_lambda_squares(self, lambda_squares, zero_point):
        """Isolated 1s are placed only where every difference stays in P"""
        # Act
        found = DiagnosticsService.li_yorke_search(lambda_squares, zero_point, 3, 0.4, 800)

        # Assert
        assert found is not None
        assert found.candidate == "doubling_gap"
        assert [i for i, a in enumerate(found.point.preperiod) if a == "1"] == [3, 8, 20, 58, 130, 421]
        assert found.n_min == 400
        assert found.min_distance == 2.0**-11
        assert found.n_max == 421
        assert found.max_distance == 1.0

    def test_li_yorke_drops_witness_that_fails_rescan(self, golden_rotation, mocker):
        # Arrange
        forged = LiYorkeWitness(
            point=TorusPoint(coords=(Fraction(1, 4),)),
            candidate="grid",
            min_distance=0.0,
            max_distance=0.5,
            n_min=40,
            n_max=50,
        )
        mocker.patch.object(DiagnosticsService, "_li_yorke_check", return_value=forged)

        # Act
        found = DiagnosticsService.li_yorke_search(golden_rotation, ORIGIN, 2, 0.2, 64)

        # Assert
        assert found is None

    def test_confirm_witness_steps_both_orbits(self, full_shift, zero_point):
        y = EventuallyPeriodic(preperiod="000001", period="0")
        good = LiYorkeWitness(point=y, candidate="tail_graft", min_distance=0.0, max_distance=1.0, n_min=6, n_max=5)
        eps, delta = Fraction(1, 2**10), Fraction(2, 5)

        assert DiagnosticsService._confirm_witness(full_shift, zero_point, good, delta, eps, 0, 10)
        assert not DiagnosticsService._confirm_witness(full_shift, zero_point, good.model_copy(update={"n_max": 0}), delta, eps, 0, 10)
        assert not DiagnosticsService._confirm_witness(full_shift, zero_point, good, delta, eps, 7, 10)

    def test_distance_at_bounds_undecided_prefixes(self, full_shift):
        x = PrefixStream(source=WordSource(symbols="0" * 20))
        y = PrefixStream(source=WordSource(symbols="0" * 21))

        assert DiagnosticsService._distance_at(full_shift, x, y, 0) == (Fraction(0), Fraction(1, 2**20))

    def test_li_yorke_none_on_rotation(self, golden_rotation):
        assert DiagnosticsService.li_yorke_search(golden_rotation, ORIGIN, 2, 0.2, 64) is None

    def test_li_yorke_evidence_on_rotation(self, golden_rotation):
        evidence = DiagnosticsService.li_yorke_sensitivity_evidence(golden_rotation, [ORIGIN, HALF], 2, 0.2, 32)

        assert evidence.fraction == 0.0
        assert evidence.witnesses == [None, None]

    def test_proximal_contraction(self, contraction):
        report = DiagnosticsService.proximal_partner_search(contraction, HALF, 1, horizon=64)

        assert report.fraction == 1.0
        assert all(row.candidate == "grid" for row in report.cells)

    def test_proximal_rotation(self, golden_rotation):
        report = DiagnosticsService.proximal_partner_search(golden_rotation, ORIGIN, 1, horizon=64)

        assert report.fraction == 0.0

    def test_syndetic_equicontinuity(self, golden_rotation, contraction, full_shift):
        assert DiagnosticsService.syndetic_equicontinuity(golden_rotation, ORIGIN, 0.3, 2, 20) == 1
        assert DiagnosticsService.syndetic_equicontinuity(contraction, HALF, 0.1, 1, 20) == 3
        assert DiagnosticsService.syndetic_equicontinuity(full_shift, EventuallyPeriodic(period="0"), 0.1, 2, 20) is None
