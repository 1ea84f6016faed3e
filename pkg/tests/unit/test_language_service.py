"""
Unit tests for Language Service
"""

import pytest

from hitlab.schemas.system import SFT, FullShift, Rotation
from hitlab.services.language_service import DiffSetLanguage, FullShiftLanguage, LanguageService, SFTLanguage
from hitlab.utils.exceptions import NotASubshift


@pytest.fixture
def golden_mean() -> SFTLanguage:
    return SFTLanguage("01", ("11",))


class TestFullShiftLanguage:
    def test_words_and_patterns(self):
        lang = FullShiftLanguage("012")

        assert len(lang.words(2)) == 9
        assert lang.count_patterns([0, 2, 2, 5]) == 27

    def test_free_positions_start_after_the_word(self):
        assert FullShiftLanguage("01").free_positions("01", 4) == [False, False, True, True]

    def test_foreign_symbols_inadmissible(self):
        assert not FullShiftLanguage("01").admissible("012")


class TestSFTLanguage:
    """Transfer-graph language"""

    def test_words(self, golden_mean):
        assert golden_mean.words(2) == ["00", "01", "10"]

    def test_extension_is_eventually_periodic(self, golden_mean):
        assert golden_mean.extension("1") == ("10", "0")

    def test_join_gaps(self, golden_mean):
        assert not golden_mean.joinable("1", 0, "1")
        assert golden_mean.joinable("1", 1, "1")

    def test_free_positions(self, golden_mean):
        assert golden_mean.free_positions("1", 3) == [False, False, True]

    def test_count_patterns(self, golden_mean):
        assert golden_mean.count_patterns([0, 1]) == 3
        assert golden_mean.count_patterns([0, 2]) == 4
        assert golden_mean.count_patterns([]) == 1

    def test_dead_end_states_pruned(self):
        # Arrange: after a 1 nothing can follow
        lang = SFTLanguage("01", ("10", "11"))

        # Act / Assert
        assert not lang.admissible("1")
        assert lang.words(2) == ["00"]
        assert lang.extension("0") == ("0", "0")

    def test_split_sft_is_frozen(self):
        lang = SFTLanguage("01", ("01", "10"))

        assert lang.words(3) == ["000", "111"]
        assert lang.count_patterns([0, 5]) == 2
        assert lang.free_positions("0", 4) == [False] * 4


class TestDiffSetLanguage:
    """Lambda_P for P the union of [m^2 + 1, m^2 + m]"""

    @pytest.fixture
    def lang(self, lambda_squares) -> DiffSetLanguage:
        return LanguageService.for_system(lambda_squares)

    @pytest.mark.parametrize(
        "word, expected",
        [("101", True), ("11", False), ("100001", True), ("1001", False), ("0000", True)],
    )
    def test_admissible(self, lang, word, expected):
        assert lang.admissible(word) is expected

    def test_join_gaps(self, lang):
        assert lang.join_gaps("1", "1", 4) == [False, True, False, False, True]

    def test_free_positions(self, lang):
        assert lang.free_positions("1", 7) == [False, False, True, False, False, True, True]

    def test_count_patterns(self, lang):
        # {}, {0}, {1}, {2}, {0, 2}
        assert lang.count_patterns([0, 1, 2]) == 5

    def test_zero_fill_extension(self, lang):
        assert lang.extension("101") == ("101", "0")


class TestLanguageService:
    def test_dispatch(self, full_shift, lambda_squares):
        assert isinstance(LanguageService.for_system(full_shift), FullShiftLanguage)
        assert isinstance(LanguageService.for_system(SFT(alphabet_size=2, forbidden=("11",))), SFTLanguage)
        assert isinstance(LanguageService.for_system(lambda_squares), DiffSetLanguage)

    def test_cached_per_system(self):
        assert LanguageService.for_system(FullShift(alphabet_size=2)) is LanguageService.for_system(
            FullShift(alphabet_size=2)
        )

    def test_metric_systems_have_no_language(self):
        with pytest.raises(NotASubshift):
            LanguageService.for_system(Rotation())
