"""
Unit tests for Construction Service
"""

import pytest

from hitlab.schemas.construction import AllP, ExplicitP, PowerBlocksP, ResiduesP, SquaresP
from hitlab.schemas.system import DiffSetSubshift, NewpropSource, PrefixStream, SparseOnesSource
from hitlab.schemas.window import Verdict
from hitlab.services.construction_service import ConstructionService, GapForm, p_contains
from hitlab.utils.exceptions import ConfigurationError, InadmissibleCell, PrefixLimit, UnknownFixture

TEN_23 = 10**23


class TestDifferenceSets:
    """Membership in the supported difference sets"""

    def test_squares_blocks(self):
        window = ConstructionService.p_window(SquaresP(), 20)

        assert window.members == (2, 5, 6, 10, 11, 12, 17, 18, 19, 20)

    def test_power_blocks_base_10(self):
        window = ConstructionService.p_window(PowerBlocksP(base=10), 110)

        assert window.members == (11, 101, 102)

    def test_power_blocks_base_2(self):
        window = ConstructionService.p_window(PowerBlocksP(base=2), 20)

        assert window.members == (3, 5, 6, 9, 10, 11, 17, 18, 19, 20)

    def test_residues(self):
        p = ResiduesP(modulus=3, residues=(1,))

        assert p_contains(p, 4)
        assert not p_contains(p, 3)

    @pytest.mark.parametrize("p", [AllP(), SquaresP(), ExplicitP(members=(1, 2))])
    def test_nonpositive_never_members(self, p):
        assert not p_contains(p, 0)
        assert not p_contains(p, -2)

    def test_explicit_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            ExplicitP(members=(0, 3))

    def test_lambda_p(self):
        system = ConstructionService.lambda_p(SquaresP(), max_horizon=500)

        assert isinstance(system, DiffSetSubshift)
        assert system.max_horizon == 500


class TestGapForm:
    def test_arithmetic(self):
        form = GapForm(3, {1: 2}) - GapForm(1, {1: 2, 2: 1})

        assert form.const == 2
        assert form.coeffs == {2: -1}
        assert form.leading == 2
        assert str(form) == "-1*a_2 + 2"

    def test_constant_form(self):
        assert str(GapForm(5)) == "5"
        assert GapForm(5).leading == 0


class TestNewpropBundle:
    """Closed-form bookkeeping of the constructed point"""

    def test_default_marker_length(self):
        assert ConstructionService.default_marker_length(10) == 12
        assert ConstructionService.default_marker_length(2) == 12

    def test_bundle(self):
        bundle = ConstructionService.newprop_bundle(10)

        assert bundle.b0 == 11
        assert bundle.marker == "100000000001"

    def test_inadmissible_marker(self):
        with pytest.raises(InadmissibleCell):
            ConstructionService.newprop_bundle(10, marker_length=5)

    def test_first_visit_and_interval(self):
        # Arrange
        bundle = ConstructionService.newprop_bundle(10)

        # Act
        gap = ConstructionService.gap(bundle, 1)
        visit = ConstructionService.visit_time(bundle, 1)
        interval = ConstructionService.interval(bundle, 23)

        # Assert
        assert gap == TEN_23
        assert visit == TEN_23 + 12
        assert interval == (TEN_23 + 11, TEN_23 + 11)
        assert not interval[0] <= visit <= interval[1]

    def test_boundary(self):
        bundle = ConstructionService.newprop_bundle(10)

        assert ConstructionService.boundary(bundle, 1) == 11 + TEN_23 + 12


class TestVerifyNewprop:
    """Arithmetic check that no visit time lands in an interval"""

    def test_holds(self):
        result = ConstructionService.verify_newprop(10, 5)

        assert result.verdict == Verdict.HOLDS
        assert result.witness.first_failure is None
        assert [e.n for e in result.witness.entries] == [1, 2, 3, 4, 5]
        assert not any(e.inside for e in result.witness.entries)

    def test_exact_then_dominance_certificates(self):
        entries = ConstructionService.verify_newprop(10, 3).witness.entries

        assert entries[0].certificate == "exact"
        assert entries[0].visit == str(TEN_23 + 12)
        assert entries[2].certificate == "dominance"

    def test_shifted_control_fails(self):
        result = ConstructionService.verify_newprop(10, 5, visit_shift=-11)

        assert result.verdict == Verdict.FAILS
        assert result.witness.first_failure == 2

    def test_shift_below_block_rejected(self):
        with pytest.raises(ConfigurationError):
            ConstructionService.verify_newprop(10, 2, visit_shift=-13)

    def test_base_two(self):
        assert ConstructionService.verify_newprop(2, 4).verdict == Verdict.HOLDS


class TestPrefixes:
    def test_feasible_length(self):
        bundle = ConstructionService.newprop_bundle(2)

        assert ConstructionService.feasible_length(bundle) == 2**23 + 24

    def test_materialize_prefix(self):
        bundle = ConstructionService.newprop_bundle(2)

        prefix = ConstructionService.materialize_prefix(bundle, 2**23 + 24)

        assert isinstance(prefix.source, SparseOnesSource)
        assert prefix.source.ones == (0, 11, 8388620, 8388631)

    def test_short_prefix_holds_first_marker(self):
        bundle = ConstructionService.newprop_bundle(10)

        prefix = ConstructionService.materialize_prefix(bundle, 1000)

        assert prefix.source.ones == (0, 11)

    def test_prefix_limit(self, capped_settings):
        bundle = ConstructionService.newprop_bundle(10)

        with capped_settings(prefix_limit=100):
            with pytest.raises(PrefixLimit):
                ConstructionService.materialize_prefix(bundle, 101)

    def test_newprop_point(self):
        point = ConstructionService.newprop_point(10, length=64)

        assert isinstance(point, PrefixStream)
        assert point.source == NewpropSource(base=10, marker_length=12, length=64)


class TestFixtures:
    def test_listing(self):
        names = [name for name, _ in ConstructionService.list_fixtures()]

        assert {"full-2-shift", "golden-rotation", "newprop-10", "wedge-fullshift", "split-sft"} <= set(names)

    def test_every_fixture_builds(self):
        for name, description in ConstructionService.list_fixtures():
            fixture = ConstructionService.standard_fixture(name)

            assert fixture.name == name
            assert fixture.description == description

    def test_unknown_fixture(self):
        with pytest.raises(UnknownFixture) as exc:
            ConstructionService.standard_fixture("no-such-system")

        assert "full-2-shift" in exc.value.details["known"]
