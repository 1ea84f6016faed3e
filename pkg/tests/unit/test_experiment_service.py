"""
Unit tests for Experiment Service
"""

import json

import pytest

from hitlab.config.settings import get_settings
from hitlab.schemas.diagnostics import DiagnosticVerdict
from hitlab.schemas.entropy import EntropyEstimate, SepProfile
from hitlab.schemas.experiment import DepthHorizonParams, ExperimentConfig, PointSearchParams
from hitlab.schemas.window import Verdict
from hitlab.services.experiment_service import OPERATIONS, ExperimentService, Operation, classify, extract_series
from hitlab.utils.exceptions import BudgetExceeded, ConfigurationError, MissingSeries, UnknownFixture


def config(operation, fixture=None, params=None, caps=None, spec=None) -> ExperimentConfig:
    data = {"operation": operation, "params": params or {}, "caps": caps or {}}
    if fixture is not None:
        data["system"] = {"fixture": fixture}
    elif spec is not None:
        data["system"] = {"spec": spec}
    return ExperimentConfig.model_validate(data)


class TestClassify:
    def test_diagnostic_verdict(self):
        result = DiagnosticVerdict(property="mixing", verdict=Verdict.FAILS)

        assert classify("mixing_test", result) == Verdict.FAILS

    def test_searches(self):
        assert classify("li_yorke_search", None) == Verdict.INCONCLUSIVE
        assert classify("syndetic_equicontinuity", 3) == Verdict.HOLDS

    def test_computed_values(self):
        assert classify("sensitivity_constant", 1.0) is None


class TestExtractSeries:
    def test_sep_profile(self):
        profile = SepProfile(counts=[2, 4], epsilon=0.3, slope=0.69, method="exact")

        series = extract_series(profile)

        assert set(series) == {"sep", "log_sep"}
        assert series["sep"].columns == ["k", "sep"]
        assert series["sep"].rows == [[1, 2], [2, 4]]

    def test_estimate_names_series_by_epsilon(self):
        profile = SepProfile(counts=[2, 4], epsilon=0.3, slope=0.69, method="exact")
        estimate = EntropyEstimate(value=0.69, method="exact", k_max=2, profiles=[profile])

        assert set(extract_series(estimate)) == {"sep_eps0.3", "log_sep_eps0.3"}

    def test_no_series(self):
        assert extract_series(1.0) == {}


class TestRun:
    """Dispatch under per-run caps"""

    def test_full_shift_weak_mixing(self):
        report = ExperimentService.run(config("weak_mixing_test", "full-2-shift", {"depth": 2, "horizon": 32}))

        assert report.verdict == Verdict.HOLDS
        assert report.exit_code == 0
        assert report.tool_version == "0.1.0"
        assert report.config["operation"] == "weak_mixing_test"

    def test_rotation_not_weakly_mixing(self):
        report = ExperimentService.run(config("weak_mixing_test", "golden-rotation", {"depth": 3, "horizon": 64}))

        assert report.verdict == Verdict.FAILS
        assert report.exit_code == 1

    def test_computed_result_carries_series(self):
        report = ExperimentService.run(config("sep_profile", "full-2-shift", {"k_max": 4}))

        assert report.verdict is None
        assert report.exit_code == 0
        assert report.series["sep"].rows == [[1, 4], [2, 8], [3, 16], [4, 32]]

    def test_inline_spec(self):
        spec = {"kind": "sft", "alphabet_size": 2, "forbidden": ["01", "10"]}

        report = ExperimentService.run(config("transitivity_test", spec=spec, params={"depth": 1, "horizon": 16}))

        assert report.verdict == Verdict.FAILS

    def test_operation_without_system(self):
        report = ExperimentService.run(config("verify_newprop", params={"base": 10, "n_max": 3}))

        assert report.verdict == Verdict.HOLDS

    def test_missing_system(self):
        with pytest.raises(ConfigurationError) as exc:
            ExperimentService.run(config("mixing_test"))

        assert exc.value.missing_vars == ["system"]

    def test_unknown_operation(self):
        with pytest.raises(ConfigurationError) as exc:
            ExperimentService.run(config("entropy_of_everything", "full-2-shift"))

        assert "operation" in exc.value.invalid_vars

    @pytest.mark.parametrize("params", [{"depth": 0}, {"depth": 2, "horizn": 10}])
    def test_bad_params(self, params):
        with pytest.raises(ConfigurationError):
            ExperimentService.run(config("mixing_test", "full-2-shift", params))

    def test_unknown_fixture(self):
        with pytest.raises(UnknownFixture):
            ExperimentService.run(config("mixing_test", "full-4-shift"))

    def test_caps_apply_to_the_run_only(self):
        with pytest.raises(BudgetExceeded):
            ExperimentService.run(
                config("transitivity_test", "full-2-shift", {"depth": 2, "horizon": 8}, caps={"max_pairs": 15})
            )

        assert get_settings().max_pairs == 1_000_000

    def test_unknown_cap(self):
        with pytest.raises(ConfigurationError):
            ExperimentService.run(config("mixing_test", "full-2-shift", caps={"max_paris": 3}))

    def test_operations_listed(self):
        operations = ExperimentService.operations()

        assert operations == sorted(operations)
        assert {"hitting_set", "seq_entropy_estimate", "verify_newprop", "omega_NT_approx"} <= set(operations)


class TestConfigFiles:
    """Loading configs and persisting reports"""

    def test_load_config(self, tmp_path):
        path = tmp_path / "exp.toml"
        path.write_text('operation = "mixing_test"\n[system]\nfixture = "full-2-shift"\n[params]\ndepth = 1\n')

        parsed, raw = ExperimentService.load_config(path)

        assert parsed.system.fixture == "full-2-shift"
        assert raw["params"] == {"depth": 1}

    @pytest.mark.parametrize(
        "text",
        [
            'operation = "mixing_test"\n[system\n',
            'operation = "mixing_test"\ncolour = "blue"\n',
            'operation = "mixing_test"\n[system]\nfixture = "full-2-shift"\nspec = {kind = "full_shift", alphabet_size = 2}\n',
        ],
    )
    def test_invalid_configs(self, tmp_path, text):
        path = tmp_path / "exp.toml"
        path.write_text(text)

        with pytest.raises(ConfigurationError):
            ExperimentService.load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            ExperimentService.load_config(tmp_path / "absent.toml")

    def test_write_report_and_plot(self, tmp_path):
        # Arrange
        report = ExperimentService.run(config("sep_profile", "full-2-shift", {"k_max": 3}))

        # Act
        path = ExperimentService.write_report(report, tmp_path / "out")
        csv_text = ExperimentService.emit_plot_data(path, "sep")

        # Assert
        stored = json.loads(path.read_text())
        assert stored["operation"] == "sep_profile"
        assert stored["verdict"] is None
        assert stored["result"]["counts"] == [4, 8, 16]
        assert (tmp_path / "out" / "log_sep.csv").exists()
        assert csv_text == "k,sep\n1,4\n2,8\n3,16\n"

    def test_missing_series(self, tmp_path):
        report = ExperimentService.run(config("weak_mixing_test", "full-2-shift", {"depth": 1, "horizon": 8}))
        path = ExperimentService.write_report(report, tmp_path)

        with pytest.raises(MissingSeries) as exc:
            ExperimentService.emit_plot_data(path, "sep")

        assert exc.value.details == {"available": []}

    def test_run_file(self, tmp_path):
        path = tmp_path / "exp.toml"
        path.write_text('operation = "verify_newprop"\n[params]\nbase = 2\nn_max = 3\n')

        report = ExperimentService.run_file(path, tmp_path / "out")

        assert report.exit_code == 0
        assert (tmp_path / "out" / "report.json").exists()


class TestInconclusiveRuns:
    def test_inconclusive_exits_two(self, mocker):
        inconclusive = DiagnosticVerdict(property="mixing", verdict=Verdict.INCONCLUSIVE)
        mocker.patch.dict(OPERATIONS, {"mixing_test": Operation(DepthHorizonParams, lambda ctx, p: inconclusive)})

        report = ExperimentService.run(config("mixing_test", "full-2-shift"))

        assert report.verdict == Verdict.INCONCLUSIVE
        assert report.exit_code == 2

    def test_search_without_witness_is_inconclusive(self, mocker):
        mocker.patch.dict(OPERATIONS, {"li_yorke_search": Operation(PointSearchParams, lambda ctx, p: None)})

        report = ExperimentService.run(config("li_yorke_search", "golden-rotation"))

        assert report.exit_code == 2
