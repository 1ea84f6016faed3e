"""
Experiment Service Module

Loads an experiment config, resolves the system, dispatches the named operation under
the config's caps, and persists the run report and its plot series.
"""

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Type

from pydantic import BaseModel, ValidationError

from .. import __version__
from ..config.settings import get_settings, use_settings
from ..schemas.diagnostics import (
    LYAPUNOV_KEYS,
    DiagnosticVerdict,
    LyapunovSweep,
    ThickSensitivityProfile,
)
from ..schemas.entropy import EntropyEstimate, SepProfile
from ..schemas.experiment import (
    DepthHorizonParams,
    EntropyParams,
    EquicontinuityParams,
    ExperimentConfig,
    FamilyTransitivityParams,
    HittingParams,
    LiYorkeEvidenceParams,
    LyapunovParams,
    LyapunovSweepParams,
    MultiSensitivityParams,
    NewpropParams,
    OmegaParams,
    PointSearchParams,
    ProximalParams,
    RunReport,
    SampleParams,
    SensitivityParams,
    SensitivitySetParams,
    SepProfileParams,
    Series,
    TotalTransitivityParams,
    VisitParams,
)
from ..schemas.system import PointSpec, SystemSpec
from ..schemas.window import Verdict
from ..utils.exceptions import ConfigurationError, MissingSeries
from ..utils.logger import logger
from ..utils.serialization import dump_json, load_toml, rows_to_csv
from .construction_service import ConstructionService
from .diagnostics_service import DiagnosticsService
from .entropy_service import EntropyService
from .family_service import FamilyService
from .hitting_service import HittingService
from .system_service import SystemService

REPORT_FILE = "report.json"


@dataclass
class RunContext:
    """What an operation runner sees: the resolved system and its distinguished point"""

    system: Optional[SystemSpec]
    point: Optional[PointSpec]

    def require_system(self) -> SystemSpec:
        if self.system is None:
            raise ConfigurationError("This operation needs a [system] table", missing_vars=["system"])
        return self.system

    def point_for(self, explicit: Optional[PointSpec]) -> PointSpec:
        system = self.require_system()
        if explicit is not None:
            return SystemService.validate_point(system, explicit)
        if self.point is not None:
            return self.point
        return SystemService.canonical_point(system, SystemService.cell_family(system, 1)[0])

    def sample_for(self, explicit: Optional[List[PointSpec]], depth: int) -> List[PointSpec]:
        system = self.require_system()
        if explicit is not None:
            return [SystemService.validate_point(system, x) for x in explicit]
        return [SystemService.canonical_point(system, cell) for cell in SystemService.cell_family(system, depth)]


@dataclass(frozen=True)
class Operation:
    params: Type[BaseModel]
    runner: Callable[[RunContext, Any], Any]
    needs_system: bool = True


# ---------------------------------------------------------------------------
# Operation table
# ---------------------------------------------------------------------------


def _depth_horizon(method: Callable) -> Callable[[RunContext, DepthHorizonParams], Any]:
    return lambda ctx, p: method(ctx.require_system(), p.depth, p.horizon)


def _delta_op(method: Callable) -> Callable[[RunContext, SensitivityParams], Any]:
    return lambda ctx, p: method(ctx.require_system(), p.depth, p.delta, p.horizon)


OPERATIONS: Dict[str, Operation] = {
    # diagnostics
    "transitivity_test": Operation(DepthHorizonParams, _depth_horizon(DiagnosticsService.transitivity_test)),
    "weak_mixing_test": Operation(DepthHorizonParams, _depth_horizon(DiagnosticsService.weak_mixing_test)),
    "mixing_test": Operation(DepthHorizonParams, _depth_horizon(DiagnosticsService.mixing_test)),
    "sensitivity_constant": Operation(DepthHorizonParams, _depth_horizon(DiagnosticsService.sensitivity_constant)),
    "total_transitivity_test": Operation(
        TotalTransitivityParams,
        lambda ctx, p: DiagnosticsService.total_transitivity_test(ctx.require_system(), p.k, p.depth, p.horizon),
    ),
    "family_transitivity": Operation(
        FamilyTransitivityParams,
        lambda ctx, p: FamilyService.family_transitivity(ctx.require_system(), p.family, p.depth, p.horizon),
    ),
    "multi_sensitivity_test": Operation(
        MultiSensitivityParams,
        lambda ctx, p: DiagnosticsService.multi_sensitivity_test(ctx.require_system(), p.k, p.depth, p.delta, p.horizon),
    ),
    "thick_sensitivity_profile": Operation(SensitivityParams, _delta_op(DiagnosticsService.thick_sensitivity_profile)),
    "sensitivity_hierarchy": Operation(SensitivityParams, _delta_op(DiagnosticsService.sensitivity_hierarchy)),
    "lyapunov_numbers": Operation(
        LyapunovParams,
        lambda ctx, p: DiagnosticsService.lyapunov_numbers(
            ctx.require_system(), p.depth, p.horizon, p.burn_in, p.arity, p.sample
        ),
    ),
    "lyapunov_sweep": Operation(
        LyapunovSweepParams,
        lambda ctx, p: DiagnosticsService.lyapunov_sweep(ctx.require_system(), p.depth, p.horizons, p.arity, p.sample),
    ),
    "li_yorke_search": Operation(
        PointSearchParams,
        lambda ctx, p: DiagnosticsService.li_yorke_search(
            ctx.require_system(), ctx.point_for(p.point), p.depth, p.delta, p.horizon, p.burn_in
        ),
    ),
    "li_yorke_sensitivity_evidence": Operation(
        LiYorkeEvidenceParams,
        lambda ctx, p: DiagnosticsService.li_yorke_sensitivity_evidence(
            ctx.require_system(), ctx.sample_for(p.sample, p.depth), p.depth, p.delta, p.horizon, p.burn_in
        ),
    ),
    "proximal_partner_search": Operation(
        ProximalParams,
        lambda ctx, p: DiagnosticsService.proximal_partner_search(
            ctx.require_system(), ctx.point_for(p.point), p.depth, p.epsilon, p.horizon
        ),
    ),
    "syndetic_equicontinuity": Operation(
        EquicontinuityParams,
        lambda ctx, p: DiagnosticsService.syndetic_equicontinuity(
            ctx.require_system(), ctx.point_for(p.point), p.epsilon, p.depth, p.horizon
        ),
    ),
    # hitting
    "hitting_set": Operation(
        HittingParams, lambda ctx, p: HittingService.hitting_set(ctx.require_system(), p.u, p.v, p.horizon)
    ),
    "sensitivity_set": Operation(
        SensitivitySetParams,
        lambda ctx, p: HittingService.sensitivity_set(ctx.require_system(), p.u, p.delta, p.horizon),
    ),
    "visit_set": Operation(
        VisitParams,
        lambda ctx, p: HittingService.visit_set(ctx.require_system(), ctx.point_for(p.point), p.g, p.horizon),
    ),
    "omega_limit_approx": Operation(
        OmegaParams,
        lambda ctx, p: HittingService.omega_limit_approx(ctx.require_system(), ctx.point_for(p.point), p.depth, p.horizon),
    ),
    "omega_NT_approx": Operation(
        OmegaParams,
        lambda ctx, p: HittingService.omega_NT_approx(
            ctx.require_system(), ctx.point_for(p.point), p.depth, p.horizon, p.pair_budget
        ),
    ),
    "transitive_compact_evidence": Operation(
        SampleParams,
        lambda ctx, p: HittingService.transitive_compact_evidence(
            ctx.require_system(), ctx.sample_for(p.sample, p.depth), p.depth, p.horizon, p.pair_budget
        ),
    ),
    "invariance_evidence": Operation(
        OmegaParams,
        lambda ctx, p: HittingService.invariance_evidence(
            ctx.require_system(), ctx.point_for(p.point), p.depth, p.horizon, p.pair_budget
        ),
    ),
    # entropy
    "seq_entropy_estimate": Operation(
        EntropyParams,
        lambda ctx, p: EntropyService.seq_entropy_estimate(ctx.require_system(), p.sequence, p.epsilons, p.k_max),
    ),
    "sep_profile": Operation(
        SepProfileParams,
        lambda ctx, p: EntropyService.sep_profile(ctx.require_system(), p.sequence, p.epsilon, p.k_max),
    ),
    # constructions
    "verify_newprop": Operation(
        NewpropParams,
        lambda ctx, p: ConstructionService.verify_newprop(p.base, p.n_max, p.visit_shift),
        needs_system=False,
    ),
}


# ---------------------------------------------------------------------------
# Verdicts and series
# ---------------------------------------------------------------------------

# searches whose result is a witness or nothing
_SEARCHES = ("li_yorke_search", "syndetic_equicontinuity")


def classify(operation: str, result: Any) -> Optional[Verdict]:
    """Verdict carried by a result; None for computed values"""
    if isinstance(result, DiagnosticVerdict):
        return result.verdict
    if operation in _SEARCHES:
        return Verdict.HOLDS if result is not None else Verdict.INCONCLUSIVE
    return None


def _profile_series(profile: SepProfile) -> Dict[str, Series]:
    rows = EntropyService.profile_rows(profile)
    return {
        "sep": Series(columns=["k", "sep"], rows=[[k, c] for k, c, _ in rows]),
        "log_sep": Series(columns=["k", "log_sep"], rows=[[k, v] for k, _, v in rows]),
    }


def extract_series(result: Any) -> Dict[str, Series]:
    """Two-column plot series for the result types that have one"""
    if isinstance(result, SepProfile):
        return _profile_series(result)
    if isinstance(result, EntropyEstimate):
        series: Dict[str, Series] = {}
        for profile in result.profiles:
            for name, s in _profile_series(profile).items():
                series[f"{name}_eps{profile.epsilon:g}"] = s
        return series
    if isinstance(result, ThickSensitivityProfile):
        return {
            "max_run": Series(columns=["cell", "max_run"], rows=[[i, r.max_run] for i, r in enumerate(result.rows)])
        }
    if isinstance(result, LyapunovSweep):
        return {
            key: Series(columns=["H", key], rows=[[row.horizon, row.estimates[key]] for row in result.rows])
            for key in LYAPUNOV_KEYS
        }
    return {}


class ExperimentService:
    """
    Batch experiment runs.

    Provides:
    - config loading from TOML with strict validation
    - operation dispatch under per-run caps
    - report.json and series CSV persistence
    - plot-data extraction from a stored report
    """

    @staticmethod
    def operations() -> List[str]:
        return sorted(OPERATIONS)

    @staticmethod
    def load_config(path: Path) -> Tuple[ExperimentConfig, Dict[str, Any]]:
        """Parse a config file; returns the model and the raw table for the report echo"""
        try:
            raw = load_toml(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigurationError(f"Cannot read config {path}: {e}", missing_vars=[str(path)]) from e
        try:
            return ExperimentConfig.model_validate(raw), raw
        except ValidationError as e:
            invalid = {".".join(str(p) for p in err["loc"]) or "config": err["msg"] for err in e.errors()}
            raise ConfigurationError("Invalid experiment config", invalid_vars=invalid) from e

    @staticmethod
    def resolve_system(config: ExperimentConfig) -> RunContext:
        ref = config.system
        if ref is None:
            return RunContext(system=None, point=None)
        if ref.fixture is not None:
            fixture = ConstructionService.standard_fixture(ref.fixture)
            system, point = fixture.system, fixture.point
        else:
            system, point = ref.spec, None
        SystemService.validate_system(system)
        if point is not None:
            SystemService.validate_point(system, point)
        return RunContext(system=system, point=point)

    @staticmethod
    def run(config: ExperimentConfig, echo: Optional[Dict[str, Any]] = None) -> RunReport:
        """Run one experiment; exceptions propagate to the caller"""
        operation = OPERATIONS.get(config.operation)
        if operation is None:
            raise ConfigurationError(
                f"Unknown operation '{config.operation}'",
                invalid_vars={"operation": f"expected one of {', '.join(sorted(OPERATIONS))}"},
            )
        try:
            params = operation.params.model_validate(config.params)
        except ValidationError as e:
            invalid = {".".join(str(p) for p in err["loc"]) or "params": err["msg"] for err in e.errors()}
            raise ConfigurationError(f"Invalid params for {config.operation}", invalid_vars=invalid) from e

        settings = get_settings().with_overrides(config.caps)
        log = logger.bind(operation=config.operation)
        with use_settings(settings):
            context = ExperimentService.resolve_system(config)
            if operation.needs_system:
                context.require_system()
            log.info(f"Running {config.operation}")
            started = time.perf_counter()
            result = operation.runner(context, params)
            runtime_ms = (time.perf_counter() - started) * 1000

        verdict = classify(config.operation, result)
        exit_code = verdict.exit_code if verdict is not None else 0
        log.info(f"{config.operation} finished: {verdict.value if verdict else 'computed'} in {runtime_ms:.1f} ms")
        if verdict is Verdict.INCONCLUSIVE:
            log.warning(f"{config.operation} is inconclusive at the given horizon")
        return RunReport(
            config=echo if echo is not None else config.model_dump(mode="json"),
            operation=config.operation,
            result=result,
            verdict=verdict,
            exit_code=exit_code,
            runtime_ms=runtime_ms,
            tool_version=__version__,
            series=extract_series(result),
        )

    @staticmethod
    def write_report(report: RunReport, output_dir: Path) -> Path:
        """Write report.json and one <series>.csv per series; returns the report path"""
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / REPORT_FILE
        path.write_text(dump_json(report), encoding="utf-8", newline="\n")
        for name, series in report.series.items():
            (out / f"{name}.csv").write_text(rows_to_csv(series.columns, series.rows), encoding="utf-8", newline="\n")
        logger.debug(f"Report written to {path}")
        return path

    @staticmethod
    def run_file(path: Path, output_dir: Optional[Path] = None) -> RunReport:
        config, raw = ExperimentService.load_config(path)
        report = ExperimentService.run(config, raw)
        ExperimentService.write_report(report, output_dir or Path(config.output_dir))
        return report

    @staticmethod
    def emit_plot_data(report_path: Path, series: str) -> str:
        """Two-column CSV of a stored series

        Raises:
            MissingSeries: If the report has no series of that name
        """
        try:
            data = json.loads(Path(report_path).read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigurationError(f"Cannot read report {report_path}: {e}", missing_vars=[str(report_path)]) from e
        stored = data.get("series", {})
        if series not in stored:
            raise MissingSeries(f"Report has no series '{series}'", {"available": sorted(stored)})
        found = Series.model_validate(stored[series])
        return rows_to_csv(found.columns, found.rows)


__all__ = ["ExperimentService", "OPERATIONS", "Operation", "RunContext", "classify", "extract_series"]
