"""
`hitlab run CONFIG`: execute one experiment and persist its report.
"""

from pathlib import Path
from typing import Optional

import click

from ..services.experiment_service import ExperimentService


@click.command("run")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "-o",
    "--output-dir",
    type=click.Path(file_okay=False),
    default=None,
    help="Directory for report.json and series CSVs (overrides output_dir in the config).",
)
def run(config: str, output_dir: Optional[str]) -> int:
    """Run the experiment described by the TOML file CONFIG.

    Exit code 0 on holds-at-horizon or a computed result, 1 on fails-at-horizon,
    2 on inconclusive, 3 on usage or configuration errors.
    """
    report = ExperimentService.run_file(Path(config), Path(output_dir) if output_dir else None)
    outcome = report.verdict.value if report.verdict is not None else "computed"
    click.echo(f"{report.operation}: {outcome}")
    for name in sorted(report.series):
        click.echo(f"  series {name}")
    return report.exit_code
