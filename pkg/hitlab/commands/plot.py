"""
`hitlab plot REPORT SERIES`: two-column plot data from a stored report.
"""

from pathlib import Path
from typing import Optional

import click

from ..services.experiment_service import ExperimentService


@click.command("plot")
@click.argument("report", type=click.Path(exists=True, dir_okay=False))
@click.argument("series")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the CSV here instead of stdout.")
def plot(report: str, series: str, out: Optional[str]) -> int:
    """Emit SERIES of REPORT as CSV."""
    text = ExperimentService.emit_plot_data(Path(report), series)
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)
    return 0
