"""
`hitlab fixtures`: the standard fixture registry.
"""

import click

from ..services.construction_service import ConstructionService


@click.command("fixtures")
def fixtures() -> int:
    """List the built-in systems usable as `fixture = "<name>"` in a config."""
    rows = ConstructionService.list_fixtures()
    width = max(len(name) for name, _ in rows)
    click.echo(f"{'name'.ljust(width)}  description")
    for name, description in rows:
        click.echo(f"{name.ljust(width)}  {description}")
    return 0
