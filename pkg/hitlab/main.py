"""
hitlab command-line entry point.

Commands are assembled onto one group; every failure a user can cause (bad
arguments, bad config, unknown fixture, exhausted caps) exits with code 3.
"""

import sys
from typing import Optional

import click

from . import __version__
from .commands import fixtures, plot, run
from .utils.exceptions import HitlabError
from .utils.logger import configure_logging, logger

USAGE_ERROR = 3


class HitlabGroup(click.Group):
    """Click group whose commands return the process exit code"""

    def main(self, *args, **kwargs):
        kwargs["standalone_mode"] = False
        try:
            rv = super().main(*args, **kwargs)
        except click.exceptions.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(USAGE_ERROR)
        except click.ClickException as e:
            e.show()
            sys.exit(USAGE_ERROR)
        except HitlabError as e:
            logger.debug(f"{e.error_code}: {e.details}")
            click.echo(f"Error [{e.error_code}]: {e.message}", err=True)
            if e.details:
                click.echo(f"  details: {e.details}", err=True)
            sys.exit(USAGE_ERROR)
        sys.exit(rv if isinstance(rv, int) else 0)


@click.group(cls=HitlabGroup)
@click.version_option(__version__, prog_name="hitlab")
@click.option(
    "--log-level",
    type=click.Choice(["TRACE", "DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default=None,
    help="Console log level (logs go to stderr).",
)
def cli(log_level: Optional[str]) -> None:
    """Finite-horizon experiments on hitting times, sensitivity and sequence entropy."""
    if log_level:
        configure_logging(log_level.upper())


cli.add_command(run.run)
cli.add_command(fixtures.fixtures)
cli.add_command(plot.plot)


if __name__ == "__main__":
    cli(prog_name="hitlab")
