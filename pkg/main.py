import logging
import sys
from typing import Optional, Sequence

import click

from analytic.router import profile
from core.config import settings
from dynamics.router import verify
from normalization.router import norm, windows
from scan.router import scan


@click.group()
@click.option("--verbose", is_flag=True, help="Log at debug level.")
def cli(verbose: bool):
    """Massless spinor modes on a disc with an almost-S2 metric."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else settings.LOG_LEVEL,
        format=settings.LOG_FORMAT,
        force=True,
    )


# Include commands
cli.add_command(verify)
cli.add_command(profile)
cli.add_command(norm)
cli.add_command(windows)
cli.add_command(scan)


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and return its exit code instead of exiting."""
    try:
        result = cli.main(args=list(argv) if argv is not None else None, prog_name="spinor-disc", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(cli_main())
