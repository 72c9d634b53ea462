import logging

import click

from config import settings
from utils.constants import ExitCode
from utils.exceptions import AnalysisError, ParamsError, ScenarioError

# Import commands
from commands import changepoints, classes, correlate, sweep, synth, validate

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]

logger = logging.getLogger(__name__)


class AnalysisGroup(click.Group):
    """Click group mapping failures to the documented exit codes"""

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as e:
            e.exit_code = ExitCode.USAGE
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = ExitCode.USAGE
            raise
        except (ParamsError, ScenarioError) as e:
            logger.error(e.detail)
            ctx.exit(ExitCode.USAGE)
        except AnalysisError as e:
            logger.error(e.detail)
            ctx.exit(ExitCode.DATA_ERROR)


@click.group(cls=AnalysisGroup)
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), default=settings.LOG_LEVEL,
              show_default=True, help="Logging verbosity")
def cli(log_level):
    """Correlate BGP routing changes with RTT variations"""
    # Configure logging
    logging.basicConfig(level=log_level.upper(), format=LOG_FORMAT, force=True)


# Register commands
cli.add_command(correlate.correlate)
cli.add_command(sweep.sweep)
cli.add_command(classes.classes)
cli.add_command(validate.validate)
cli.add_command(changepoints.changepoints)
cli.add_command(synth.synth)


if __name__ == "__main__":
    cli()
