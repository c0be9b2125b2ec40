import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from pydantic import ValidationError

from memory_control.conf import numeric_default
from memory_control.exceptions import InvalidParameterError, NumericalError
from memory_control.schemas import ExperimentConfig

logger = logging.getLogger(__name__)

VALIDATION_EXIT = 2
NUMERICAL_EXIT = 3


def describe_validation_error(error: ValidationError) -> str:
    """One line per failing field, e.g. 'order.mu: Input should be greater than 1'."""
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "config"
        lines.append(f"{location}: {item['msg']}")
    return "; ".join(lines)


class ExperimentCommand(BaseCommand):
    """Base for the experiment commands: config loading, output paths, exit codes."""

    requires_system_checks = []
    config_required = True
    default_output = "table.csv"

    def add_arguments(self, parser):
        parser.add_argument(
            "--config", required=self.config_required, help="Experiment config (JSON)"
        )
        parser.add_argument("--out", help="Output CSV path")
        parser.add_argument("--threads", type=int, help="Worker threads for map assembly")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        try:
            self.run_experiment(options)
        except InvalidParameterError as e:
            logger.error(f"Validation failed: {str(e)}")
            raise CommandError(str(e), returncode=VALIDATION_EXIT) from e
        except NumericalError as e:
            logger.error(f"Numerical failure: {str(e)}")
            raise CommandError(str(e), returncode=NUMERICAL_EXIT) from e

    def run_experiment(self, options):
        raise NotImplementedError

    def load_config(self, options) -> ExperimentConfig:
        path = options.get("config")
        try:
            config = ExperimentConfig.load(path)
        except ValidationError as e:
            raise InvalidParameterError("config", describe_validation_error(e)) from e
        except OSError as e:
            raise InvalidParameterError("config", f"cannot read {path}: {e}") from e
        if options.get("threads") is not None:
            if options["threads"] < 1:
                raise InvalidParameterError("threads", "must be positive")
            config.run.threads = options["threads"]
        return config

    def output_path(self, options, config=None) -> Path:
        out = options.get("out") or (config.run.out if config is not None else None)
        if out:
            return Path(out)
        return Path(numeric_default("OUTPUT_DIR", "outputs")) / self.default_output

    def summary(self, message: str):
        self.stdout.write(self.style.SUCCESS(message))
