import numpy as np

from memory_control.exceptions import InvalidParameterError
from memory_control.services.mlf import default_tolerance, mittag_leffler
from memory_control.storage import write_table

from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Tabulates E_{alpha,beta}(z) on an evenly spaced real z grid"

    config_required = False
    default_output = "mlf_table.csv"

    def add_command_arguments(self, parser):
        parser.add_argument("--alpha", type=float, required=True, help="alpha in (0, 2]")
        parser.add_argument("--beta", type=float, required=True, help="beta > 0")
        parser.add_argument("--zmin", type=float, default=-10.0, help="Smallest argument")
        parser.add_argument("--zmax", type=float, default=0.0, help="Largest argument")
        parser.add_argument("--steps", type=int, default=100, help="Number of z intervals")
        parser.add_argument("--tol", type=float, help="Evaluation tolerance")

    def run_experiment(self, options):
        config = self.load_config(options) if options.get("config") else None
        if options["steps"] < 1:
            raise InvalidParameterError("steps", "must be at least 1")
        if not options["zmin"] <= options["zmax"]:
            raise InvalidParameterError("zmin", "must not exceed zmax")
        tol = options["tol"]
        if tol is None:
            tol = config.run.tol if config is not None else default_tolerance()

        z = np.linspace(options["zmin"], options["zmax"], options["steps"] + 1)
        values = mittag_leffler(options["alpha"], options["beta"], z, tol=tol)

        path = write_table(
            self.output_path(options, config), ["z", "value"], zip(z.tolist(), values.tolist())
        )
        self.summary(
            f"mlf-table: alpha={options['alpha']} beta={options['beta']} "
            f"{z.size} points -> {path}"
        )
