import numpy as np

from memory_control.services.fracops import (
    GridFunction,
    TimeGrid,
    convolution_commute_residual,
    ibp_residual,
    ipf_residual,
    power_law_residual,
    refinement_order,
    semigroup_residual,
)
from memory_control.storage import write_table

from ._base import ExperimentCommand

DEFAULT_LADDER = [64, 128, 256, 512]


def identity_suite(order, grid: TimeGrid):
    """Residual of every fractional-calculus identity on one uniform grid."""
    horizon = grid.horizon
    t = GridFunction.from_callable(grid, lambda s: s)
    one = GridFunction.from_callable(grid, lambda s: 1.0 + 0.0 * s)
    u = GridFunction.from_callable(grid, lambda s: s**2 + s**3)
    v = GridFunction.from_callable(grid, lambda s: (horizon - s) ** 2)
    w = GridFunction.from_callable(grid, lambda s: (horizon - s) ** 2 * (1.0 + np.cos(s)))
    return {
        "power_law": power_law_residual(0.5, 1.0, grid),
        "semigroup": semigroup_residual(0.3, 0.4, t),
        "convolution": convolution_commute_residual(0.5, t, one),
        "integration_by_parts": ipf_residual(0.5, t, v),
        "hilfer_ibp": ibp_residual(order, u, w),
    }


class Command(ExperimentCommand):
    help = "Runs the fractional-calculus residual suite on uniform grids"

    default_output = "verify_identities.csv"

    def run_experiment(self, options):
        config = self.load_config(options)
        order = config.build_order()
        ladder = config.grid.refinement or DEFAULT_LADDER

        table = {}
        for steps in ladder:
            for name, residual in identity_suite(
                order, TimeGrid.uniform(config.grid.horizon, steps)
            ).items():
                table.setdefault(name, []).append(residual)

        rows = [
            (name, steps, residual)
            for name, residuals in table.items()
            for steps, residual in zip(ladder, residuals)
        ]
        path = write_table(
            self.output_path(options, config), ["identity", "steps", "residual"], rows
        )
        for name, residuals in table.items():
            rates = refinement_order(residuals, ladder)
            rate_text = ", ".join(f"{rate:.2f}" for rate in rates) or "n/a"
            self.stdout.write(f"{name}: finest {residuals[-1]:.3e}, orders [{rate_text}]")
        self.summary(f"verify-identities: {len(table)} identities x {len(ladder)} grids -> {path}")
