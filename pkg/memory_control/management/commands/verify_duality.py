from memory_control.services.controllability import duality_residual
from memory_control.services.forward import ControlField
from memory_control.services.fracops import refinement_order
from memory_control.storage import write_table

from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Checks the memory-state duality pairing along the refinement ladder"

    default_output = "verify_duality.csv"

    def run_experiment(self, options):
        config = self.load_config(options)
        order = config.build_order()
        basis = config.build_basis()
        control = config.build_control()
        if control is None:
            shape = (config.control.cells, config.control.space_functions)
            control = ControlField.uniform(
                config.build_omega(), config.grid.horizon, config.rng(5).standard_normal(shape)
            )
        v0 = config.build_field("v0", basis)
        v1 = config.build_field("v1", basis)

        ladder = config.grid.refinement or [config.grid.steps]
        residuals = []
        for steps in ladder:
            residual = duality_residual(
                order,
                basis,
                config.build_grid(steps),
                control,
                v0,
                v1,
                gauss_points=config.run.gauss_points,
                omega_points=config.run.omega_points,
            )
            self.stdout.write(f"steps={steps} residual={residual:.6e}")
            residuals.append(residual)

        path = write_table(
            self.output_path(options, config), ["steps", "residual"], zip(ladder, residuals)
        )
        rates = refinement_order(residuals, ladder) if len(ladder) > 1 else []
        rate_text = ", ".join(f"{rate:.2f}" for rate in rates) or "n/a"
        self.summary(
            f"verify-duality: finest residual {residuals[-1]:.3e}, observed orders "
            f"[{rate_text}] -> {path}"
        )
