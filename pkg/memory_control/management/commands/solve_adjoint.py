from memory_control.services.adjoint import (
    AdjointProblem,
    adjoint_final_conditions,
    restrict_to_omega,
    solve_adjoint,
)
from memory_control.storage import write_table

from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Solves the backward adjoint problem and writes mode traces and omega samples"

    default_output = "solve_adjoint.csv"

    def run_experiment(self, options):
        config = self.load_config(options)
        basis = config.build_basis()
        problem = AdjointProblem(
            order=config.build_order(),
            basis=basis,
            grid=config.build_grid(),
            v0=config.build_field("v0", basis),
            v1=config.build_field("v1", basis),
            gamma_choice=config.gamma_choice,
        )
        solution = solve_adjoint(problem)
        smoothed, rate = adjoint_final_conditions(problem, solution)

        nodes = problem.grid.nodes
        rows = [
            (
                float(nodes[j]),
                n + 1,
                float(solution.coefficients[n, j]),
                float(smoothed.coefficients[n, j]),
                float(rate.coefficients[n, j]),
                bool(solution.singular[j]),
            )
            for n in range(basis.size)
            for j in range(nodes.size)
        ]
        path = write_table(
            self.output_path(options, config),
            ["t", "mode", "value", "smoothed", "rate", "singular"],
            rows,
        )

        omega_grid = config.build_omega().quadrature(config.run.omega_points)
        samples = restrict_to_omega(solution, omega_grid)
        omega_path = write_table(
            path.with_name(f"{path.stem}_omega.csv"),
            ["x", "t", "value"],
            [
                (float(x), float(nodes[j]), float(samples[p, j]))
                for p, x in enumerate(omega_grid.nodes)
                for j in range(nodes.size)
            ],
        )
        self.summary(
            f"solve-adjoint: {basis.size} modes x {nodes.size} nodes, "
            f"endpoint singular={problem.endpoint_singular} -> {path}, {omega_path.name}"
        )
