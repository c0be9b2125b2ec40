import numpy as np

from memory_control.services.forward import (
    ForwardProblem,
    memory_state,
    solve_forward,
    solve_forward_alt,
)
from memory_control.storage import write_table

from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Solves the forward problem and writes mode traces plus the memory state"

    default_output = "solve_forward.csv"

    def add_command_arguments(self, parser):
        parser.add_argument(
            "--representation",
            choices=["weak", "operators"],
            default="weak",
            help="Closed-form weak solution or the solution-operator form (needs f = 0)",
        )

    def run_experiment(self, options):
        config = self.load_config(options)
        basis = config.build_basis()
        problem = ForwardProblem(
            order=config.build_order(),
            basis=basis,
            grid=config.build_grid(),
            u0=config.build_field("u0", basis),
            u1=config.build_field("u1", basis),
            control=config.build_control(),
            gamma_choice=config.gamma_choice,
            omega_points=config.run.omega_points,
        )
        if options["representation"] == "operators":
            solution = solve_forward_alt(problem)
        else:
            solution = solve_forward(problem)
        state = memory_state(problem, solution)

        nodes = problem.grid.nodes
        rows = [
            (float(nodes[j]), n + 1, float(solution.coefficients[n, j]), bool(solution.singular[j]))
            for n in range(basis.size)
            for j in range(nodes.size)
        ]
        path = self.output_path(options, config)
        path = write_table(path, ["t", "mode", "value", "singular"], rows)
        memory_path = write_table(
            path.with_name(f"{path.stem}_memory.csv"),
            ["mode", "mem", "mem_rate"],
            [
                (n + 1, float(state.mem.coefficients[n]), float(state.mem_rate.coefficients[n]))
                for n in range(basis.size)
            ],
        )
        norms = solution.v_gamma_norms(problem.gamma)
        peak = float(np.nanmax(norms)) if np.any(np.isfinite(norms)) else float("nan")
        self.summary(
            f"solve-forward: {basis.size} modes x {nodes.size} nodes, "
            f"max V_gamma norm {peak:.6e} -> {path}, {memory_path.name}"
        )
