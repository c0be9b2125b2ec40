from dataclasses import replace

from memory_control.services.controllability import (
    assemble_observation_map,
    residue_diagnostic,
    ucp_diagnose,
)
from memory_control.storage import write_table

from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Estimates injectivity of the observation map by SVD over growing truncations"

    default_output = "ucp_svd.csv"

    def add_command_arguments(self, parser):
        parser.add_argument(
            "--residues",
            action="store_true",
            help="Also write the Laplace residue diagnostic for the configured (v0, v1)",
        )

    def run_experiment(self, options):
        config = self.load_config(options)
        full = config.build_basis()
        base = config.build_template(full)

        rows = []
        for modes in range(1, full.size + 1):
            template = replace(
                base,
                basis=full.restrict(modes),
                space_functions=min(base.space_functions, modes),
            )
            diagnosis = ucp_diagnose(assemble_observation_map(template))
            rows.append((modes, diagnosis.sigma_min, diagnosis.injective))
            self.stdout.write(f"modes={modes} sigma_min={diagnosis.sigma_min:.6e}")

        path = write_table(
            self.output_path(options, config), ["modes", "sigma_min", "injective"], rows
        )

        if options["residues"]:
            reports = residue_diagnostic(
                base, config.build_field("v0", full), config.build_field("v1", full)
            )
            residue_rows = []
            for report in reports:
                for mode, residue, expected in zip(
                    report.modes, report.residues, report.expected
                ):
                    residue_rows.append(
                        (
                            report.eigenvalue,
                            int(mode) + 1,
                            residue.real,
                            residue.imag,
                            expected.real,
                            expected.imag,
                            report.observed_norm,
                        )
                    )
            write_table(
                path.with_name(f"{path.stem}_residues.csv"),
                [
                    "eigenvalue",
                    "mode",
                    "residue_real",
                    "residue_imag",
                    "expected_real",
                    "expected_imag",
                    "observed_norm",
                ],
                residue_rows,
            )

        injective = all(row[2] for row in rows)
        self.summary(
            f"ucp-svd: sigma_min at N={full.size} is {rows[-1][1]:.3e}, "
            f"injective at every truncation: {injective} -> {path}"
        )
