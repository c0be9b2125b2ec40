"""
Batch experiment driver.

    python -m memory_control.cli <subcommand> --config FILE [--out FILE] [--threads N]

Each subcommand is the management command of the same name with underscores
in place of hyphens, so `python manage.py solve_forward ...` works as well.
"""

import logging
import os
import sys
from typing import Optional, Sequence

SUBCOMMANDS = {
    "mlf-table": "mlf_table",
    "solve-forward": "solve_forward",
    "solve-adjoint": "solve_adjoint",
    "verify-duality": "verify_duality",
    "verify-identities": "verify_identities",
    "ucp-svd": "ucp_svd",
    "control": "control",
}

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 64

logger = logging.getLogger(__name__)


def usage() -> str:
    names = "\n".join(f"  {name}" for name in SUBCOMMANDS)
    return (
        "usage: python -m memory_control.cli <subcommand> [--config FILE] "
        "[--out FILE] [--threads N]\n\nsubcommands:\n"
        f"{names}\n"
    )


def _setup_django():
    from django.apps import apps

    if not apps.ready:
        import django

        os.environ.setdefault("DJANGO_SETTINGS_MODULE", "hilfer_lab.settings")
        django.setup()


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Dispatch argv to a subcommand and return the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in SUBCOMMANDS:
        sys.stderr.write(usage())
        return EXIT_USAGE

    _setup_django()
    from django.core.management import call_command
    from django.core.management.base import CommandError

    try:
        call_command(SUBCOMMANDS[argv[0]], *argv[1:])
    except CommandError as e:
        sys.stderr.write(f"{argv[0]}: {e}\n")
        # argument errors from the command parser arrive with the default code 1
        if e.returncode in (EXIT_VALIDATION, EXIT_NUMERICAL):
            return e.returncode
        return EXIT_VALIDATION
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else EXIT_OK
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
