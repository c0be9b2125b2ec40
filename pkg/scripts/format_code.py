#!/usr/bin/env python3
import os
import subprocess
import sys

PATHS = ["memory_control", "hilfer_lab", "scripts", "manage.py"]


def run_command(command):
    try:
        subprocess.run(command, check=True)
        print(f"Successfully ran: {' '.join(command)}")
    except subprocess.CalledProcessError as e:
        print(f"Error running {' '.join(command)}: {e}")
        sys.exit(1)


def main():
    # Get the project root directory
    project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    os.chdir(project_root)

    check = "--check" in sys.argv[1:]

    # Sort imports, settings come from setup.cfg
    run_command(["isort", *(["--check-only", "--diff"] if check else []), *PATHS])

    # Line length comes from pyproject.toml
    run_command(["black", *(["--check"] if check else []), *PATHS])

    run_command(["flake8", *PATHS])


if __name__ == "__main__":
    main()
