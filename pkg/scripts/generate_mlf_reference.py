"""
Writes an extended-precision Mittag-Leffler reference table.

    python scripts/generate_mlf_reference.py --alpha 1.5 --beta 1 --out outputs/ref.csv

The table has the same columns as `mlf-table`, so the two can be diffed
directly.
"""

import argparse
import os
import sys

import django
import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

# Set up Django environment
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "hilfer_lab.settings")
django.setup()

from memory_control.storage import write_table  # noqa: E402
from memory_control.tests.oracles import mittag_leffler_reference  # noqa: E402


def generate_reference(alpha, beta, zmin, zmax, steps, digits):
    """Reference values on the same evenly spaced grid `mlf-table` uses."""
    z = np.linspace(zmin, zmax, steps + 1)
    return [(float(x), mittag_leffler_reference(alpha, beta, float(x), digits)) for x in z]


def main():
    parser = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    parser.add_argument("--alpha", type=float, required=True)
    parser.add_argument("--beta", type=float, required=True)
    parser.add_argument("--zmin", type=float, default=-10.0)
    parser.add_argument("--zmax", type=float, default=0.0)
    parser.add_argument("--steps", type=int, default=100)
    parser.add_argument("--digits", type=int, default=50, help="Working decimal digits")
    parser.add_argument("--out", default="outputs/mlf_reference.csv")
    args = parser.parse_args()

    rows = generate_reference(args.alpha, args.beta, args.zmin, args.zmax, args.steps, args.digits)
    path = write_table(args.out, ["z", "value"], rows)
    print(f"Successfully wrote {len(rows)} reference values to {path}")


if __name__ == "__main__":
    main()
