#!/usr/bin/env python3
"""Trace the one-parameter family of third-order six-stage solutions.

Writes family.csv over the last-coefficient grid 0.2..1.4; rows where the
real branch is lost are flagged rather than dropped.
"""

import sys

from expprod.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "."
    sys.exit(main(["family", "--p6", "0.2:1.4:0.05", "--out", f"{out}/family.csv"]))
