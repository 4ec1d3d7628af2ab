#!/usr/bin/env python3
"""Chaotic two-dof runs: symplectic splitting vs the simultaneous update.

Writes umeno_trotter.csv and umeno_euler.csv (t, energy, q1, q2) from the
standard initial condition p = 0, q = (2, 1) with energy 2.
"""

import sys

from expprod.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "."
    for scheme in ("trotter", "euler"):
        code = main(["umeno", "--scheme", scheme, "--dt", "1e-4",
                     "--steps", "1000000", "--sample-every", "1000",
                     "--out", f"{out}/umeno_{scheme}.csv"])
        if code:
            sys.exit(code)
    print("wrote umeno_trotter.csv and umeno_euler.csv")
