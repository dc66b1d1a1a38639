#!/usr/bin/env python3
"""Spatial and temporal convergence-order study for Example 1."""

import sys
from pathlib import Path

from sinefv.cli import main

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "results" / "order"
    code = main(["order", "--config", str(ROOT / "configs" / "order_ex1.cfg"), "--out", str(out)])
    print((out / "order.csv").read_text())
    sys.exit(code)
