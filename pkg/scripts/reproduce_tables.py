#!/usr/bin/env python3
"""Run the four shipped iteration-table configs into results/tables."""

import sys
from pathlib import Path

from sinefv.cli import main

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = [
    "ex1_cg_table.cfg",
    "ex1_gmres_table.cfg",
    "ex2_cg_table.cfg",
    "ex2_gmres_table.cfg",
]

if __name__ == "__main__":
    out_root = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "results" / "tables"
    status = 0
    for name in CONFIGS:
        out = out_root / name.removesuffix(".cfg")
        print(f"== {name} -> {out}")
        status |= main(["table", "--config", str(ROOT / "configs" / name), "--out", str(out)])
        print((out / "table.md").read_text())
    sys.exit(status)
