#!/usr/bin/env python3
"""Dense spectral verification of the preconditioner bounds."""

import sys
from pathlib import Path

from sinefv.cli import main

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "results" / "verify"
    code = main(["verify", "--config", str(ROOT / "configs" / "verify.cfg"), "--out", str(out)])
    print((out / "verification.csv").read_text())
    sys.exit(code)
