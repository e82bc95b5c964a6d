#!/usr/bin/env python3
"""Run invariant discovery over every bundled example program.

Usage: python3 scripts/run_corpus.py [--format json] [extra discover flags]
"""

import sys
from pathlib import Path

from loopinv.cli import main

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"


def run() -> int:
    extra = sys.argv[1:]
    worst = 0
    for path in sorted(PROGRAMS.glob("*.imp")):
        print(f"=== {path.name} ===")
        code = main(["discover", str(path), *extra])
        print(f"--- exit code {code}\n")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    raise SystemExit(run())
