"""Run every demo in order; outputs land in demos/output/."""

import runpy
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent


def main() -> int:
    for script in sorted(HERE.glob("[0-9][0-9]_*.py")):
        print(f"\n=== {script.name} {'=' * max(1, 60 - len(script.name))}")
        runpy.run_path(str(script), run_name="__main__")
    return 0


if __name__ == "__main__":
    sys.exit(main())
