#!/usr/bin/env python3
"""
Entry point for the command-line driver.

Makes the repository root importable so the script runs from any working
directory, then hands over to ``experiments.cli.cli_main``.
"""

import sys
from pathlib import Path

app_dir = str(Path(__file__).resolve().parent)
if app_dir not in sys.path:
    sys.path.insert(0, app_dir)

from experiments.cli import cli_main  # noqa: E402

if __name__ == "__main__":
    sys.exit(cli_main())
