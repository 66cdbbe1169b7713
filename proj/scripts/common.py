"""Helpers shared by the figure scripts: locate the CLI and run it."""

import json
import os
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def binary():
    path = os.environ.get("FINITA", str(ROOT / "build" / "tools" / "finita"))
    if not Path(path).exists():
        sys.exit(f"finita binary not found at {path}; build first or set FINITA")
    return path


def run(args, stdin=None):
    """Runs the CLI and returns stdout as text; stderr is discarded."""
    out = subprocess.run([binary(), *args], input=stdin, capture_output=True, text=True)
    if out.returncode != 0:
        sys.exit(f"finita {' '.join(args)} failed with exit {out.returncode}")
    return out.stdout


def run_json(args, stdin=None):
    return json.loads(run(args, stdin))
