#!/usr/bin/env python3
"""Preflight checks: configuration validity and the numeric stack."""

from __future__ import annotations

import argparse
import importlib
import json
import sys
from pathlib import Path
from typing import List, Optional

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

REQUIRED_MODULES = ("numpy", "scipy", "sklearn", "dotenv")


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Validate config and installed packages.")
    parser.add_argument("--config", type=Path, default=None, help="Alternate defaults JSON.")
    parser.add_argument("--json", action="store_true", help="Emit JSON output.")
    return parser.parse_args()


def check_modules() -> List[str]:
    issues = []
    for name in REQUIRED_MODULES:
        try:
            importlib.import_module(name)
        except ImportError as exc:
            issues.append(f"Missing package '{name}': {exc}")
    return issues


def run_checks(config: Optional[Path] = None) -> List[str]:
    issues = check_modules()
    if issues:
        return issues
    from src.settings import preflight

    return preflight(config)


def main() -> int:
    args = parse_args()
    issues = run_checks(args.config)
    if args.json:
        print(json.dumps({"ok": not issues, "issues": issues}, indent=2))
    elif issues:
        print("PREFLIGHT FAIL")
        for issue in issues:
            print(f"- {issue}")
    else:
        print("PREFLIGHT OK")
    return 0 if not issues else 1


if __name__ == "__main__":
    raise SystemExit(main())
