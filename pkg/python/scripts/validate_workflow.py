#!/usr/bin/env python3
"""
Workflow validation script for conflab CI.

This script validates that the GitHub workflow will work correctly by:
1. Checking the sample experiment documents
2. Installing the package with its dev extras
3. Running the fast tests
4. Running the examples and the verify command

Run this script locally to validate the workflow before pushing changes.
"""

import json
import os
import platform
import subprocess
import sys
from pathlib import Path

REQUIRED_DOCUMENTS = (
    "worked_example.json",
    "limited_attention.json",
    "time_varying_prior.json",
    "increasing_quality.json",
    "coarse_ratings.json",
    "prior_strength.json",
    "switching_quality.json",
)


def read_documents(data_dir):
    """Load every sample document, reporting the ones that fail to parse."""
    documents = {}
    for path in sorted(data_dir.glob("*.json")):
        try:
            documents[path.name] = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            print(f"[WARN] {path.name} is not valid JSON: {e}")
    return documents


def run_command(cmd, description, cwd=None):
    """Run a command and handle errors."""
    print(f"[RUN] {description}...")
    try:
        result = subprocess.run(
            cmd, shell=True, check=True, capture_output=True, text=True, cwd=cwd
        )
        print(f"[OK] {description} - Success")
        return result.stdout
    except subprocess.CalledProcessError as e:
        print(f"[FAIL] {description} - Failed")
        print(f"Command: {cmd}")
        print(f"Error: {e.stderr}")
        sys.exit(1)


def main():
    """Main validation function."""
    print("conflab Workflow Validation")
    print("===========================\n")

    project_root = Path(__file__).parent.parent.parent
    os.chdir(project_root)
    print(f"Project root: {project_root}")
    print(f"Python version: {sys.version}")
    print(f"Operating System: {platform.system()} {platform.release()}")

    if sys.base_prefix != sys.prefix:
        print("[OK] Running in virtual environment")
    else:
        print("[WARN] Not running in virtual environment - this is recommended")

    # Step 1: Sample documents
    data_dir = project_root / "data"
    documents = read_documents(data_dir)
    missing = [name for name in REQUIRED_DOCUMENTS if name not in documents]
    if missing:
        print(f"[FAIL] Missing or unreadable sample documents: {', '.join(missing)}")
        sys.exit(1)
    print(f"[OK] Found {len(documents)} sample documents in {data_dir}")

    # Step 2: Install
    run_command(
        'python -m pip install --upgrade pip && python -m pip install -e ".[dev]"',
        "Installing conflab with dev extras",
    )

    # Step 3: Fast tests
    run_command(
        'python -m pytest python/tests/ -m "not slow" -v --tb=short',
        "Running Python tests",
    )

    # Step 4: Examples and the oracle check
    run_command("python python/examples/demo.py", "Testing Python examples")
    output = run_command(
        "conflab -q verify --config data/worked_example.json --rounds 20000 --reps 8",
        "Verifying the worked example",
    )
    report = json.loads(output)
    failed = [check["name"] for check in report["checks"] if not check["passed"]]
    if failed:
        print(f"[FAIL] Oracle checks failed: {', '.join(failed)}")
        sys.exit(1)
    print(f"   [INFO] {len(report['checks'])} oracle checks passed")

    # Step 5: Check import
    try:
        import conflab

        print("[OK] conflab imported successfully")
        print(f"   [INFO] Public names: {len(conflab.__all__)}")
    except ImportError as e:
        print(f"[FAIL] Failed to import conflab: {e}")
        sys.exit(1)

    print("\n[OK] All validation checks passed!")
    print("\nThe GitHub workflow should work correctly with this configuration.")
    print("\nNext steps:")
    print("- Push changes to trigger the GitHub workflow")
    print('- Run the slow reproductions with: python -m pytest -m slow')


if __name__ == "__main__":
    main()
