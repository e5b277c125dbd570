#!/usr/bin/env python3
"""
Test runner for cykit.

Runs the unit suite, the performance suite or both through pytest and
writes a JSON summary. The exit code mirrors pytest: 0 only when every
selected suite passed.
"""

import argparse
import json
import os
import subprocess
import sys
import time
from datetime import datetime

from dotenv import load_dotenv

from monitoring import logger

SUITES = {
    'unit': ['tests', '--ignore=tests/performance'],
    'performance': ['tests/performance'],
}


def setup_test_environment():
    """Copy of the environment with test defaults for unset variables."""
    load_dotenv()
    test_env = os.environ.copy()

    default_env = {
        'LOG_LEVEL': 'WARNING',
        'CYKIT_THREADS': '1',
        'CYKIT_DEFAULT_WINDOW': '-4:1',
        'CYKIT_WEIGHT_WINDOW': '-3:3',
        'CYKIT_CACHE_SIZE': '64',
        'PERF_RELCY_SMALL_THRESHOLD': '10',
        'PERF_RELCY_A4_THRESHOLD': '60',
    }
    for key, value in default_env.items():
        if not test_env.get(key):
            test_env[key] = value
    # Tests choose their own field.
    test_env.pop('CYKIT_PRIME', None)
    return test_env


def run_suite(name, test_env, output_dir, verbose=False, coverage=False, junit=False):
    """Run one pytest suite and save its output next to the report."""
    logger.info("Running suite", suite=name)
    cmd = [sys.executable, "-m", "pytest", *SUITES[name], "-v" if verbose else "-q"]
    if junit:
        cmd.append(f"--junitxml={output_dir}/{name}_tests.xml")
    if coverage:
        cmd.extend([
            "--cov=.",
            f"--cov-report=xml:{output_dir}/coverage.xml",
            f"--cov-report=html:{output_dir}/coverage_html",
        ])

    start_time = time.time()
    result = subprocess.run(cmd, env=test_env, capture_output=True, text=True)
    duration = time.time() - start_time

    output_file = os.path.join(output_dir, f"{name}_tests_output.txt")
    with open(output_file, "w", encoding='utf-8') as f:
        f.write(result.stdout)
        if result.stderr:
            f.write("\n\nERRORS:\n")
            f.write(result.stderr)

    logger.info("Suite finished", suite=name, returncode=result.returncode, duration=round(duration, 2))
    return {
        "success": result.returncode == 0,
        "duration": duration,
        "output_file": output_file,
        "returncode": result.returncode,
    }


def generate_report(results, output_dir):
    """Write test_report.json and return the report."""
    report = {
        "timestamp": datetime.now().isoformat(),
        "summary": {name: r["success"] for name, r in results.items()},
        "overall_success": bool(results) and all(r["success"] for r in results.values()),
        "details": results,
    }
    path = os.path.join(output_dir, "test_report.json")
    with open(path, "w", encoding='utf-8') as f:
        json.dump(report, f, indent=2)
    print(f"Test report written to {path}")
    return report


def main(argv=None):
    """Main function to run tests and summarize them."""
    parser = argparse.ArgumentParser(description="Run tests for cykit")
    parser.add_argument("suite", nargs="?", choices=["unit", "performance", "all"], default="all")
    parser.add_argument("--output-dir", default="test_results", help="Directory to store test results")
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable verbose output")
    parser.add_argument("--coverage", action="store_true", help="Collect coverage with pytest-cov")
    parser.add_argument("--junit", action="store_true", help="Write JUnit XML per suite")
    parser.add_argument("--report", action="store_true", help="Write a JSON summary to the output directory")
    args = parser.parse_args(argv)

    os.makedirs(args.output_dir, exist_ok=True)
    test_env = setup_test_environment()

    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = {}
    for name in names:
        results[name] = run_suite(name, test_env, args.output_dir, args.verbose,
                                  coverage=args.coverage and name == 'unit', junit=args.junit)

    print("\nTest Summary:")
    for name, result in results.items():
        print(f"{name.capitalize()} Tests: {'PASSED' if result['success'] else 'FAILED'} ({result['duration']:.2f}s)")
    if args.report:
        generate_report(results, args.output_dir)

    failed = [r["returncode"] for r in results.values() if r["returncode"] != 0]
    return failed[0] if failed else 0


if __name__ == "__main__":
    sys.exit(main())
