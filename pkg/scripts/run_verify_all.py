#!/usr/bin/env python3
"""Run every verification suite and write the report tree plus plots."""

import argparse
import sys

from greedy_widths.cli import emit_plots
from greedy_widths.suites import exit_code_for, run_suite, write_reports


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default="reports")
    ap.add_argument("--plots", default="plots")
    args = ap.parse_args()

    reports = run_suite("all", {"seed": args.seed})
    out = write_reports(reports, args.out)
    emit_plots(out, args.plots)
    code = exit_code_for(reports)
    n_pass = sum(1 for d in reports.values() if d.get("pass", d.get("status") == "pass"))
    print(f"{len(reports)} reports written to {out} "
          f"({n_pass} passing); exit {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
