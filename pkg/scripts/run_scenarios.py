"""Run every builtin access-control scenario and print the full report.

    python scripts/run_scenarios.py [name ...]
"""

import sys

from erl import builtin_scenario, builtin_scenarios, run_scenario


def main(argv):
    scenarios = [builtin_scenario(n) for n in argv] if argv \
        else builtin_scenarios()
    failed = 0
    for s in scenarios:
        report = run_scenario(s)
        print(f"== {s.name}: {'ok' if report.ok else 'FAILED'}")
        print(f"   {s.description}")
        for e in report.entries:
            mark = "pass" if e.ok else "FAIL"
            detail = f" -- {e.detail}" if e.detail and not e.ok else ""
            print(f"   [{mark}] {e.label}{detail}")
        print()
        failed += 0 if report.ok else 1
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
