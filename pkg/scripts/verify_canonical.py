"""Run every verification suite on a conformal-invariant file and print the report.

    python3 scripts/verify_canonical.py [fixtures/canonical.txt]
"""

import sys

from twistorfam.checks import run_suites
from twistorfam.familymodel import ConformalInvariant


def main() -> int:
    path = sys.argv[1] if len(sys.argv) > 1 else "fixtures/canonical.txt"
    report = run_suites(ConformalInvariant.from_file(path))
    sys.stdout.write(report.to_text())
    for suite, secs in report.timing.items():
        print(f"  {suite:8} {secs:.3f}s")
    return 0 if report.status == "pass" else 1


if __name__ == "__main__":
    sys.exit(main())
