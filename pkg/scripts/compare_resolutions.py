"""Run the surgery for all 64 equivariant resolution choices and compare the results.

For each choice prints the contracted pairs and whether every reducible fiber
of the final model has the same self-intersection cycle (up to rotation and
reflection) as under the default choice.
"""

import sys
from collections import Counter

from twistorfam.familymodel import ConformalInvariant, build_family
from twistorfam.surgery import ResolutionChoice, fiber_cycle, run_pipeline
from twistorfam.toricgeom import cycles_equivalent


def main() -> int:
    path = sys.argv[1] if len(sys.argv) > 1 else None
    ci = ConformalInvariant.from_file(path) if path else ConformalInvariant.canonical()
    fm = build_family(ci)
    default = run_pipeline(fm)
    ref = {k: [a for _, a in fiber_cycle(f)] for k, f in default.final.fibers.items()}
    tally = Counter()
    for choice in ResolutionChoice.all_equivariant():
        run = run_pipeline(fm, choice)
        same = all(
            cycles_equivalent([a for _, a in fiber_cycle(f)], ref[k]) for k, f in run.final.fibers.items()
        )
        pairs = " ".join(f"{a}/{b}" for a, b in run.pairs.values())
        print(f"{' '.join(choice.symbols)}  pass={run.passed}  same-cycles={same}  pairs: {pairs}")
        tally[(run.passed, same)] += 1
    print(f"summary: {dict(tally)}")
    return 0 if all(p for p, _ in tally) else 1


if __name__ == "__main__":
    sys.exit(main())
