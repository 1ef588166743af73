"""Regenerate the golden files under tests/golden from the canonical invariants.

Review the diff before committing: goldens are frozen outputs, and the tests
cross-check them against independent constructions.
"""

import json
from pathlib import Path

from twistorfam.checks import run_suites
from twistorfam.familymodel import ConformalInvariant, build_family, halves_assignment
from twistorfam.surgery import EXPECTED_RAY_TOTAL, fiber_cycle, run_pipeline

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"


def dump(name: str, data) -> None:
    (GOLDEN / name).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def main() -> None:
    ci = ConformalInvariant.canonical()
    fm = build_family(ci)
    GOLDEN.mkdir(parents=True, exist_ok=True)
    (GOLDEN / "generators_canonical.txt").write_text(
        "".join(f"g{k} = {g.to_text()}\n" for k, g in enumerate(fm.generators, start=1)), encoding="utf-8"
    )
    dump("halves_fiber1.json", halves_assignment(fm, 1))
    run = run_pipeline(fm)
    counts = {
        st: {
            "ray_total": {k: f.ray_total for k, f in s.fibers.items()},
            "cycle_length": {k: len(fiber_cycle(f)) for k, f in s.fibers.items()},
        }
        for st, s in run.states.items()
    }
    assert all(counts[st]["ray_total"]["1"] == n for st, n in EXPECTED_RAY_TOTAL.items())
    dump("surgery_counts.json", {"counts": counts, "pairs": {k: list(v) for k, v in run.pairs.items()}})
    (GOLDEN / "report_canonical.json").write_text(run_suites(ci).to_json(), encoding="utf-8")


if __name__ == "__main__":
    main()
