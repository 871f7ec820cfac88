"""Regenerate the frozen classical visibility bounds shipped as package data.

The optimizer is deterministic and seed-free, so the values are
reproducible; they are frozen because the four-mode scans take on the
order of a minute while the consumers (CLI visibility reports, fast
tests) need them instantly. Run from the repository root:

    python3 scripts/derive_goldens.py
"""

from __future__ import annotations

import json
import pathlib
import time

import triquart as tq

OUT = pathlib.Path(__file__).resolve().parent.parent / "src" / "triquart" / "data"


def main() -> None:
    payload: dict = {"generated_by": "scripts/derive_goldens.py", "bounds": {}}
    for spec in (tq.tritter_mz(), tq.quarter_mz()):
        kind = spec.splitter_kind
        per_device: dict[str, float] = {}
        for rep, mult in tq.outcome_classes(spec.mode_count, spec.mode_count):
            t0 = time.time()
            res = tq.classical_visibility_bound(spec, rep)
            sig = ",".join(str(n) for n in rep.occupations)
            per_device[sig] = res.bound
            print(f"{kind} ({sig}) multiplicity {mult}: bound={res.bound!r} "
                  f"[{time.time() - t0:.1f}s]", flush=True)
        payload["bounds"][kind] = per_device
    OUT.mkdir(parents=True, exist_ok=True)
    path = OUT / "classical_bounds.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
