#!/usr/bin/env python3
"""Regenerate the frozen Halton dispersion fixture (grid-oracle pilot).

The acceptance suite re-measures dispersion at the same grid resolution
and compares against this file, so only regenerate it deliberately.
"""

import json
import sys
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from aoplan import HaltonStream, measure_dispersion  # noqa: E402
from aoplan.geometry import Box  # noqa: E402


def main() -> int:
    domain = Box(lo=np.zeros(2), hi=np.ones(2))
    stream = HaltonStream(2)
    pts = [stream.next_point(domain) for _ in range(1024)]
    entries = []
    for n in (64, 256, 1024):
        rep = measure_dispersion(pts[:n], domain, 0.005)
        entries.append({"n": n, "dispersion": rep.dispersion,
                        "grid_resolution": rep.grid_resolution})
        print(f"n={n}: dispersion={rep.dispersion}")
    out = REPO / "tests" / "data" / "halton_dispersion_2d.json"
    out.write_text(json.dumps(
        {"sampler": "halton", "dimension": 2, "entries": entries}, indent=2) + "\n")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
