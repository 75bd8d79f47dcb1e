#!/usr/bin/env python3
"""Write the standing synthetic corpus to a directory and print a summary.

Usage: python scripts/make_corpus.py [OUTDIR]   (default: ./corpus)
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from gdfkit.core import type_info
from gdfkit.fileio import write_file
from gdfkit.synth import corpus_specs, synthesize


def main() -> int:
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("corpus")
    outdir.mkdir(parents=True, exist_ok=True)
    print(f"{'name':24} {'bytes':>8} {'ns':>3} {'records':>7} {'events':>6}  types")
    for name, spec in corpus_specs():
        f = synthesize(spec)
        path = outdir / f"{name}.gdf"
        count = write_file(f, path)
        types = ",".join(sorted({type_info(ch.gdf_type).name for ch in f.channels}))
        n_events = f.events.n_events if f.events is not None else 0
        print(f"{name:24} {count:>8} {f.ns:>3} {f.header.n_records:>7} "
              f"{n_events:>6}  {types}")
    print(f"\ncorpus written to {outdir.resolve()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
