"""Regenerate the shipped circuit corpus JSON from ``canonical_corpus``."""
import argparse
import json
from pathlib import Path

from uclab.dqre import canonical_corpus

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "uclab" / "data" / "circuit_corpus.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args()
    doc = {"version": 1, "circuits": [c.to_json() for c in canonical_corpus()]}
    args.out.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {len(doc['circuits'])} circuits to {args.out}")


if __name__ == "__main__":
    main()
