#!/usr/bin/env python3
"""Regenerate the shipped scheme catalog from the live constructors."""

import json
from pathlib import Path

from expprod import schemes

if __name__ == "__main__":
    target = Path(__file__).resolve().parents[1] / "src/expprod/data/catalog.json"
    doc = {name: sch.to_json() for name, sch in schemes.catalog().items()}
    target.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"wrote {target} ({len(doc)} schemes)")
