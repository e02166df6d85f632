#!/usr/bin/env python3
"""Validate scenario files against the schemas in schemas/."""
import json
import pathlib
import sys

import jsonschema

PREFIX = {"linearize": "linearize", "estimates": "verify-estimates", "symmetry": "symmetry",
          "plot": "plot", "foliation": "foliation-check", "parse": "parse-check"}

root = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else ".")
bad = 0
for path in sorted((root / "scenarios").glob("*.json")):
    cmd = PREFIX[path.stem.split("_")[0]]
    schema = json.loads((root / "schemas" / f"{cmd}.schema.json").read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    errors = list(jsonschema.Draft202012Validator(schema).iter_errors(json.loads(path.read_text())))
    for e in errors:
        print(f"{path.name}: {e.message}")
    bad += bool(errors)
    print(f"{path.name} {'ok' if not errors else 'INVALID'}")
sys.exit(1 if bad else 0)
