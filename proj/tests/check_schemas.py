"""Validates CLI output against the shipped JSON schemas."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

cli, root = sys.argv[1], pathlib.Path(sys.argv[2])
fixture_schema = json.loads((root / "schemas/fixture.schema.json").read_text())
report_schema = json.loads((root / "schemas/report.schema.json").read_text())

with tempfile.TemporaryDirectory() as tmp:
    names = subprocess.run([cli, "fixtures", "list"], check=True, capture_output=True, text=True).stdout.split("\n")
    for name in filter(None, (line.split()[0] for line in names if line.strip())):
        path = pathlib.Path(tmp) / f"{name}.json"
        subprocess.run([cli, "fixtures", "export", name, "--out", str(path)], check=True)
        jsonschema.validate(json.loads(path.read_text()), fixture_schema)
    for name in ("sw2", "sw2-weak", "sw2-strong-synthetic"):
        path = pathlib.Path(tmp) / f"report-{name}.json"
        subprocess.run([cli, "verify", name, "--trajectories", "2", "--out", str(path)], check=True,
                       capture_output=True)
        jsonschema.validate(json.loads(path.read_text()), report_schema)
print("schemas ok")
