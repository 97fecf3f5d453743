"""Validates every command's --format json output against docs/schema.json."""

import json
import subprocess
import sys

import jsonschema

RUNS = [
    ["solve", "--registry", "ex-3.6", "-N", "20"],
    ["charpoints", "--registry", "ex-5.4"],
    ["charpoints", "--registry", "meir-moon", "-N", "64"],
    ["classify", "--registry", "ex-3.7"],
    ["classify", "--registry", "ex-4.1"],
    ["asympt", "--registry", "ex-3.1"],
    ["transform", "--registry", "sec-4.1", "--saturate"],
    ["transform", "--registry", "ex-4.1", "--step", "i=1,j=2,occ=1,alpha=1/4"],
    ["verify", "--only", "ex-3.2"],
]


def main(binary, schema_path):
    with open(schema_path) as f:
        schema = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    failed = 0
    for args in RUNS:
        out = subprocess.run([binary, *args, "--format", "json"], capture_output=True, text=True)
        label = " ".join(args)
        if out.returncode != 0:
            print(f"FAIL {label}: exit {out.returncode}\n{out.stderr}")
            failed += 1
            continue
        errors = list(validator.iter_errors(json.loads(out.stdout)))
        if errors:
            print(f"FAIL {label}: {errors[0].message}")
            failed += 1
        else:
            print(f"ok   {label}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1], sys.argv[2]))
