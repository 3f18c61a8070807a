"""Deterministic file output: CSV tables and JSON-lines records.

Floats are written with 17 significant digits so re-reading reproduces the
exact binary value, and identical runs produce byte-identical files.
"""

import json
import os


def fmt_cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt_cell(v) for v in row) + "\n")


def write_records_jsonl(path, records):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json_dict(), sort_keys=True) + "\n")


def read_records_jsonl(path):
    from .runner import TrialRecord

    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(TrialRecord.from_json_dict(json.loads(line)))
    return records


def write_metadata(path, payload):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
