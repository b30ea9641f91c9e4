"""Deterministic CSV and metadata sidecar writers."""

import csv
import hashlib
import os

import numpy as np

__all__ = ["format_value", "config_hash", "write_csv", "write_sidecar", "read_sidecar", "ensure_dir"]


def format_value(v):
    """Locale-free text for a CSV cell; floats use ``repr`` (round-trippable)."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (complex, np.complexfloating)):
        return f"{float(v.real)!r}{float(v.imag):+.17g}j"
    return str(v)


def config_hash(config):
    """sha256 over the sorted ``key=value`` lines of a flat config."""
    lines = "\n".join(f"{k}={format_value(config[k])}" for k in sorted(config))
    return hashlib.sha256(lines.encode("utf-8")).hexdigest()


def write_csv(path, columns, rows, extra=None):
    """Write rows (dicts or sequences) as RFC-4180 CSV with ``\\n`` line ends.

    ``extra`` maps additional column names to a constant value appended to
    every row (used for the config hash and conventions).
    """
    extra = dict(extra or {})
    header = list(columns) + list(extra)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            vals = [row[c] for c in columns] if isinstance(row, dict) else list(row)
            w.writerow([format_value(v) for v in vals] + [format_value(v) for v in extra.values()])
    return path


def write_sidecar(path, items):
    """``key = value`` lines in the given order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, v in items.items():
            text = format_value(v).replace("\n", " ")
            fh.write(f"{k} = {text}\n")
    return path


def read_sidecar(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            k, _, v = line.partition("=")
            out[k.strip()] = v.strip()
    return out


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
