"""Number formatting, JSON reports, and atomic file output for the command line."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .automata import format_word

TOOL = "aec"


def num(x: float) -> str:
    """Twelve digits after the point, or twelve significant digits in exponent form for tiny/huge values."""
    x = float(x)
    if x == 0 or 1e-4 <= abs(x) < 1e12:
        return f"{x:.12f}"
    return f"{x:.11e}"


def as_fraction(p: float, max_den: int = 1000, tol: float = 1e-12) -> Fraction | None:
    frac = Fraction(p).limit_denominator(max_den)
    return frac if abs(float(frac) - p) <= tol else None


def prob_text(p: float) -> str:
    frac = as_fraction(p)
    return f"{frac} ≈ {num(p)}" if frac is not None else num(p)


def sha256_file(path: str) -> str:
    with open(path, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


@dataclass
class Report:
    kind: str
    payload: dict[str, Any]
    fingerprints: dict[str, str] = field(default_factory=dict)
    parameters: dict[str, Any] = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> str:
        from . import __version__

        doc = {
            "tool": TOOL,
            "version": __version__,
            "kind": self.kind,
            "inputs": self.inputs,
            "fingerprints": self.fingerprints,
            "parameters": self.parameters,
            "payload": self.payload,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def curve_csv(values, witnesses) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "bits", "witness"])
    for n, bits in enumerate(values):
        w.writerow([n, num(bits), format_word(witnesses[n]) if witnesses else ""])
    return buf.getvalue()


def write_output(text: str, path: str | None, stdout) -> None:
    """Write to ``path`` via a temp file and rename, or to ``stdout`` when no path is given."""
    if path is None or path == "-":
        stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".aec-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
