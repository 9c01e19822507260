"""Shared utilities: reproducible RNG streams, atomic file output, log-log fits.

Randomized property runs derive one child seed per instance from a single
master seed through a splitmix64 expansion, so instance k can be re-run in
isolation without replaying the whole stream.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One splitmix64 step; returns the mixed 64-bit output for `state`."""
    z = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def child_seed(master_seed: int, k: int) -> int:
    """Seed for the k-th randomized instance derived from `master_seed`."""
    return splitmix64((master_seed + 1) * 0x9E3779B97F4A7C15 + k)


def rng_for(master_seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(child_seed(master_seed, k))


def write_text_atomic(path: str, text: str) -> None:
    """Write `text` to `path` via temp file + rename (no partial files)."""
    d = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_atomic(path: str, obj) -> None:
    write_text_atomic(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_csv_atomic(path: str, header: str, rows) -> None:
    """CSV with a single `# columns: ...` comment line documenting columns."""
    lines = ["# columns: " + header]
    for row in rows:
        lines.append(",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    write_text_atomic(path, "\n".join(lines) + "\n")


def loglog_fit(x, y):
    """Least-squares slope/intercept of log y vs log x.

    Returns (slope, intercept, r_squared). Requires x, y > 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least 2 points for a log-log fit")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), float(intercept), float(r2)
