"""Deterministic CSV/JSON writers.

Floats are written with 17 significant digits, '.' as decimal separator and
'\\n' line endings.  Every file is written to a temporary name in the target
directory and renamed into place.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

TRAJECTORY_COLUMNS = ("t", "re_a1", "im_a1", "re_b", "im_b", "re_a2", "im_a2",
                      "p_a1", "p_b", "p_a2", "g1", "g2", "theta", "cost_frobenius")
COST_COLUMNS = ("t", "g1", "g2", "theta", "cost_paper", "cost_frobenius")
EIGEN_COLUMNS = ("t", "re_E0", "im_E0", "re_E1", "im_E1", "re_E2", "im_E2", "p_dark")
FIG4_COLUMNS = ("g0", "theta", "cost_over_g0")


def fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if x == 0.0:
        return "0"  # folds -0.0 so sign-of-zero noise never changes bytes
    return "%.17g" % x


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def json_text(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def trajectory_rows(traj):
    s = traj.states
    p = traj.populations
    for k, t in enumerate(traj.times):
        yield (t, s[k, 0].real, s[k, 0].imag, s[k, 1].real, s[k, 1].imag,
               s[k, 2].real, s[k, 2].imag, p[k, 0], p[k, 1], p[k, 2],
               traj.pulses.g1[k], traj.pulses.g2[k], traj.theta[k], traj.cost_frobenius[k])


def population_plot_script(csv_name: str, title: str) -> str:
    return (
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        f"set title '{title}'\n"
        "set xlabel 't (us)'\nset ylabel 'population'\n"
        f"plot '{csv_name}' using 1:8 with lines lw 2 title 'a1', \\\n"
        f"     '{csv_name}' using 1:10 with lines dt 2 lw 2 title 'a2', \\\n"
        f"     '{csv_name}' using 1:9 with linespoints pi 200 title 'b'\n"
    )


def fig4_plot_script(files) -> str:
    parts = [f"'{name}' using 1:3 with lines lw 2 title '{label}'" for name, label in files]
    return (
        "set datafile separator ','\n"
        "set logscale x\n"
        "set xlabel 'g0 (rad/us)'\nset ylabel 'd_t C / g0'\n"
        "plot " + ", \\\n     ".join(parts) + "\n"
    )
