"""Deterministic CSV / PGM / JSON writers."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.12e"


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    with open(path, "w", newline="\n") as fh:
        np.savetxt(fh, rows, fmt=FLOAT_FMT, delimiter=",", header=",".join(header), comments="")
    return path


def write_pgm(path, image) -> Path:
    """Plain (P2) 8-bit grayscale; pixel = round(255 * value / max)."""
    path = Path(path)
    image = np.asarray(image, dtype=float)
    top = image.max() if image.size else 0.0
    pixels = np.rint(255.0 * image / top).astype(int) if top > 0 else np.zeros(image.shape, int)
    height, width = pixels.shape
    lines = ["P2", f"{width} {height}", "255"]
    lines += [" ".join(map(str, row)) for row in pixels]
    path.write_text("\n".join(lines) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path, payload) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def trajectory_tables(traj):
    """(header, rows) of ``|p_n(t)|`` with a leading time column."""
    header = ["t"] + [f"n{n}" for n in traj.sites]
    rows = np.column_stack([traj.times, np.abs(traj.main_amplitudes())])
    return header, rows


def write_trajectory(directory, stem: str, traj, params: dict, pgm: bool = True) -> dict:
    directory = Path(directory)
    header, rows = trajectory_tables(traj)
    files = {"amplitudes": write_csv(directory / f"{stem}_amplitudes.csv", header, rows).name}
    meta = {
        "params": params,
        "dt": traj.meta.get("dt"),
        "samples": len(traj),
        "edge_touch": traj.edge_touch,
        "edge_amplitude": traj.meta.get("edge_amplitude"),
        "times": traj.times,
        "log_norm_series": traj.log_norm,
    }
    files["metadata"] = write_json(directory / f"{stem}_trajectory.json", meta).name
    if pgm:
        files["heatmap"] = write_pgm(directory / f"{stem}_heatmap.pgm", rows[:, 1:]).name
    return files
