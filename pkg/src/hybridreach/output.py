"""CSV / JSON persistence of solve results and convergence tables."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .grid import Grid4D


def _fmt(v) -> str:
    return repr(float(v))


def write_slice_csv(path: Path, grid: Grid4D, values: np.ndarray, config_hash: str, header_note: str,
                    value_name: str = "value") -> None:
    """One row per state node: coordinates then the value."""
    pts = grid.points().reshape(-1, grid.dim)
    vals = np.asarray(values).reshape(-1)
    names = [f"x{j + 1}" for j in range(grid.dim)] + [value_name]
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_sha256={config_hash} {header_note}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for p, v in zip(pts, vals):
            cell = str(int(v)) if vals.dtype == bool else _fmt(v)
            w.writerow([_fmt(c) for c in p] + [cell])


def dump_steps(result) -> list:
    return sorted(result.min_maps)


def write_solve_bundle(out_dir, result, cfg, extra_summary: dict | None = None) -> list:
    """Write masks/, minmaps/ and summary.json; return the list of written files."""
    out = Path(out_dir)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    (out / "minmaps").mkdir(parents=True, exist_ok=True)
    h = cfg.sha256()
    g = result.grid
    written = []
    records = {r.n: r for r in result.records}
    for n in dump_steps(result):
        rec = records[n]
        maps = result.min_maps.get(n)
        name = f"masks/mask_n{n:05d}.csv"
        write_slice_csv(out / name, g, rec.mask, h, f"n={n} s={rec.time!r}", "reachable")
        written.append(name)
        if maps is None:
            continue
        for q in range(maps.shape[0]):
            name = f"minmaps/minmap_n{n:05d}_q{q}.csv"
            write_slice_csv(out / name, g, maps[q], h, f"n={n} s={rec.time!r} q={q}", "min_value")
            written.append(name)
    a = result.autonomy
    summary = {
        "config": cfg.to_dict(),
        "config_sha256": h,
        "autonomy": a.time,
        "autonomy_bracket": list(a.bracket) if a.bracket else None,
        "reached": a.reached,
        "grid": {
            "x_min": g.x_min.tolist(), "x_max": g.x_max.tolist(), "x_shape": list(g.x_shape),
            "dx": g.dx, "dp": g.dp, "num_p": g.num_p, "dt": g.dt, "num_modes": g.num_modes,
            "nodes": int(np.prod(g.shape)),
        },
        "steps_taken": len(result.records) - 1,
        "wall_time_s": result.wall_time,
    }
    if extra_summary:
        summary.update(extra_summary)
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    written.append("summary.json")
    return written


def write_manifest(out_dir, files, config_hash: str, complete: bool, note: str = "") -> None:
    lines = [f"config_sha256 {config_hash}", f"complete {'true' if complete else 'false'}"]
    if note:
        lines.append(f"note {note}")
    lines += [f"file {f}" for f in files]
    Path(out_dir, "MANIFEST").write_text("\n".join(lines) + "\n")


def write_table(out_dir, rows, config_hash: str) -> list:
    from .oracle import format_table

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "table.csv", "w", newline="") as fh:
        fh.write(f"# config_sha256={config_hash}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x0", "y0", "dx", "eps", "s_star", "t_exact", "bracket_lo", "bracket_hi", "runtime_s", "note"])
        for r in rows:
            lo, hi = r.bracket if r.bracket else ("", "")
            w.writerow([r.x0, r.y0, r.dx, "" if r.error is None else f"{r.error:.6f}",
                        "" if r.estimate is None else f"{r.estimate:.6f}", f"{r.exact:.6f}",
                        lo, hi, f"{r.runtime:.2f}", r.note])
    (out / "table.txt").write_text(format_table(rows) + "\n")
    return ["table.csv", "table.txt"]
