"""On-disk artifacts: trajectory run directories, reports, certificates.

Run directory layout::

    metadata.json          config, initial data, code version, dt, status
    series.csv             one row per step, columns SERIES_COLUMNS
    snapshots/000000.bin   one file per recorded snapshot

Snapshot files hold an 8-byte magic, a one-byte endianness tag, then
n (uint64), L (float64), t (float64) and n float64 samples, all in the
tagged byte order.  Floats in CSV are written with ``repr`` so that a
save/load round trip is bit-exact.
"""

from __future__ import annotations

import csv
import json
import os
import struct
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .errors import FracBurgersError, ParameterError
from .field import SpectralField
from .solver import SERIES_COLUMNS, Blowup, InitialData, SolverConfig, Trajectory

MAGIC = b"FBSNAP1\0"
_TAGS = {"<": b"<", ">": b">"}


class ArtifactError(FracBurgersError):
    """Missing or malformed artifact on disk."""


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ArtifactError(f"missing artifact: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"malformed JSON in {path}: {exc}") from exc


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, columns, rows) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_csv(path) -> tuple[list, np.ndarray]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            data = [[float(v) for v in row] for row in reader if row]
    except FileNotFoundError as exc:
        raise ArtifactError(f"missing artifact: {path}") from exc
    except (StopIteration, ValueError) as exc:
        raise ArtifactError(f"malformed CSV {path}: {exc}") from exc
    return header, np.array(data, dtype=float).reshape(len(data), len(header))


# ---------------------------------------------------------------------------
# snapshots


def snapshot_bytes(f: SpectralField, t: float, byteorder: str = "<") -> bytes:
    if byteorder not in _TAGS:
        raise ParameterError("byteorder must be '<' or '>'")
    head = MAGIC + _TAGS[byteorder] + struct.pack(byteorder + "Qdd", f.n, f.domain_length, t)
    return head + np.ascontiguousarray(f.values, dtype=byteorder + "f8").tobytes()


def parse_snapshot(data: bytes) -> tuple[SpectralField, float]:
    head = len(MAGIC) + 1 + 24
    if len(data) < head or data[: len(MAGIC)] != MAGIC:
        raise ArtifactError("not a snapshot file")
    tag = data[len(MAGIC):len(MAGIC) + 1].decode()
    if tag not in _TAGS:
        raise ArtifactError(f"unknown endianness tag {tag!r}")
    n, L, t = struct.unpack(tag + "Qdd", data[len(MAGIC) + 1:head])
    if len(data) != head + 8 * n:
        raise ArtifactError(f"snapshot length mismatch: header says {n} samples")
    values = np.frombuffer(data, dtype=tag + "f8", offset=head).astype(float)
    return SpectralField(values, L), t


def write_snapshot(path, f: SpectralField, t: float, byteorder: str = "<") -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_bytes(snapshot_bytes(f, t, byteorder))
    os.replace(tmp, path)


def read_snapshot(path) -> tuple[SpectralField, float]:
    try:
        return parse_snapshot(Path(path).read_bytes())
    except FileNotFoundError as exc:
        raise ArtifactError(f"missing snapshot {path}") from exc


# ---------------------------------------------------------------------------
# trajectories


def trajectory_metadata(traj: Trajectory) -> dict:
    meta = {
        "format": "fracburgers-run/1",
        "code_version": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "config": traj.config.to_dict(),
        "init": traj.init.to_dict() if traj.init is not None else None,
        "seed": traj.config.seed,
        "dt": traj.dt,
        "status": traj.status,
        "boundary_contamination": traj.boundary_contamination,
        "snapshot_times": [float(t) for t in traj.times],
        "series_columns": list(SERIES_COLUMNS),
        "blowup": None,
    }
    if traj.blowup is not None:
        meta["blowup"] = {"step": traj.blowup.step, "t": traj.blowup.t, "reason": traj.blowup.reason}
    return meta


def save_trajectory(traj: Trajectory, run_dir) -> list:
    """Write the run directory; returns the list of files written (metadata last)."""
    run_dir = Path(run_dir)
    snap_dir = run_dir / "snapshots"
    snap_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i, (t, f) in enumerate(zip(traj.times, traj.snapshots)):
        p = snap_dir / f"{i:06d}.bin"
        write_snapshot(p, f, float(t))
        written.append(p)
    series = run_dir / "series.csv"
    write_csv(series, SERIES_COLUMNS, traj.series_array())
    written.append(series)
    meta = run_dir / "metadata.json"
    write_json(meta, trajectory_metadata(traj))
    written.append(meta)
    return written


def load_trajectory(run_dir) -> Trajectory:
    run_dir = Path(run_dir)
    meta = read_json(run_dir / "metadata.json")
    try:
        config = SolverConfig(**meta["config"])
        init = InitialData(**meta["init"]) if meta.get("init") else None
        times = meta["snapshot_times"]
    except (KeyError, TypeError) as exc:
        raise ArtifactError(f"incomplete metadata in {run_dir}: {exc}") from exc
    header, table = read_csv(run_dir / "series.csv")
    if tuple(header) != SERIES_COLUMNS:
        raise ArtifactError(f"unexpected series columns {header}")
    series = {c: table[:, j].copy() for j, c in enumerate(SERIES_COLUMNS)}
    snaps = []
    for i, t in enumerate(times):
        f, t_file = read_snapshot(run_dir / "snapshots" / f"{i:06d}.bin")
        if t_file != t:
            raise ArtifactError(f"snapshot {i} time {t_file} disagrees with metadata {t}")
        snaps.append(f)
    blowup = None
    if meta.get("blowup"):
        b = meta["blowup"]
        blowup = Blowup(b["step"], b["t"], b["reason"], series["max_grad"].copy())
    return Trajectory(config, init, meta["dt"], np.array(times), snaps, series, meta["status"], blowup,
                      meta.get("boundary_contamination", 0.0))


# ---------------------------------------------------------------------------
# reports


def write_decay_report(report, out_dir, extra: dict | None = None) -> list:
    out_dir = Path(out_dir)
    write_csv(out_dir / "decay.csv", report.COLUMNS, report.rows)
    summary = report.summary()
    if extra:
        summary.update(extra)
    write_json(out_dir / "decay.json", summary)
    return [out_dir / "decay.csv", out_dir / "decay.json"]


def write_ladder_report(ladder, out_dir, extra: dict | None = None) -> list:
    out_dir = Path(out_dir)
    rows = [[lv[c] for c in ladder.COLUMNS] for lv in ladder.levels]
    write_csv(out_dir / "ladder.csv", ladder.COLUMNS, rows)
    summary = ladder.summary()
    if extra:
        summary.update(extra)
    write_json(out_dir / "ladder.json", summary)
    return [out_dir / "ladder.csv", out_dir / "ladder.json"]


FEASIBILITY_COLUMNS = ("rho", "alpha", "c1", "c2", "c3", "margin_c1", "margin_c2", "margin_c3")


def write_certificate(cert, out_dir, feasibility_rows=None, inputs: dict | None = None) -> list:
    out_dir = Path(out_dir)
    doc = {"inputs": inputs or {}, "certificate": cert.to_dict(), "code_version": __version__}
    write_json(out_dir / "certificate.json", doc)
    written = [out_dir / "certificate.json"]
    if feasibility_rows is not None:
        write_csv(out_dir / "feasibility.csv", FEASIBILITY_COLUMNS,
                  [[r[c] for c in FEASIBILITY_COLUMNS] for r in feasibility_rows])
        written.append(out_dir / "feasibility.csv")
    return written
