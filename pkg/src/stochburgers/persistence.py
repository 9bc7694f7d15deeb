"""CSV statistics, trajectory archives and run manifests.

Floats are written with 17 significant digits so every value survives a
text round trip exactly. Archives are zip files with fixed timestamps, so
identical data gives identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import zipfile
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import numpy as np
import yaml

from .analytic import CorrelationTable

__all__ = [
    "format_float",
    "write_csv",
    "read_csv",
    "mean_energy_rows",
    "correlation_rows",
    "fit_rows",
    "save_trajectories",
    "load_trajectories",
    "file_digest",
    "write_manifest",
    "read_manifest",
    "artifact_version",
]

MEAN_ENERGY_COLUMNS = ("t", "estimate", "stderr", "M")
CORRELATION_COLUMNS = ("t", "r", "C", "C_hat", "rho", "stderr")
FIT_COLUMNS = ("window_lo", "window_hi", "exponent", "prefactor", "r2")

_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


def format_float(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.17g}"


def write_csv(path: Path, columns, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_float(v) for v in row])
    return path


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return header, np.array([[float(v) for v in row] for row in body]).reshape(len(body), len(header))


def mean_energy_rows(result):
    for t, est, se in zip(result.times, result.estimate, result.stderr):
        yield t, est, se, result.n_trajectories


def correlation_rows(table: CorrelationTable):
    for i, t in enumerate(table.times):
        for j, r in enumerate(table.offsets):
            yield (t, r, table.values[i, j], table.averaged[i, j], table.normalized[i, j],
                   table.stderr[i, j])


def fit_rows(fits):
    for f in fits:
        yield f.window[0], f.window[1], f.exponent, f.prefactor, f.r_squared


def save_trajectories(path: Path, **arrays) -> Path:
    """``np.savez``-compatible archive with reproducible bytes."""
    path = Path(path)
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        for name in sorted(arrays):
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.ascontiguousarray(arrays[name]), allow_pickle=False)
            info = zipfile.ZipInfo(f"{name}.npy", date_time=_ZIP_EPOCH)
            info.external_attr = 0o644 << 16
            zf.writestr(info, buf.getvalue())
    return path


def load_trajectories(path: Path) -> dict[str, np.ndarray]:
    with np.load(Path(path), allow_pickle=False) as data:
        return {k: data[k] for k in data.files}


def file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def artifact_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def write_manifest(directory: Path, config: dict, files: list[Path], blowups=(),
                   extra: dict | None = None) -> Path:
    """``manifest.yaml`` with the resolved config, digests and blow-up events."""
    directory = Path(directory)
    doc = {
        "artifact_version": artifact_version(),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": config,
        "files": {Path(f).name: file_digest(f) for f in files},
        "blowups": [{"trajectory": int(i), "time": float(t)} for i, t in blowups],
    }
    if extra:
        doc.update(extra)
    path = directory / "manifest.yaml"
    path.write_text(yaml.safe_dump(doc, sort_keys=False))
    return path


def read_manifest(directory: Path) -> dict:
    return yaml.safe_load((Path(directory) / "manifest.yaml").read_text())
