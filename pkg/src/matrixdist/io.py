"""CSV and JSON artifacts: matrices, replica directories, reports."""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .errors import ParameterError
from .matdist import EmpiricalMatrixDistribution, SampleMatrix

DIST_MANIFEST = "manifest.json"


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    # repr is the shortest string that round-trips to the same double
    return repr(float(x))


def csv_text(rows: Iterable[Iterable[Any]]) -> str:
    return "".join(",".join(_fmt(v) if isinstance(v, (float, np.floating)) else str(v)
                            for v in row) + "\n" for row in rows)


def write_csv(path, rows) -> Path:
    _atomic_write(Path(path), csv_text(rows))
    return Path(path)


def write_matrix_csv(path, values) -> Path:
    values = np.asarray(values, dtype=float)
    _atomic_write(Path(path), "".join(",".join(map(_fmt, row)) + "\n" for row in values))
    return Path(path)


def read_matrix_csv(path) -> np.ndarray:
    try:
        values = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except (OSError, ValueError) as exc:
        raise ParameterError(f"cannot read matrix {path}: {exc}") from None
    return values


def write_json(path, obj) -> Path:
    _atomic_write(Path(path), json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return Path(path)


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, ValueError) as exc:
        raise ParameterError(f"cannot read {path}: {exc}") from None


def to_jsonable(obj):
    if hasattr(obj, "to_dict"):
        obj = obj.to_dict()
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def sidecar_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".manifest.json")


def write_sample_matrix(path, mat: SampleMatrix) -> list[Path]:
    return [write_matrix_csv(path, mat.values), write_json(sidecar_path(path), mat.manifest())]


def read_sample_matrix(path) -> SampleMatrix:
    values = read_matrix_csv(path)
    side = sidecar_path(path)
    meta = read_json(side) if side.exists() else {}
    return SampleMatrix(values, meta.get("kernel_id", "unknown"), meta.get("grid_kind", "unknown"),
                        int(meta.get("seed", 0)),
                        bool(meta.get("symmetric", np.array_equal(values, values.T))))


def replica_name(r: int) -> str:
    return f"replica_{r:05d}.csv"


def write_distribution(directory, emp: EmpiricalMatrixDistribution) -> list[Path]:
    directory = Path(directory)
    paths = [write_matrix_csv(directory / replica_name(r), mat.values)
             for r, mat in enumerate(emp.matrices)]
    paths.append(write_json(directory / DIST_MANIFEST, emp.manifest()))
    return paths


def read_distribution(directory) -> EmpiricalMatrixDistribution:
    directory = Path(directory)
    if not directory.is_dir():
        raise ParameterError(f"{directory} is not a distribution directory")
    meta = read_json(directory / DIST_MANIFEST)
    mats = []
    for r in range(int(meta["replicas"])):
        values = read_matrix_csv(directory / replica_name(r))
        mats.append(SampleMatrix(values, meta["kernel_id"], meta["grid_kind"],
                                 int(meta["base_seed"]), np.array_equal(values, values.T), r))
    emp = EmpiricalMatrixDistribution(tuple(mats), meta["kernel_id"], meta["grid_kind"],
                                      int(meta["base_seed"]))
    if emp.order != int(meta["order"]):
        raise ParameterError(f"{directory}: replicas do not have the declared order")
    return emp
