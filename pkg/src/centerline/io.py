"""On-disk formats: raw grid files, scene JSON and prediction manifests.

A grid file is one line of JSON header followed by little-endian float32
values, row-major with the channel index fastest.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInput
from .extraction import CenterlineInstance
from .grid import GridSpec, QuadDirection, as_polyline
from .metrics.topology import SceneGraph
from .targets import quad_direction_label

__all__ = [
    "FormatError",
    "SceneInstance",
    "Scene",
    "write_grid",
    "read_grid",
    "read_scene",
    "write_scene",
    "dumps_canonical",
    "MANIFEST_NAME",
    "read_manifest",
    "write_manifest",
]

MANIFEST_NAME = "manifest.json"
_F32 = np.dtype("<f4")


class FormatError(InvalidInput):
    """A file does not follow its declared format."""


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


# -- grid files --------------------------------------------------------------


def grid_header(spec: GridSpec, channels: int) -> dict:
    return {
        "h": spec.height_cells,
        "w": spec.width_cells,
        "c": int(channels),
        "dtype": "f32",
        "cell_m": spec.cell_size_m,
        "origin": list(spec.origin_world),
        "z_range": [spec.z_min_m, spec.z_max_m],
    }


def write_grid(path, data, spec: GridSpec) -> None:
    arr = np.asarray(data, dtype=float)
    if arr.shape[:2] != spec.shape or arr.ndim not in (2, 3):
        raise InvalidInput(f"grid shape {arr.shape} does not match spec {spec.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("grid values must be finite")
    channels = 1 if arr.ndim == 2 else arr.shape[2]
    header = json.dumps(grid_header(spec, channels), sort_keys=True, separators=(",", ":"))
    payload = arr.astype(_F32).tobytes(order="C")
    _atomic_write(Path(path), header.encode("utf-8") + b"\n" + payload)


def read_grid(path):
    """Return ``(array, spec)``; 2-D for one channel, else ``(h, w, c)``."""
    with open(path, "rb") as fh:
        line = fh.readline()
        if not line.endswith(b"\n"):
            raise FormatError(f"{path}: missing header line")
        try:
            header = json.loads(line.decode("utf-8"))
            h, w, c = int(header["h"]), int(header["w"]), int(header["c"])
            if header.get("dtype") != "f32":
                raise FormatError(f"{path}: unsupported dtype {header.get('dtype')!r}")
            spec = GridSpec(
                height_cells=h,
                width_cells=w,
                cell_size_m=float(header["cell_m"]),
                origin_world=tuple(header["origin"]),
                z_min_m=float(header["z_range"][0]),
                z_max_m=float(header["z_range"][1]),
            )
        except FormatError:
            raise
        except (ValueError, KeyError, TypeError, IndexError) as exc:
            raise FormatError(f"{path}: bad header: {exc}") from None
        if c <= 0:
            raise FormatError(f"{path}: channel count must be positive")
        expected = 4 * h * w * c
        payload = fh.read(expected + 1)
    if len(payload) != expected:
        raise FormatError(f"{path}: payload is {len(payload)} bytes, header declares {expected}")
    arr = np.frombuffer(payload, dtype=_F32).astype(float)
    arr = arr.reshape((h, w) if c == 1 else (h, w, c))
    if not np.all(np.isfinite(arr)):
        raise FormatError(f"{path}: non-finite values")
    return arr, spec


# -- scene files -------------------------------------------------------------


@dataclass
class SceneInstance:
    id: str
    polyline: np.ndarray
    confidence: float = 1.0
    direction: QuadDirection | None = None
    bezier_cp: np.ndarray | None = None

    def __post_init__(self):
        self.polyline = as_polyline(self.polyline)
        if not 0.0 <= self.confidence <= 1.0:
            raise InvalidInput(f"instance {self.id!r}: confidence outside [0, 1]")
        if self.direction is None:
            self.direction = quad_direction_label(self.polyline)
        else:
            self.direction = QuadDirection.parse(self.direction)
        if self.bezier_cp is not None:
            cp = np.asarray(self.bezier_cp, dtype=float)
            if cp.ndim != 2 or cp.shape[1] != 3 or not np.all(np.isfinite(cp)):
                raise InvalidInput(f"instance {self.id!r}: bezier_cp must be finite (K, 3)")
            self.bezier_cp = cp

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "direction": self.direction.value,
            "confidence": float(self.confidence),
            "polyline": [[float(v) for v in p] for p in self.polyline],
        }
        if self.bezier_cp is not None:
            out["bezier_cp"] = [[float(v) for v in p] for p in self.bezier_cp]
        return out


@dataclass
class Scene:
    spec: GridSpec
    instances: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    footprint: list | None = None

    def __post_init__(self):
        ids = [inst.id for inst in self.instances]
        if len(set(ids)) != len(ids):
            raise InvalidInput("instance ids must be unique")
        self.edges = [(str(s), str(d), float(c)) for s, d, c in self.edges]
        # validates references, self-loops and confidence ranges
        self.graph()

    def graph(self) -> SceneGraph:
        return SceneGraph(
            {inst.id: (inst.polyline, inst.confidence) for inst in self.instances},
            list(self.edges),
        )

    def to_dict(self) -> dict:
        out = {
            "spec": self.spec.to_dict(),
            "instances": [inst.to_dict() for inst in self.instances],
            "edges": [[s, d, c] for s, d, c in self.edges],
        }
        if self.footprint is not None:
            out["footprint"] = self.footprint
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Scene":
        if not isinstance(data, dict):
            raise FormatError("scene must be a JSON object")
        try:
            spec = GridSpec.from_dict(data["spec"]) if "spec" in data else GridSpec()
            instances = [
                SceneInstance(
                    id=str(item["id"]),
                    polyline=item["polyline"],
                    confidence=float(item.get("confidence", 1.0)),
                    direction=item.get("direction"),
                    bezier_cp=item.get("bezier_cp"),
                )
                for item in data.get("instances", [])
            ]
            edges = [(e[0], e[1], e[2] if len(e) > 2 else 1.0) for e in data.get("edges", [])]
        except InvalidInput as exc:
            raise FormatError(str(exc)) from None
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise FormatError(f"malformed scene: {exc!r}") from None
        footprint = data.get("footprint")
        try:
            return cls(spec, instances, edges, footprint)
        except InvalidInput as exc:
            raise FormatError(str(exc)) from None


def read_scene(path) -> Scene:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from None
    return Scene.from_dict(data)


def write_scene(path, scene: Scene) -> None:
    _atomic_write(Path(path), dumps_canonical(scene.to_dict()).encode("utf-8"))


# -- prediction manifests ----------------------------------------------------


def write_manifest(directory, spec: GridSpec, entries: list, edges=(), footprint=None) -> Path:
    """Write the manifest last; it is the commit point for a directory of grids."""
    doc = {"spec": spec.to_dict(), "instances": entries, "edges": [list(e) for e in edges]}
    if footprint is not None:
        doc["footprint"] = footprint
    path = Path(directory) / MANIFEST_NAME
    _atomic_write(path, dumps_canonical(doc).encode("utf-8"))
    return path


def read_manifest(directory):
    """Load a prediction directory.

    Returns ``(spec, instances, edges, footprint)`` where ``instances`` are
    :class:`CenterlineInstance` objects built from the referenced grids.
    """
    directory = Path(directory)
    path = directory / MANIFEST_NAME
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise FormatError(f"{path}: manifest not found") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from None
    try:
        spec = GridSpec.from_dict(doc["spec"])
        instances = []
        for item in doc["instances"]:
            grids = {}
            for key in ("prob", "offset", "height"):
                arr, gspec = read_grid(directory / item[key])
                if gspec.shape != spec.shape:
                    raise FormatError(f"{item[key]}: grid shape differs from manifest spec")
                grids[key] = arr
            instances.append(
                CenterlineInstance(
                    spec=spec,
                    direction=item["direction"],
                    class_confidence=float(item.get("confidence", 1.0)),
                    prob_map=grids["prob"],
                    offset=grids["offset"],
                    height=grids["height"],
                    bezier_cp=item.get("bezier_cp"),
                    id=str(item["id"]),
                )
            )
        edges = [tuple(e) for e in doc.get("edges", [])]
    except FormatError:
        raise
    except InvalidInput as exc:
        raise FormatError(str(exc)) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed manifest: {exc!r}") from None
    return spec, instances, edges, doc.get("footprint")
