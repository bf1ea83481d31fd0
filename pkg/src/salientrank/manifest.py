"""Dataset manifests: one JSON record per line, paths relative to the file.

A record ties together an image, its agreement map, its instance map,
and optionally a salient-object count for subitizing.  Loading checks
that every referenced file exists and that the three rasters of a
record share dimensions, so downstream code can assume consistency.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import DataError
from .images import image_size

_REQUIRED_KEYS = ("image_id", "image", "agreement", "instances")


@dataclass(frozen=True)
class ManifestRecord:
    image_id: str
    image: str
    agreement: str
    instances: str
    count: int | None = None


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    records: tuple[ManifestRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    def path(self, relative: str) -> Path:
        return self.root / relative

    @property
    def has_counts(self) -> bool:
        return all(r.count is not None for r in self.records)


def write_manifest(records, path) -> None:
    path = Path(path)
    lines = []
    for r in records:
        payload = {
            "image_id": r.image_id,
            "image": r.image,
            "agreement": r.agreement,
            "instances": r.instances,
        }
        if r.count is not None:
            payload["count"] = r.count
        lines.append(json.dumps(payload, sort_keys=True))
    path.write_text("\n".join(lines) + "\n")


def load_manifest(path) -> DatasetManifest:
    """Parse and eagerly validate a manifest file."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"manifest not found: {path}")
    root = path.parent
    records = []
    seen = set()
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: invalid JSON record: {exc}") from None
        missing = [k for k in _REQUIRED_KEYS if k not in payload]
        if missing:
            raise DataError(f"{path}:{lineno}: record is missing keys {missing}")
        image_id = str(payload["image_id"])
        if image_id in seen:
            raise DataError(f"{path}:{lineno}: duplicate image id {image_id!r}")
        seen.add(image_id)
        count = payload.get("count")
        if count is not None:
            count = int(count)
            if count < 0:
                raise DataError(f"{path}:{lineno}: negative count for {image_id!r}")
        records.append(
            ManifestRecord(
                image_id=image_id,
                image=str(payload["image"]),
                agreement=str(payload["agreement"]),
                instances=str(payload["instances"]),
                count=count,
            )
        )
    if not records:
        raise DataError(f"manifest {path} contains no records")

    for r in records:
        sizes = {}
        for kind in ("image", "agreement", "instances"):
            file = root / getattr(r, kind)
            if not file.is_file():
                raise DataError(f"{r.image_id}: missing {kind} file {file}")
            sizes[kind] = image_size(file)
        if len(set(sizes.values())) != 1:
            raise DataError(
                f"{r.image_id}: raster dimensions disagree: "
                + ", ".join(f"{k}={v[0]}x{v[1]}" for k, v in sizes.items())
            )
    return DatasetManifest(root=root, records=tuple(records))


__all__ = ["ManifestRecord", "DatasetManifest", "write_manifest", "load_manifest"]
