"""Strict, bit-exact file formats for maps, tensors, weights, boxes and masks.

All loaders validate and reject rather than coerce; a store followed by a
load reproduces the input byte for byte.

Formats:

* raster          -- raw little-endian float32, row-major, channel-outermost,
                     exactly 4 * width * height * channels bytes.
* bundle index    -- one record per line:
                     ``image_id<TAB>width<TAB>height<TAB>channels<TAB>relative_path``.
* boxes           -- one box per line: ``image_id<TAB>x0<TAB>y0<TAB>x1<TAB>y1``,
                     half-open coordinates, multiple lines per image allowed.
* mask            -- raw bytes, one per pixel, row-major, values in {0, 1, 255}.
* mask index      -- ``image_id<TAB>width<TAB>height<TAB>relative_path``.
* weights         -- raw little-endian float32 vector, 4 * channels bytes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .cam import ClassWeights, FeatureTensor, ScoreMap
from .localize import Box
from .metrics import GroundTruthBoxes, PixelMask
from .normalize import NormalizedMap


class FormatError(ValueError):
    """A file violated one of the on-disk format contracts."""


@dataclass(frozen=True)
class BundleEntry:
    image_id: str
    width: int
    height: int
    channels: int
    path: str


def load_raster(path, width: int, height: int, channels: int) -> np.ndarray:
    """Load a float32 raster as an array of shape (channels, height, width).

    The file must contain exactly 4 * width * height * channels bytes of
    finite little-endian float32 values.
    """
    if width < 1 or height < 1 or channels < 1:
        raise FormatError(f"raster dimensions must be >= 1, got {width}x{height}x{channels}")
    expected = 4 * width * height * channels
    with open(path, "rb") as fh:
        payload = fh.read()
    if len(payload) != expected:
        raise FormatError(
            f"{path}: expected {expected} bytes for {width}x{height}x{channels} "
            f"float32 raster, found {len(payload)}")
    flat = np.frombuffer(payload, dtype="<f4")
    finite = np.isfinite(flat)
    if not finite.all():
        pos = int(np.argmax(~finite))
        raise FormatError(f"{path}: non-finite value at element {pos}")
    return flat.reshape(channels, height, width).astype(np.float32)


def store_raster(path, data: np.ndarray) -> None:
    """Write a 2-d or 3-d float array as a raw little-endian float32 raster."""
    arr = np.asarray(data, dtype=np.float32)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3:
        raise ValueError(f"raster data must be 2-d or 3-d, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("refusing to store non-finite raster values")
    with open(path, "wb") as fh:
        fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_score_map(path, width: int, height: int, image_id: str = "") -> ScoreMap:
    data = load_raster(path, width, height, 1)
    return ScoreMap(data[0], image_id=image_id)


def load_feature_tensor(path, width: int, height: int, channels: int,
                        image_id: str = "") -> FeatureTensor:
    return FeatureTensor(load_raster(path, width, height, channels), image_id=image_id)


def load_weights(path, channels: int, class_id: int = 0) -> ClassWeights:
    """Load a classifier weight vector stored as raw float32 values."""
    data = load_raster(path, channels, 1, 1)
    return ClassWeights(data.ravel(), class_id=class_id)


def store_weights(path, weights: ClassWeights) -> None:
    store_raster(path, weights.weights.astype(np.float32).reshape(1, 1, -1))


def read_index(path) -> list[BundleEntry]:
    """Parse a bundle index file; every parse problem reports its line number."""
    entries = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise FormatError(f"{path}:{lineno}: expected 5 tab-separated fields, "
                                  f"got {len(parts)}")
            image_id, w_s, h_s, k_s, rel = parts
            try:
                w, h, k = int(w_s), int(h_s), int(k_s)
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-integer dimension field") from None
            if w < 1 or h < 1 or k < 1:
                raise FormatError(f"{path}:{lineno}: dimensions must be >= 1")
            if image_id in seen:
                raise FormatError(f"{path}:{lineno}: duplicate image id {image_id!r}")
            seen.add(image_id)
            entries.append(BundleEntry(image_id, w, h, k, rel))
    return entries


def write_index(path, entries) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(f"{e.image_id}\t{e.width}\t{e.height}\t{e.channels}\t{e.path}\n")


def load_map_bundle(index_path) -> list[ScoreMap]:
    """Load every raster of a score-map bundle (all entries must have 1 channel)."""
    root = os.path.dirname(os.path.abspath(index_path))
    maps = []
    for e in read_index(index_path):
        if e.channels != 1:
            raise FormatError(
                f"{index_path}: entry {e.image_id!r} has {e.channels} channels; "
                f"score maps must have exactly 1")
        maps.append(load_score_map(os.path.join(root, e.path), e.width, e.height,
                                   image_id=e.image_id))
    return maps


def write_map_bundle(out_dir, maps, index_name: str = "scoremaps.index",
                     raster_dir: str = "rasters") -> str:
    """Store score maps (or normalized maps, cast to float32) as a bundle.

    Returns the path of the written index file.
    """
    os.makedirs(os.path.join(out_dir, raster_dir), exist_ok=True)
    entries = []
    for i, m in enumerate(maps):
        rel = f"{raster_dir}/map_{i:05d}.raw"
        store_raster(os.path.join(out_dir, rel), np.asarray(m.data, dtype=np.float32))
        entries.append(BundleEntry(m.image_id, m.width, m.height, 1, rel))
    index_path = os.path.join(out_dir, index_name)
    write_index(index_path, entries)
    return index_path


def load_boxes(path) -> GroundTruthBoxes:
    """Parse a boxes file into per-image box lists (insertion-ordered)."""
    boxes: dict[str, list[Box]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise FormatError(f"{path}:{lineno}: expected 5 tab-separated fields, "
                                  f"got {len(parts)}")
            image_id = parts[0]
            try:
                x0, y0, x1, y1 = (int(v) for v in parts[1:])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-integer coordinate") from None
            if x0 < 0 or y0 < 0:
                raise FormatError(f"{path}:{lineno}: negative coordinate")
            if x0 >= x1 or y0 >= y1:
                raise FormatError(f"{path}:{lineno}: degenerate box "
                                  f"({x0}, {y0}, {x1}, {y1})")
            boxes.setdefault(image_id, []).append(Box(x0, y0, x1, y1))
    return GroundTruthBoxes(boxes)


def store_boxes(path, boxes_by_id: dict[str, list[Box]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for image_id, box_list in boxes_by_id.items():
            for b in box_list:
                fh.write(f"{image_id}\t{b.x0}\t{b.y0}\t{b.x1}\t{b.y1}\n")


def load_mask(path, width: int, height: int) -> PixelMask:
    """Load a label mask of exactly width * height bytes in {0, 1, 255}."""
    if width < 1 or height < 1:
        raise FormatError(f"mask dimensions must be >= 1, got {width}x{height}")
    with open(path, "rb") as fh:
        payload = fh.read()
    if len(payload) != width * height:
        raise FormatError(f"{path}: expected {width * height} bytes for a "
                          f"{width}x{height} mask, found {len(payload)}")
    flat = np.frombuffer(payload, dtype=np.uint8)
    legal = (flat == 0) | (flat == 1) | (flat == 255)
    if not legal.all():
        pos = int(np.argmax(~legal))
        raise FormatError(f"{path}: illegal label byte {flat[pos]} at offset {pos}")
    return PixelMask(flat.reshape(height, width))


def store_mask(path, mask: PixelMask) -> None:
    with open(path, "wb") as fh:
        fh.write(np.ascontiguousarray(mask.labels, dtype=np.uint8).tobytes())


def read_mask_index(path) -> list[tuple[str, int, int, str]]:
    records = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise FormatError(f"{path}:{lineno}: expected 4 tab-separated fields, "
                                  f"got {len(parts)}")
            image_id, w_s, h_s, rel = parts
            try:
                w, h = int(w_s), int(h_s)
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-integer dimension field") from None
            if w < 1 or h < 1:
                raise FormatError(f"{path}:{lineno}: dimensions must be >= 1")
            if image_id in seen:
                raise FormatError(f"{path}:{lineno}: duplicate image id {image_id!r}")
            seen.add(image_id)
            records.append((image_id, w, h, rel))
    return records


def load_mask_bundle(index_path) -> dict[str, PixelMask]:
    root = os.path.dirname(os.path.abspath(index_path))
    masks = {}
    for image_id, w, h, rel in read_mask_index(index_path):
        masks[image_id] = load_mask(os.path.join(root, rel), w, h)
    return masks


def write_mask_bundle(out_dir, masks: dict[str, PixelMask],
                      index_name: str = "masks.index", mask_dir: str = "masks") -> str:
    os.makedirs(os.path.join(out_dir, mask_dir), exist_ok=True)
    lines = []
    for i, (image_id, mask) in enumerate(masks.items()):
        rel = f"{mask_dir}/mask_{i:05d}.raw"
        store_mask(os.path.join(out_dir, rel), mask)
        lines.append((image_id, mask.width, mask.height, rel))
    index_path = os.path.join(out_dir, index_name)
    with open(index_path, "w", encoding="utf-8") as fh:
        for image_id, w, h, rel in lines:
            fh.write(f"{image_id}\t{w}\t{h}\t{rel}\n")
    return index_path


def store_pgm(path, norm_map: NormalizedMap) -> None:
    """Export a normalized map as a binary 8-bit PGM grayscale image."""
    gray = np.rint(norm_map.data * 255.0).astype(np.uint8)
    header = f"P5\n{norm_map.width} {norm_map.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(gray.tobytes())
