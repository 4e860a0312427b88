"""Segmentation label masks: parsing, validation and floor-plan binarization.

Two on-disk encodings are supported:

* 8-bit indexed rasters (PNG or any lossless format Pillow reads) plus a
  class map ``{"0": "outside", "1": "wall", ...}``;
* the ASCII fixture grammar, one text line per pixel row, used for
  hand-written test geometry.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Mapping

import numpy as np
from PIL import Image

FLOORPLAN = "floor-plan"
INTERIOR = "interior"

FLOORPLAN_CLASSES = frozenset({"wall", "room", "window", "door", "outside"})
INTERIOR_CLASSES = frozenset({"wall", "ceiling", "floor", "window", "other", "void"})

DEFAULT_FLOORPLAN_VOCAB = {0: "outside", 1: "wall", 2: "room", 3: "window", 4: "door"}
DEFAULT_INTERIOR_VOCAB = {0: "void", 1: "wall", 2: "ceiling", 3: "floor", 4: "window", 5: "other"}

ASCII_GLYPHS = {
    FLOORPLAN: {"#": "wall", ".": "room", "W": "window", "D": "door", " ": "outside"},
    INTERIOR: {"w": "wall", "c": "ceiling", "f": "floor", "n": "window", "o": "other", " ": "void"},
}

_FLAVOR_CLASSES = {FLOORPLAN: FLOORPLAN_CLASSES, INTERIOR: INTERIOR_CLASSES}
_DEFAULT_VOCAB = {FLOORPLAN: DEFAULT_FLOORPLAN_VOCAB, INTERIOR: DEFAULT_INTERIOR_VOCAB}


class MaskError(ValueError):
    """Raised for masks that cannot be decoded or violate the class contract."""


class PixelState(IntEnum):
    BLOCKED = 0
    OPEN = 1
    OUTSIDE = 2


def _check_flavor(flavor: str) -> None:
    if flavor not in _FLAVOR_CLASSES:
        raise MaskError(f"unknown mask flavor {flavor!r}")


def validate_vocabulary(vocabulary: Mapping[int, str], flavor: str) -> dict[int, str]:
    _check_flavor(flavor)
    vocab = {int(k): str(v) for k, v in vocabulary.items()}
    expected = _FLAVOR_CLASSES[flavor]
    got = set(vocab.values())
    if got != expected:
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        raise MaskError(
            f"{flavor} vocabulary must cover exactly {sorted(expected)}; "
            f"missing={missing} unexpected={extra}"
        )
    return vocab


def load_vocabulary(path: str | Path, flavor: str) -> dict[int, str]:
    """Read a JSON class map sidecar (string ids to class names)."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return validate_vocabulary({int(k): v for k, v in raw.items()}, flavor)


@dataclass(frozen=True, eq=False)
class ClassMask:
    """Row-major per-pixel class ids with the vocabulary that names them."""

    labels: np.ndarray  # (height, width) uint8, read-only
    vocabulary: dict[int, str]
    flavor: str

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.uint8, copy=True)
        if labels.ndim != 2 or labels.size == 0:
            raise MaskError("mask must be a non-empty 2D raster")
        vocab = validate_vocabulary(self.vocabulary, self.flavor)
        _check_ids(labels, vocab)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "vocabulary", vocab)

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    def class_names(self) -> np.ndarray:
        """Per-pixel class names as an object array (mainly for debugging)."""
        lut = np.empty(256, dtype=object)
        for k, v in self.vocabulary.items():
            lut[k] = v
        return lut[self.labels]

    def class_lookup(self, name: str) -> np.ndarray:
        """Boolean raster of pixels whose class is ``name``."""
        ids = [k for k, v in self.vocabulary.items() if v == name]
        return np.isin(self.labels, ids)

    def __eq__(self, other):
        if not isinstance(other, ClassMask):
            return NotImplemented
        return (
            self.flavor == other.flavor
            and self.vocabulary == other.vocabulary
            and np.array_equal(self.labels, other.labels)
        )


def _check_ids(labels: np.ndarray, vocab: Mapping[int, str]) -> None:
    known = np.zeros(256, dtype=bool)
    known[list(vocab)] = True
    bad = ~known[labels]
    if bad.any():
        y, x = np.argwhere(bad)[0]
        raise MaskError(f"unknown class id {int(labels[y, x])} at pixel (x={x}, y={y})")


@dataclass(frozen=True, eq=False)
class PixelOccupancy:
    state: np.ndarray  # (height, width) uint8 of PixelState values

    @property
    def width(self) -> int:
        return self.state.shape[1]

    @property
    def height(self) -> int:
        return self.state.shape[0]

    @property
    def interior_pixel_count(self) -> int:
        return int(np.count_nonzero(self.state == PixelState.OPEN))

    def __eq__(self, other):
        if not isinstance(other, PixelOccupancy):
            return NotImplemented
        return np.array_equal(self.state, other.state)


def parse_ascii(text: str, flavor: str = FLOORPLAN) -> ClassMask:
    """Parse the ASCII fixture grammar into a mask using the default ids."""
    _check_flavor(flavor)
    glyphs = ASCII_GLYPHS[flavor]
    name_to_id = {v: k for k, v in _DEFAULT_VOCAB[flavor].items()}
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0]:
        raise MaskError("zero-area ASCII mask")
    width = len(lines[0])
    labels = np.empty((len(lines), width), dtype=np.uint8)
    for y, line in enumerate(lines):
        if len(line) != width:
            raise MaskError(f"ragged ASCII mask: row {y} has {len(line)} chars, expected {width}")
        for x, ch in enumerate(line):
            try:
                labels[y, x] = name_to_id[glyphs[ch]]
            except KeyError:
                raise MaskError(f"unknown glyph {ch!r} at pixel (x={x}, y={y})") from None
    return ClassMask(labels, dict(_DEFAULT_VOCAB[flavor]), flavor)


def to_ascii(mask: ClassMask) -> str:
    glyph_of = {name: g for g, name in ASCII_GLYPHS[mask.flavor].items()}
    lut = {k: glyph_of[v] for k, v in mask.vocabulary.items()}
    return "\n".join("".join(lut[int(v)] for v in row) for row in mask.labels) + "\n"


def parse_class_mask(
    path: str | Path,
    vocabulary: Mapping[int, str] | None = None,
    flavor: str = FLOORPLAN,
) -> ClassMask:
    """Load a label mask from disk.

    ``.txt`` files are read with the ASCII grammar (``vocabulary`` is then
    ignored); anything else is decoded as an 8-bit indexed raster whose
    pixel values are looked up in ``vocabulary`` (the flavor's default ids
    when omitted).
    """
    _check_flavor(flavor)
    path = Path(path)
    if path.suffix.lower() == ".txt":
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise MaskError(f"cannot read mask {path}: {exc}") from exc
        return parse_ascii(text, flavor)
    try:
        with Image.open(path) as img:
            if img.mode not in ("L", "P"):
                raise MaskError(f"{path}: expected an 8-bit indexed raster, got mode {img.mode}")
            labels = np.asarray(img, dtype=np.uint8)
    except MaskError:
        raise
    except Exception as exc:  # Pillow raises a zoo of types for bad files
        raise MaskError(f"cannot read mask {path}: {exc}") from exc
    if labels.size == 0:
        raise MaskError(f"{path}: zero-area image")
    if vocabulary is None:
        vocabulary = _DEFAULT_VOCAB[flavor]
    return ClassMask(labels, dict(vocabulary), flavor)


def save_indexed(mask: ClassMask, path: str | Path) -> None:
    Image.fromarray(np.ascontiguousarray(mask.labels), mode="L").save(path, format="PNG")


_FLOORPLAN_STATE = {
    "wall": PixelState.BLOCKED,
    "window": PixelState.BLOCKED,
    "room": PixelState.OPEN,
    "door": PixelState.OPEN,
    "outside": PixelState.OUTSIDE,
}


def binarize_floorplan(mask: ClassMask) -> PixelOccupancy:
    """Map floor-plan classes to blocked/open/outside pixel states.

    Walls and windows block (windows sit on the envelope), rooms and doors
    are open, everything labelled outside stays outside.
    """
    if mask.flavor != FLOORPLAN:
        raise MaskError(f"binarize_floorplan needs a {FLOORPLAN} mask, got {mask.flavor}")
    lut = np.full(256, PixelState.OUTSIDE, dtype=np.uint8)
    for k, name in mask.vocabulary.items():
        lut[k] = _FLOORPLAN_STATE[name]
    state = lut[mask.labels]
    state.setflags(write=False)
    occ = PixelOccupancy(state)
    if occ.interior_pixel_count == 0:
        raise MaskError("no interior: mask has zero open pixels")
    return occ
