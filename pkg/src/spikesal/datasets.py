"""Fixation datasets on disk and synthetic benchmark stimuli."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .metrics import FixationData
from .stimulus import RGBImage, StimulusError, load_gray, resize

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

COLORMIX = (
    ("red", (1.0, 0.0, 0.0)),
    ("green", (0.0, 1.0, 0.0)),
    ("blue", (0.0, 0.0, 1.0)),
    ("yellow", (1.0, 1.0, 0.0)),
    ("cyan", (0.0, 1.0, 1.0)),
    ("magenta", (1.0, 0.0, 1.0)),
)


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetEntry:
    identifier: str
    stimulus: Path
    fixations: Path
    density: Path | None = None


def _images_by_stem(directory: Path) -> dict[str, Path]:
    found: dict[str, Path] = {}
    for p in sorted(directory.iterdir()):
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES:
            found.setdefault(p.stem, p)
    return found


def scan_dataset(root: str | Path) -> list[DatasetEntry]:
    """Pair ``stimuli/``, ``fixations/`` and optional ``density/`` files by filename stem."""
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} is not a directory")
    for sub in ("stimuli", "fixations"):
        if not (root / sub).is_dir():
            raise DatasetError(f"missing subdirectory {root / sub}")
    stimuli = _images_by_stem(root / "stimuli")
    fixations = _images_by_stem(root / "fixations")
    density = _images_by_stem(root / "density") if (root / "density").is_dir() else {}

    entries = []
    for stem in sorted(stimuli):
        if stem not in fixations:
            log.warning("stimulus %s has no fixation map; skipped", stimuli[stem].name)
            continue
        entries.append(DatasetEntry(stem, stimuli[stem], fixations[stem], density.get(stem)))
    return entries


def map_points(points: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """Move each fixated pixel to its nearest pixel on a grid of size ``dims``."""
    h, w = points.shape
    th, tw = dims
    out = np.zeros((th, tw), dtype=bool)
    rows, cols = np.nonzero(points)
    r = np.clip(np.floor((rows + 0.5) * th / h).astype(int), 0, th - 1)
    c = np.clip(np.floor((cols + 0.5) * tw / w).astype(int), 0, tw - 1)
    out[r, c] = True
    return out


def load_fixations(
    path: str | Path, dims: tuple[int, int], density_path: str | Path | None = None
) -> FixationData:
    raw = load_gray(path)
    points = map_points(raw > 0, dims)
    if not points.any():
        raise DatasetError(f"zero fixations in {path}")
    density = None
    if density_path is not None:
        density = resize(load_gray(density_path), dims)
    return FixationData(points, density)


# -- synthetic stimuli -------------------------------------------------------


def _partition(n: int, parts: int) -> list[tuple[int, int]]:
    edges = [round(k * n / parts) for k in range(parts + 1)]
    return list(zip(edges[:-1], edges[1:]))


def synth_colormix(dims: tuple[int, int] = (64, 64)) -> RGBImage:
    """Six full-saturation vertical stripes: red, green, blue, yellow, cyan, magenta."""
    h, w = dims
    if w < 6 or h < 1:
        raise DatasetError("colormix needs at least 6 columns")
    img = np.zeros((h, w, 3))
    for (lo, hi), (_, rgb) in zip(_partition(w, 6), COLORMIX):
        img[:, lo:hi] = rgb
    return RGBImage.from_array(img)


def colormix_regions(dims: tuple[int, int] = (64, 64)) -> dict[str, np.ndarray]:
    h, w = dims
    regions = {}
    for (lo, hi), (name, _) in zip(_partition(w, 6), COLORMIX):
        mask = np.zeros((h, w), dtype=bool)
        mask[:, lo:hi] = True
        regions[name] = mask
    return regions


def draw_bar(
    canvas: np.ndarray, center: tuple[float, float], angle: float, length: float, width: float,
    value: float = 1.0, supersample: int = 4,
) -> np.ndarray:
    """Rasterize a rectangle bar; pixels at least half covered are set. Returns the bar mask.

    ``center`` is (row, col) in pixel coordinates. ``angle`` is counterclockwise
    from the x axis with y pointing up.
    """
    h, w = canvas.shape[:2]
    offs = (np.arange(supersample) + 0.5) / supersample - 0.5
    rows = np.arange(h)[:, None, None, None] + offs[None, None, :, None]
    cols = np.arange(w)[None, :, None, None] + offs[None, None, None, :]
    dx = cols - center[1]
    dy_up = -(rows - center[0])
    along = dx * math.cos(angle) + dy_up * math.sin(angle)
    perp = -dx * math.sin(angle) + dy_up * math.cos(angle)
    inside = (np.abs(along) <= length / 2) & (np.abs(perp) <= width / 2)
    mask = inside.mean(axis=(2, 3)) >= 0.5
    canvas[mask] = value
    return mask


def synth_oriented_bars(dims: tuple[int, int] = (32, 256), width: float = 2.0) -> np.ndarray:
    """Eight cells left to right, cell k holding a white bar at angle k*pi/8 on black."""
    h, w = dims
    if w < 8 or h < 1:
        raise DatasetError("oriented bars need at least 8 columns")
    img = np.zeros((h, w))
    for k, (lo, hi) in enumerate(_partition(w, 8)):
        length = 0.75 * min(hi - lo, h)
        center = ((h - 1) / 2, (lo + hi - 1) / 2)
        draw_bar(img, center, k * math.pi / 8, length, width)
    return img


def oriented_bar_regions(dims: tuple[int, int] = (32, 256)) -> list[np.ndarray]:
    h, w = dims
    regions = []
    for lo, hi in _partition(w, 8):
        mask = np.zeros((h, w), dtype=bool)
        mask[:, lo:hi] = True
        regions.append(mask)
    return regions


def _draw_disc(canvas: np.ndarray, center, radius: float, rgb) -> np.ndarray:
    h, w = canvas.shape[:2]
    rr, cc = np.mgrid[0:h, 0:w]
    mask = (rr - center[0]) ** 2 + (cc - center[1]) ** 2 <= radius**2
    canvas[mask] = rgb
    return mask


def _jittered_grid(dims, n_side: int, margin: float, rng: np.random.Generator) -> list[tuple[float, float]]:
    h, w = dims
    ch, cw = h / n_side, w / n_side
    centers = []
    for i in range(n_side):
        for j in range(n_side):
            jr = max(0.0, ch / 2 - margin)
            jc = max(0.0, cw / 2 - margin)
            centers.append((
                (i + 0.5) * ch - 0.5 + rng.uniform(-jr, jr),
                (j + 0.5) * cw - 0.5 + rng.uniform(-jc, jc),
            ))
    return centers


def synth_popout(
    kind: str, dims: tuple[int, int] = (64, 64), seed: int = 0
) -> tuple[RGBImage, np.ndarray]:
    """Singleton-among-distractors image and the singleton's mask.

    ``color``: one red disc among 15 green discs on mid gray.
    ``orientation``: one vertical bar among 24 horizontal bars on black.
    """
    rng = np.random.default_rng(seed)
    h, w = dims
    if kind == "color":
        radius = max(1.5, min(h, w) / 16)
        img = np.full((h, w, 3), 0.5)
        centers = _jittered_grid(dims, 4, radius + 1.5, rng)
        target = int(rng.integers(len(centers)))
        mask = None
        for k, c in enumerate(centers):
            if k == target:
                mask = _draw_disc(img, c, radius, (1.0, 0.0, 0.0))
            else:
                _draw_disc(img, c, radius, (0.0, 1.0, 0.0))
        return RGBImage.from_array(img), mask
    if kind == "orientation":
        length = max(3.0, min(h, w) / 8)
        width = 2.0
        gray = np.zeros((h, w))
        centers = _jittered_grid(dims, 5, length / 2 + 1.5, rng)
        target = int(rng.integers(len(centers)))
        mask = None
        for k, c in enumerate(centers):
            angle = math.pi / 2 if k == target else 0.0
            m = draw_bar(gray, c, angle, length, width)
            if k == target:
                mask = m
        return RGBImage.from_array(gray), mask
    raise DatasetError(f"unknown pop-out kind {kind!r}; expected 'color' or 'orientation'")


def write_surrogate_dataset(root: str | Path, n_images: int = 10, dims: tuple[int, int] = (64, 64), seed: int = 0) -> list[str]:
    """Write pop-out images with fixations planted on the targets in the canonical layout."""
    from PIL import Image

    root = Path(root)
    for sub in ("stimuli", "fixations"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    stems = []
    for k in range(n_images):
        kind = "color" if k % 2 == 0 else "orientation"
        img, mask = synth_popout(kind, dims, seed + k)
        stem = f"popout_{k:03d}"
        Image.fromarray(np.round(img.stack() * 255).astype(np.uint8), "RGB").save(root / "stimuli" / f"{stem}.png")
        Image.fromarray((mask * 255).astype(np.uint8), "L").save(root / "fixations" / f"{stem}.png")
        stems.append(stem)
    return stems
