"""Per-frame descriptor model, normalization, pixel descriptors, and file I/O.

A descriptor is a unit-length feature vector for one camera frame. Single
vectors are kept in float64 so the unit-norm guarantee is tight; bulk sets
are stored as float32 (CNN activations carry no more precision and conv3
vectors are 64896-dimensional).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    DimMismatch,
    EmptyImage,
    NonFiniteInput,
    NotUnitNorm,
    TruncatedFile,
    UnsupportedVersion,
    ZeroVector,
)

SQDS_MAGIC = b"SQDS"
SQDS_VERSION = 1

# Output size of each tap point of the reference CNN architecture.
LAYER_DIMS = {
    "conv1": 290400,
    "pool1": 69984,
    "conv2": 186624,
    "pool2": 43264,
    "conv3": 64896,
    "conv4": 64896,
    "conv5": 43264,
    "pool5": 9216,
    "fc6": 4096,
    "fc7": 4096,
    "fc8": 1000,
}

# Tags that carry no dimension expectation.
FREE_TAGS = ("pixel-patch", "custom")


@dataclass(frozen=True)
class Descriptor:
    """One frame's unit-length feature vector."""

    values: np.ndarray  # 1-D float64, unit L2 norm

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass
class DescriptorSet:
    """Ordered descriptors for one traversal of a route.

    ``values`` is an (N, dim) float32 array, one row per frame in temporal
    order. ``source_tag`` records where the vectors came from (a CNN layer
    name, "pixel-patch", or "custom").
    """

    values: np.ndarray
    source_tag: str = "custom"
    frame_names: list[str] | None = None

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.values, dtype=np.float32)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimMismatch(f"descriptor set must be (N, dim) with N, dim >= 1, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise NonFiniteInput("descriptor set contains NaN or Inf")
        if self.frame_names is not None and len(self.frame_names) != arr.shape[0]:
            raise DimMismatch("frame_names length differs from descriptor count")
        self.values = arr

    @property
    def count(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __len__(self) -> int:
        return self.count

    @classmethod
    def from_descriptors(
        cls,
        descriptors: list[Descriptor],
        source_tag: str = "custom",
        frame_names: list[str] | None = None,
    ) -> "DescriptorSet":
        if not descriptors:
            raise DimMismatch("descriptor set needs at least one descriptor")
        dims = {d.dim for d in descriptors}
        if len(dims) != 1:
            raise DimMismatch(f"descriptors disagree on dimension: {sorted(dims)}")
        stacked = np.stack([d.values for d in descriptors]).astype(np.float32)
        return cls(stacked, source_tag=source_tag, frame_names=frame_names)


@dataclass(frozen=True)
class PixelDescriptorConfig:
    """Down-sampling geometry for the raw-pixel descriptor."""

    target_width: int = 64
    target_height: int = 32
    patch_size: int = 8

    def __post_init__(self) -> None:
        if self.target_width < 1 or self.target_height < 1 or self.patch_size < 1:
            raise ValueError("pixel descriptor dimensions must be positive")
        if self.target_width % self.patch_size or self.target_height % self.patch_size:
            raise ValueError(
                f"target {self.target_width}x{self.target_height} not divisible "
                f"by patch size {self.patch_size}"
            )


def normalize(raw) -> Descriptor:
    """Scale a vector to unit L2 length.

    Raises ZeroVector for an all-zero input and NonFiniteInput if any
    element is NaN/Inf.
    """
    arr = np.asarray(raw, dtype=np.float64).reshape(-1)
    if arr.size < 1:
        raise ZeroVector("cannot normalize an empty vector")
    if not np.isfinite(arr).all():
        raise NonFiniteInput("vector contains NaN or Inf")
    peak = float(np.abs(arr).max())
    if peak == 0.0:
        raise ZeroVector("cannot normalize the zero vector")
    # prescale so the squared norm can neither underflow nor overflow
    scaled = arr / peak
    norm = float(np.sqrt(np.einsum("i,i->", scaled, scaled)))
    out = scaled / norm
    out.setflags(write=False)
    return Descriptor(out)


def _area_resample_weights(src: int, dst: int) -> np.ndarray:
    """(dst, src) weight matrix averaging source pixels by area overlap."""
    scale = src / dst
    weights = np.zeros((dst, src), dtype=np.float64)
    for o in range(dst):
        lo = o * scale
        hi = (o + 1) * scale
        k0 = int(np.floor(lo))
        k1 = min(int(np.ceil(hi)), src)
        for k in range(k0, k1):
            overlap = min(hi, k + 1) - max(lo, k)
            if overlap > 0:
                weights[o, k] = overlap
        weights[o] /= scale
    return weights


def _area_resize(img: np.ndarray, height: int, width: int) -> np.ndarray:
    """Area-average resampling to (height, width), float64 output."""
    src = img.astype(np.float64)
    wr = _area_resample_weights(img.shape[0], height)
    wc = _area_resample_weights(img.shape[1], width)
    # einsum keeps the summation order fixed (no BLAS dispatch)
    tmp = np.einsum("oi,iw->ow", wr, src)
    return np.einsum("ow,cw->oc", tmp, wc)


def pixel_descriptor(gray_image, config: PixelDescriptorConfig | None = None) -> Descriptor:
    """Down-sampled, patch-rescaled pixel descriptor of a grayscale image.

    The image is area-averaged down to the target size, split into square
    patches, and each patch's pixels are min-max rescaled to span [0, 255]
    (a constant patch maps to zeros). The flattened result is normalized
    to unit length, so an entirely featureless image raises ZeroVector.
    """
    if config is None:
        config = PixelDescriptorConfig()
    img = np.asarray(gray_image)
    if img.ndim != 2 or img.shape[0] == 0 or img.shape[1] == 0:
        raise EmptyImage(f"expected a non-empty 2-D image, got shape {img.shape}")

    resized = _area_resize(img, config.target_height, config.target_width)

    p = config.patch_size
    ph = config.target_height // p
    pw = config.target_width // p
    blocks = resized.reshape(ph, p, pw, p)
    mn = blocks.min(axis=(1, 3), keepdims=True)
    mx = blocks.max(axis=(1, 3), keepdims=True)
    span = mx - mn
    safe = np.where(span > 0, span, 1.0)
    rescaled = np.where(span > 0, (blocks - mn) * (255.0 / safe), 0.0)

    # (ph, p, pw, p) is resized.reshape's own layout, so this restores pixel order
    flat = rescaled.reshape(config.target_height, config.target_width)
    return normalize(flat.reshape(-1))


def validate_dim(dset: DescriptorSet, expected_source: str) -> bool:
    """Check the set's dimension against the declared source layer.

    Sources without a declared dimension ("pixel-patch", "custom", or any
    unknown tag) always validate.
    """
    tag = expected_source.strip().lower()
    if tag in LAYER_DIMS:
        return dset.dim == LAYER_DIMS[tag]
    return True


def save_descriptor_file(dset: DescriptorSet, path) -> None:
    """Write the binary descriptor file (see module README for the layout)."""
    tag = dset.source_tag.encode("utf-8")
    parts = [
        SQDS_MAGIC,
        struct.pack("<III", SQDS_VERSION, dset.count, dset.dim),
        struct.pack("<I", len(tag)),
        tag,
        np.ascontiguousarray(dset.values, dtype="<f4").tobytes(),
    ]
    if dset.frame_names is not None:
        parts.append(struct.pack("<I", len(dset.frame_names)))
        for name in dset.frame_names:
            raw = name.encode("utf-8")
            parts.append(struct.pack("<I", len(raw)))
            parts.append(raw)
    Path(path).write_bytes(b"".join(parts))


def load_descriptor_file(path, expected_dim: int | None = None) -> DescriptorSet:
    """Read a descriptor file, verifying structure and unit norms.

    Files are written normalized; rows are verified to be unit length
    within 1e-6 rather than silently re-normalized.
    """
    buf = Path(path).read_bytes()
    if len(buf) < 4 or buf[:4] != SQDS_MAGIC:
        raise BadMagic(f"{path}: not a descriptor file")
    off = 4

    def take(n: int, what: str) -> bytes:
        nonlocal off
        if off + n > len(buf):
            raise TruncatedFile(f"{path}: truncated while reading {what}")
        chunk = buf[off : off + n]
        off += n
        return chunk

    version, count, dim = struct.unpack("<III", take(12, "header"))
    if version != SQDS_VERSION:
        raise UnsupportedVersion(f"{path}: version {version}, expected {SQDS_VERSION}")
    if count < 1 or dim < 1:
        raise DimMismatch(f"{path}: invalid count={count} dim={dim}")
    if expected_dim is not None and dim != expected_dim:
        raise DimMismatch(f"{path}: dim {dim}, expected {expected_dim}")
    (tag_len,) = struct.unpack("<I", take(4, "source tag length"))
    tag = take(tag_len, "source tag").decode("utf-8")

    data = take(4 * count * dim, "descriptor rows")
    values = np.frombuffer(data, dtype="<f4").reshape(count, dim).copy()

    frame_names = None
    if off < len(buf):
        (n_names,) = struct.unpack("<I", take(4, "name table"))
        if n_names != count:
            raise TruncatedFile(f"{path}: name table has {n_names} entries for {count} rows")
        frame_names = []
        for _ in range(n_names):
            (name_len,) = struct.unpack("<I", take(4, "name length"))
            frame_names.append(take(name_len, "name").decode("utf-8"))

    norms = np.sqrt(np.einsum("ij,ij->i", values.astype(np.float64), values.astype(np.float64)))
    worst = float(np.abs(norms - 1.0).max())
    if worst > 1e-6:
        raise NotUnitNorm(f"{path}: row norm off by {worst:.2e} (> 1e-6)")

    return DescriptorSet(values, source_tag=tag, frame_names=frame_names)


def read_pgm(path) -> np.ndarray:
    """Read a binary 8-bit grayscale PGM (P5), returning a (h, w) uint8 array."""
    buf = Path(path).read_bytes()
    if buf[:2] != b"P5":
        raise BadMagic(f"{path}: not a P5 PGM file")

    fields: list[int] = []
    off = 2
    while len(fields) < 3:
        if off >= len(buf):
            raise TruncatedFile(f"{path}: PGM header ends early")
        ch = buf[off : off + 1]
        if ch == b"#":
            while off < len(buf) and buf[off : off + 1] != b"\n":
                off += 1
        elif ch.isspace():
            off += 1
        elif ch.isdigit():
            start = off
            while off < len(buf) and buf[off : off + 1].isdigit():
                off += 1
            fields.append(int(buf[start:off]))
        else:
            raise BadMagic(f"{path}: malformed PGM header")
    off += 1  # single whitespace after maxval

    width, height, maxval = fields
    if width == 0 or height == 0:
        raise EmptyImage(f"{path}: zero-sized image")
    if maxval > 255:
        raise UnsupportedVersion(f"{path}: only 8-bit PGM supported (maxval {maxval})")
    need = width * height
    raster = buf[off : off + need]
    if len(raster) < need:
        raise TruncatedFile(f"{path}: raster has {len(raster)} of {need} bytes")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(path, img: np.ndarray) -> None:
    arr = np.ascontiguousarray(img, dtype=np.uint8)
    if arr.ndim != 2 or arr.size == 0:
        raise EmptyImage(f"cannot write image of shape {arr.shape}")
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + arr.tobytes())
