"""Synthetic descriptor pairs with exact ground truth.

Reference traversals are smooth random walks on the unit sphere, so
adjacent frames stay similar the way consecutive camera frames do. The
query traversal revisits the same route at a configurable speed ratio,
with additive condition noise and a deterministic coordinate-pair rotation
standing in for a lateral viewpoint shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .descriptor import DescriptorSet, save_descriptor_file
from .errors import BadConfig
from .evaluate import GroundTruth
from .seqmatch import _round_half_away


@dataclass(frozen=True)
class SynthConfig:
    n_frames: int
    dim: int
    condition_noise: float = 0.0  # L2 magnitude of the per-frame perturbation
    viewpoint_shift: float = 0.0  # fraction in [0, 0.5]
    speed_ratio: float = 1.0  # query/reference frame-rate ratio in [0.8, 1.2]
    seed: int = 0
    step_angle: float = 0.3  # radians per reference step

    def __post_init__(self) -> None:
        if self.n_frames < 4:
            raise BadConfig(f"n_frames must be >= 4, got {self.n_frames}")
        if self.dim < 2:
            raise BadConfig(f"dim must be >= 2, got {self.dim}")
        if self.condition_noise < 0:
            raise BadConfig(f"condition_noise must be >= 0, got {self.condition_noise}")
        if not 0 <= self.viewpoint_shift <= 0.5:
            raise BadConfig(f"viewpoint_shift must be in [0, 0.5], got {self.viewpoint_shift}")
        if not 0.8 <= self.speed_ratio <= 1.2:
            raise BadConfig(f"speed_ratio must be in [0.8, 1.2], got {self.speed_ratio}")
        if not 0 < self.step_angle < math.pi / 2:
            raise BadConfig(f"step_angle must be in (0, pi/2), got {self.step_angle}")


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.sqrt((v * v).sum())


def _sphere_walk(rng: np.random.Generator, n: int, dim: int, step: float) -> np.ndarray:
    """Random walk of fixed angular step on the unit sphere."""
    out = np.empty((n, dim), dtype=np.float64)
    v = _unit(rng.standard_normal(dim))
    out[0] = v
    cos_a, sin_a = math.cos(step), math.sin(step)
    for t in range(1, n):
        while True:
            target = rng.standard_normal(dim)
            w = target - (target @ v) * v
            norm = np.sqrt((w * w).sum())
            if norm > 1e-12:
                break
        v = _unit(cos_a * v + sin_a * (w / norm))
        out[t] = v
    return out


def _pair_rotation(arr: np.ndarray, fraction: float) -> np.ndarray:
    """Rotate each (2m, 2m+1) coordinate pair by fraction * pi radians."""
    if fraction == 0.0:
        return arr
    phi = fraction * math.pi
    c, s = math.cos(phi), math.sin(phi)
    out = arr.copy()
    even = np.arange(0, arr.shape[-1] - 1, 2)
    x = arr[..., even]
    y = arr[..., even + 1]
    out[..., even] = c * x - s * y
    out[..., even + 1] = s * x + c * y
    return out


def generate_pair(config: SynthConfig) -> tuple[DescriptorSet, DescriptorSet, GroundTruth]:
    """Build (reference, query, ground truth), fully determined by the seed."""
    rng = np.random.default_rng(config.seed)
    ref = _sphere_walk(rng, config.n_frames, config.dim, config.step_angle)

    n_query = int(math.floor((config.n_frames - 1) / config.speed_ratio)) + 1
    mapping = {}
    query = np.empty((n_query, config.dim), dtype=np.float64)
    for j in range(n_query):
        r = min(_round_half_away(j * config.speed_ratio), config.n_frames - 1)
        mapping[j] = r
        query[j] = ref[r]

    query = _pair_rotation(query, config.viewpoint_shift)
    if config.condition_noise > 0:
        for j in range(n_query):
            g = _unit(rng.standard_normal(config.dim))
            query[j] = _unit(query[j] + config.condition_noise * g)

    ref_set = DescriptorSet(ref.astype(np.float32), source_tag="custom")
    query_set = DescriptorSet(query.astype(np.float32), source_tag="custom")
    return ref_set, query_set, GroundTruth(mapping, query_count=n_query)


def write_dataset(config: SynthConfig, out_dir) -> tuple[Path, Path, Path]:
    """Generate a pair and write reference.sqds, query.sqds, and gt.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ref, query, gt = generate_pair(config)
    ref_path = out / "reference.sqds"
    query_path = out / "query.sqds"
    gt_path = out / "gt.csv"
    save_descriptor_file(ref, ref_path)
    save_descriptor_file(query, query_path)
    gt.to_csv(gt_path)
    return ref_path, query_path, gt_path
