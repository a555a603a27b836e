"""Scene assembly: camera, directional light, and the sweepable test box.

The box is a 2x2x2 interior open at z=-1 where the camera sits. A single
directional light swings on a 0..180 degree arc across that opening, always
tilted 30 degrees downward, so angle 90 shines straight in and the extremes
graze the opening. One of three primitive objects (or none) sits near the
center and rotates with its own sweep angle.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import Box, Cylinder, Rect, Sphere, rotation_xy

__all__ = [
    "DirectionalLight",
    "Camera",
    "Scene",
    "light_direction",
    "cornell_box",
    "OBJECT_KINDS",
]

OBJECT_KINDS = ("sphere", "cube", "cylinder", "none")

LIGHT_TILT_DEG = 30.0
LIGHT_RADIANCE = (2.2, 2.1, 2.0)
ENV_RADIANCE = (0.15, 0.17, 0.2)

_WALL_WHITE = (0.75, 0.75, 0.75)
_WALL_RED = (0.75, 0.15, 0.15)
_WALL_GREEN = (0.15, 0.75, 0.15)
_OBJECT_ALBEDO = {
    "sphere": (0.85, 0.55, 0.25),
    "cube": (0.3, 0.5, 0.85),
    "cylinder": (0.8, 0.3, 0.6),
}


@dataclass(frozen=True)
class DirectionalLight:
    direction: tuple[float, float, float]  # direction the light travels, unit length
    radiance: tuple[float, float, float]

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=np.float64)
        if abs(float(np.linalg.norm(d)) - 1.0) > 1e-6:
            raise ValueError(f"light direction must be unit length, got {self.direction}")


def light_direction(angle_deg: float) -> tuple[float, float, float]:
    """Travel direction for a sweep angle in [0, 180]."""
    phi = np.radians(angle_deg - 90.0)
    tilt = np.radians(LIGHT_TILT_DEG)
    d = np.array(
        [np.sin(phi) * np.cos(tilt), -np.sin(tilt), np.cos(phi) * np.cos(tilt)]
    )
    d /= np.linalg.norm(d)
    return (float(d[0]), float(d[1]), float(d[2]))


class Camera:
    def __init__(self, position, look_at, up=(0.0, 1.0, 0.0), vfov_deg: float = 44.0,
                 resolution: int = 256):
        if not 0.0 < vfov_deg < 180.0:
            raise ValueError(f"vfov must be in (0, 180) degrees, got {vfov_deg}")
        if resolution < 1:
            raise ValueError(f"resolution must be >= 1, got {resolution}")
        self.position = np.asarray(position, dtype=np.float64)
        self.look_at = np.asarray(look_at, dtype=np.float64)
        fwd = self.look_at - self.position
        norm = float(np.linalg.norm(fwd))
        if norm < 1e-9:
            raise ValueError("camera position and look_at coincide")
        self.forward = fwd / norm
        right = np.cross(np.asarray(up, dtype=np.float64), self.forward)
        rnorm = float(np.linalg.norm(right))
        if rnorm < 1e-9:
            raise ValueError("up vector is parallel to the view direction")
        self.right = right / rnorm
        self.up = np.cross(self.forward, self.right)
        self.vfov_deg = float(vfov_deg)
        self.resolution = int(resolution)

    def describe(self) -> dict:
        return {
            "cam": np.round(np.concatenate([self.position, self.look_at]), 9).tolist(),
            "vfov": self.vfov_deg,
            "res": self.resolution,
        }

    def ray_grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Pixel-center rays in row-major order: ((S*S,3) origins, (S*S,3) dirs)."""
        s = self.resolution
        half = np.tan(np.radians(self.vfov_deg) / 2.0)
        px = (np.arange(s) + 0.5) / s * 2.0 - 1.0   # left -> right
        py = 1.0 - (np.arange(s) + 0.5) / s * 2.0   # top -> bottom
        u, v = np.meshgrid(px, py)                   # v varies along rows
        d = (
            self.forward[None, :]
            + (u.reshape(-1, 1) * half) * self.right[None, :]
            + (v.reshape(-1, 1) * half) * self.up[None, :]
        )
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        o = np.broadcast_to(self.position, d.shape).copy()
        return o, d


@dataclass
class Scene:
    primitives: list  # (geometry, albedo (3,) float64) pairs
    light: DirectionalLight | None
    env: tuple[float, float, float] = (0.0, 0.0, 0.0)
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    bounding_radius: float = 1.0
    tag: dict = field(default_factory=dict)

    def __post_init__(self):
        self.primitives = [
            (geom, np.asarray(alb, dtype=np.float64)) for geom, alb in self.primitives
        ]
        if self.bounding_radius <= 0:
            raise ValueError(f"bounding radius must be > 0, got {self.bounding_radius}")

    def intersect(self, o: np.ndarray, d: np.ndarray):
        """Nearest two-sided hit: (t, normal, albedo, hit mask)."""
        m = o.shape[0]
        best_t = np.full(m, np.inf)
        best_n = np.zeros((m, 3))
        best_a = np.zeros((m, 3))
        for geom, alb in self.primitives:
            t, n = geom.intersect(o, d)
            closer = t < best_t
            best_t = np.where(closer, t, best_t)
            best_n = np.where(closer[:, None], n, best_n)
            best_a = np.where(closer[:, None], alb[None, :], best_a)
        hit = np.isfinite(best_t)
        facing = np.einsum("ij,ij->i", best_n, d) > 0.0
        best_n = np.where(facing[:, None], -best_n, best_n)
        return best_t, best_n, best_a, hit

    def occluded(self, o: np.ndarray, d: np.ndarray) -> np.ndarray:
        blocked = np.zeros(o.shape[0], dtype=bool)
        for geom, _ in self.primitives:
            t, _ = geom.intersect(o, d)
            blocked |= np.isfinite(t)
            if blocked.all():
                break
        return blocked

    def hash(self, camera: Camera) -> str:
        desc = {
            "prims": [
                {**geom.describe(), "albedo": np.round(alb, 9).tolist()}
                for geom, alb in self.primitives
            ],
            "light": None
            if self.light is None
            else [
                np.round(self.light.direction, 9).tolist(),
                list(self.light.radiance),
            ],
            "env": list(self.env),
            "camera": camera.describe(),
        }
        blob = json.dumps(desc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _object_for(kind: str, angle_deg: float):
    rot = rotation_xy(angle_deg, 0.4 * angle_deg)
    center = (0.0, -0.3, 0.0)
    if kind == "sphere":
        return Sphere(center, 0.45)
    if kind == "cube":
        return Box(center, (0.38, 0.38, 0.38), rot)
    if kind == "cylinder":
        return Cylinder(center, 0.32, 0.4, rot)
    raise ValueError(f"unknown object kind {kind!r}, expected one of {OBJECT_KINDS}")


def cornell_box(
    light_angle_deg: float,
    object_angle_deg: float = 0.0,
    object_kind: str = "sphere",
    resolution: int = 256,
) -> tuple[Scene, Camera]:
    if not 0.0 <= light_angle_deg <= 180.0:
        raise ValueError(f"light angle must be in [0, 180], got {light_angle_deg}")
    if object_kind not in OBJECT_KINDS:
        raise ValueError(f"unknown object kind {object_kind!r}, expected one of {OBJECT_KINDS}")
    prims = [
        (Rect(1, -1.0, (-1.0, -1.0), (1.0, 1.0)), _WALL_WHITE),  # floor
        (Rect(1, 1.0, (-1.0, -1.0), (1.0, 1.0)), _WALL_WHITE),   # ceiling
        (Rect(2, 1.0, (-1.0, -1.0), (1.0, 1.0)), _WALL_WHITE),   # back
        (Rect(0, -1.0, (-1.0, -1.0), (1.0, 1.0)), _WALL_RED),    # left
        (Rect(0, 1.0, (-1.0, -1.0), (1.0, 1.0)), _WALL_GREEN),   # right
    ]
    if object_kind != "none":
        prims.append((_object_for(object_kind, object_angle_deg), _OBJECT_ALBEDO[object_kind]))
    light = DirectionalLight(light_direction(light_angle_deg), LIGHT_RADIANCE)
    scene = Scene(
        primitives=prims,
        light=light,
        env=ENV_RADIANCE,
        center=(0.0, 0.0, 0.0),
        bounding_radius=float(np.sqrt(3.0)),
        tag={
            "light_angle": float(light_angle_deg),
            "object_angle": float(object_angle_deg),
            "object_kind": object_kind,
        },
    )
    # 44 degrees keeps every primary ray inside the opening (limit is ~49)
    # while letting floor, ceiling, and side walls frame the back wall
    camera = Camera((0.0, 0.0, -3.2), (0.0, 0.0, 0.0), vfov_deg=44.0, resolution=resolution)
    return scene, camera
