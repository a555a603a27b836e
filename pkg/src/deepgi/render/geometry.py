"""Ray-intersectable primitives, vectorized over arrays of rays.

Every ``intersect`` takes origins (M,3) and directions (M,3) and returns
(t, n): hit distances with inf on miss, and geometric unit normals (garbage
where t is inf). Normals are left un-flipped; the scene orients them against
the incoming ray so every surface is two-sided.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Rect",
    "Sphere",
    "Box",
    "Cylinder",
    "TriangleMesh",
    "load_obj",
    "rotation_xy",
    "T_MIN",
]

T_MIN = 1e-5  # hits closer than this are treated as self-intersections

_INF = np.float64(np.inf)


def rotation_xy(y_deg: float, x_deg: float) -> np.ndarray:
    """World = Ry(y_deg) @ Rx(x_deg) @ object."""
    ay, ax = np.radians(y_deg), np.radians(x_deg)
    cy, sy = np.cos(ay), np.sin(ay)
    cx, sx = np.cos(ax), np.sin(ax)
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    return ry @ rx


class Rect:
    """Axis-aligned rectangle on the plane axis=value, bounded on the others."""

    def __init__(self, axis: int, value: float, lo: tuple[float, float], hi: tuple[float, float]):
        if axis not in (0, 1, 2):
            raise ValueError(f"axis must be 0, 1, or 2, got {axis}")
        self.axis = axis
        self.value = float(value)
        self.lo = (float(lo[0]), float(lo[1]))
        self.hi = (float(hi[0]), float(hi[1]))
        self.other = tuple(a for a in (0, 1, 2) if a != axis)

    def describe(self) -> dict:
        return {"rect": [self.axis, self.value, *self.lo, *self.hi]}

    def intersect(self, o: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        dk = d[:, self.axis]
        ok = o[:, self.axis]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (self.value - ok) / dk
            a, b = self.other
            pa = o[:, a] + t * d[:, a]
            pb = o[:, b] + t * d[:, b]
        ok_hit = (
            (np.abs(dk) > 1e-12)
            & (t > T_MIN)
            & (pa >= self.lo[0]) & (pa <= self.hi[0])
            & (pb >= self.lo[1]) & (pb <= self.hi[1])
        )
        t = np.where(ok_hit, t, _INF)
        n = np.zeros_like(o)
        n[:, self.axis] = 1.0
        return t, n


class Sphere:
    def __init__(self, center, radius: float):
        self.center = np.asarray(center, dtype=np.float64)
        self.radius = float(radius)
        if self.radius <= 0:
            raise ValueError(f"radius must be > 0, got {radius}")

    def describe(self) -> dict:
        return {"sphere": [*self.center.tolist(), self.radius]}

    def intersect(self, o: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        oc = o - self.center
        b = np.einsum("ij,ij->i", oc, d)
        c = np.einsum("ij,ij->i", oc, oc) - self.radius**2
        disc = b * b - c  # directions are unit length, so a == 1
        hit = disc > 0.0
        sq = np.sqrt(np.where(hit, disc, 0.0))
        t0 = -b - sq
        t1 = -b + sq
        t = np.where(t0 > T_MIN, t0, t1)
        t = np.where(hit & (t > T_MIN), t, _INF)
        tsafe = np.where(np.isfinite(t), t, 0.0)
        p = o + tsafe[:, None] * d
        n = (p - self.center) / self.radius
        return t, n


class Box:
    """Oriented box: slab test in the object frame."""

    def __init__(self, center, half_extents, rotation: np.ndarray | None = None):
        self.center = np.asarray(center, dtype=np.float64)
        self.half = np.asarray(half_extents, dtype=np.float64)
        if np.any(self.half <= 0):
            raise ValueError(f"half extents must be > 0, got {half_extents}")
        self.rot = np.eye(3) if rotation is None else np.asarray(rotation, dtype=np.float64)

    def describe(self) -> dict:
        return {
            "box": [*self.center.tolist(), *self.half.tolist()],
            "rot": np.round(self.rot, 9).reshape(-1).tolist(),
        }

    def intersect(self, o: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ol = (o - self.center) @ self.rot  # rot is orthonormal; @rot == @rot^-T
        dl = d @ self.rot
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / dl
        t1 = (-self.half - ol) * inv
        t2 = (self.half - ol) * inv
        tlo = np.minimum(t1, t2)
        thi = np.maximum(t1, t2)
        # parallel rays: slab test passes only if the origin is inside (t=+-inf works)
        tnear = np.max(tlo, axis=1)
        tfar = np.min(thi, axis=1)
        hit = (tnear <= tfar) & (tfar > T_MIN)
        t = np.where(tnear > T_MIN, tnear, tfar)
        t = np.where(hit & (t > T_MIN), t, _INF)
        pl = ol + np.where(np.isfinite(t), t, 0.0)[:, None] * dl
        # face with the largest |coordinate|/half ratio carries the normal
        ratio = np.abs(pl) / self.half
        face = np.argmax(ratio, axis=1)
        nl = np.zeros_like(o)
        rows = np.arange(o.shape[0])
        nl[rows, face] = np.sign(pl[rows, face])
        return t, nl @ self.rot.T


class Cylinder:
    """Capped cylinder, axis +y in the object frame."""

    def __init__(self, center, radius: float, half_height: float, rotation: np.ndarray | None = None):
        self.center = np.asarray(center, dtype=np.float64)
        self.radius = float(radius)
        self.half_h = float(half_height)
        if self.radius <= 0 or self.half_h <= 0:
            raise ValueError("radius and half_height must be > 0")
        self.rot = np.eye(3) if rotation is None else np.asarray(rotation, dtype=np.float64)

    def describe(self) -> dict:
        return {
            "cylinder": [*self.center.tolist(), self.radius, self.half_h],
            "rot": np.round(self.rot, 9).reshape(-1).tolist(),
        }

    def intersect(self, o: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        m = o.shape[0]
        ol = (o - self.center) @ self.rot
        dl = d @ self.rot
        best_t = np.full(m, _INF)
        best_n = np.zeros((m, 3))

        # side surface: quadratic in the xz-plane
        a = dl[:, 0] ** 2 + dl[:, 2] ** 2
        b = ol[:, 0] * dl[:, 0] + ol[:, 2] * dl[:, 2]
        c = ol[:, 0] ** 2 + ol[:, 2] ** 2 - self.radius**2
        disc = b * b - a * c
        valid = (disc > 0.0) & (a > 1e-12)
        sq = np.sqrt(np.where(valid, disc, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            for sign in (-1.0, 1.0):
                t = (-b + sign * sq) / a
                y = ol[:, 1] + t * dl[:, 1]
                ok = valid & (t > T_MIN) & (np.abs(y) <= self.half_h) & (t < best_t)
                pl = ol + t[:, None] * dl
                n = pl.copy()
                n[:, 1] = 0.0
                n /= self.radius
                best_n = np.where(ok[:, None], n, best_n)
                best_t = np.where(ok, t, best_t)

        # caps: y = +-half_height discs
        for ycap in (-self.half_h, self.half_h):
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (ycap - ol[:, 1]) / dl[:, 1]
                px = ol[:, 0] + t * dl[:, 0]
                pz = ol[:, 2] + t * dl[:, 2]
            ok = (
                (np.abs(dl[:, 1]) > 1e-12)
                & (t > T_MIN)
                & (px**2 + pz**2 <= self.radius**2)
                & (t < best_t)
            )
            n = np.zeros((m, 3))
            n[:, 1] = np.sign(ycap)
            best_n = np.where(ok[:, None], n, best_n)
            best_t = np.where(ok, t, best_t)

        return best_t, best_n @ self.rot.T


class TriangleMesh:
    def __init__(self, vertices: np.ndarray, faces: np.ndarray):
        self.vertices = np.asarray(vertices, dtype=np.float64)
        self.faces = np.asarray(faces, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise ValueError(f"vertices must be (V,3), got {self.vertices.shape}")
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise ValueError(f"faces must be (F,3), got {self.faces.shape}")
        if self.faces.size and (self.faces.min() < 0 or self.faces.max() >= len(self.vertices)):
            raise ValueError("face index out of range")
        v0 = self.vertices[self.faces[:, 0]]
        self.v0 = v0
        self.e1 = self.vertices[self.faces[:, 1]] - v0
        self.e2 = self.vertices[self.faces[:, 2]] - v0
        fn = np.cross(self.e1, self.e2)
        self.face_normals = fn / np.maximum(np.linalg.norm(fn, axis=1, keepdims=True), 1e-12)

    def describe(self) -> dict:
        return {
            "mesh": [len(self.vertices), len(self.faces)],
            "bbox": np.round(
                np.concatenate([self.vertices.min(0), self.vertices.max(0)]), 9
            ).tolist(),
        }

    def normalized(self, target_half_extent: float = 0.45) -> "TriangleMesh":
        """Bounding-box centered copy scaled to the given half extent."""
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        center = (lo + hi) / 2.0
        scale = target_half_extent / max(float((hi - lo).max()) / 2.0, 1e-12)
        return TriangleMesh((self.vertices - center) * scale, self.faces)

    def intersect(self, o: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        m = o.shape[0]
        best_t = np.full(m, _INF)
        best_f = np.zeros(m, dtype=np.int64)
        ray_chunk = 65536
        tri_chunk = 64
        for r0 in range(0, m, ray_chunk):
            r1 = min(r0 + ray_chunk, m)
            oc, dc = o[r0:r1], d[r0:r1]
            for f0 in range(0, len(self.faces), tri_chunk):
                f1 = min(f0 + tri_chunk, len(self.faces))
                t = self._mt_block(oc, dc, f0, f1)  # (rays, tris)
                fbest = np.argmin(t, axis=1)
                tbest = t[np.arange(t.shape[0]), fbest]
                better = tbest < best_t[r0:r1]
                best_t[r0:r1] = np.where(better, tbest, best_t[r0:r1])
                best_f[r0:r1] = np.where(better, fbest + f0, best_f[r0:r1])
        return best_t, self.face_normals[best_f]

    def _mt_block(self, o: np.ndarray, d: np.ndarray, f0: int, f1: int) -> np.ndarray:
        v0, e1, e2 = self.v0[f0:f1], self.e1[f0:f1], self.e2[f0:f1]
        p = np.cross(d[:, None, :], e2[None, :, :])
        det = np.einsum("fx,rfx->rf", e1, p)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / det
        s = o[:, None, :] - v0[None, :, :]
        u = np.einsum("rfx,rfx->rf", s, p) * inv
        q = np.cross(s, e1[None, :, :])
        v = np.einsum("rx,rfx->rf", d, q) * inv
        t = np.einsum("fx,rfx->rf", e2, q) * inv
        ok = (np.abs(det) > 1e-12) & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > T_MIN)
        return np.where(ok, t, _INF)


def load_obj(path) -> TriangleMesh:
    """Minimal OBJ reader: v and f lines, fan triangulation, rest ignored."""
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path, "r", encoding="utf-8") as f:
        for ln, raw in enumerate(f, start=1):
            parts = raw.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                if len(parts) < 4:
                    raise ValueError(f"{path}:{ln}: vertex needs 3 coordinates")
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                if len(parts) < 4:
                    raise ValueError(f"{path}:{ln}: face needs at least 3 vertices")
                idx = []
                for tok in parts[1:]:
                    head = tok.split("/", 1)[0]
                    i = int(head)
                    if i <= 0:
                        raise ValueError(f"{path}:{ln}: only positive face indices supported")
                    idx.append(i - 1)
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
    if not verts or not faces:
        raise ValueError(f"{path}: no usable v/f lines found")
    return TriangleMesh(np.asarray(verts), np.asarray(faces))
