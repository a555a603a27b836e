"""Renderers: G-buffer raycast, analytic direct lighting, and path tracing.

All three share the same pixel-center primary rays, so the path tracer at
max_bounces=1 with a black environment reproduces the direct pass exactly.
Sampling decisions are read from per-(seed, sample) random tables indexed by
flat pixel id, which makes a frame bit-identical regardless of how rays are
batched or which worker renders it.
"""

from __future__ import annotations

import numpy as np

from .scene import Camera, Scene

__all__ = [
    "raycast_gbuffers",
    "render_direct",
    "path_trace",
    "encode_normal",
    "decode_normal",
]

SELF_HIT_EPS = 1e-4   # surface offset before spawning secondary rays
RAY_BUDGET = 262144   # max rays in flight per wavefront pass
RR_START_BOUNCE = 2   # 0-based interaction index where roulette begins
RR_CLAMP = (0.05, 0.95)


def encode_normal(n: np.ndarray) -> np.ndarray:
    """Unit vectors to the [0,1] buffer range; (0,0,0) stays free for background."""
    return (n + 1.0) * 0.5


def decode_normal(enc: np.ndarray) -> np.ndarray:
    return enc * 2.0 - 1.0


def _direct_at(scene: Scene, x: np.ndarray, n: np.ndarray, albedo: np.ndarray) -> np.ndarray:
    """Outgoing radiance from the directional light at shading points x."""
    if scene.light is None:
        return np.zeros_like(x)
    l = -np.asarray(scene.light.direction, dtype=np.float64)
    cos = n @ l
    lit = cos > 0.0
    out = np.zeros_like(x)
    if np.any(lit):
        origins = x[lit]
        dirs = np.broadcast_to(l, origins.shape).copy()
        visible = ~scene.occluded(origins, dirs)
        rad = np.asarray(scene.light.radiance, dtype=np.float64)
        contrib = albedo[lit] / np.pi * cos[lit, None] * rad[None, :]
        contrib[~visible] = 0.0
        out[lit] = contrib
    return out


def raycast_gbuffers(scene: Scene, camera: Camera):
    """Primary-hit buffers: normalized depth, encoded normal, diffuse albedo.

    Background pixels carry depth 1, normal (0,0,0), diffuse 0.
    """
    s = camera.resolution
    o, d = camera.ray_grid()
    t, n, albedo, hit = scene.intersect(o, d)
    denom = float(np.linalg.norm(camera.position - np.asarray(scene.center))) + scene.bounding_radius
    depth = np.where(hit, np.clip(t / denom, 0.0, 1.0), 1.0)
    normal = np.where(hit[:, None], encode_normal(n), 0.0)
    diffuse = np.where(hit[:, None], albedo, 0.0)
    return (
        depth.reshape(s, s).astype(np.float32),
        normal.reshape(s, s, 3).astype(np.float32),
        diffuse.reshape(s, s, 3).astype(np.float32),
    )


def render_direct(scene: Scene, camera: Camera) -> np.ndarray:
    """One-bounce lighting at the primary hit; misses show the environment."""
    s = camera.resolution
    o, d = camera.ray_grid()
    t, n, albedo, hit = scene.intersect(o, d)
    out = np.broadcast_to(np.asarray(scene.env, dtype=np.float64), (o.shape[0], 3)).copy()
    if np.any(hit):
        x = o[hit] + t[hit, None] * d[hit] + n[hit] * SELF_HIT_EPS
        out[hit] = _direct_at(scene, x, n[hit], albedo[hit])
    return out.reshape(s, s, 3).astype(np.float32)


def _sample_table(seed: int, sample: int, npix: int, max_bounces: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, sample]))
    return rng.random((npix, 3 * max_bounces))


def _cosine_hemisphere(n: np.ndarray, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    # tangent frame around n; helper axis switched where n is nearly vertical
    helper = np.where(
        (np.abs(n[:, 1]) < 0.9)[:, None],
        np.array([0.0, 1.0, 0.0]),
        np.array([1.0, 0.0, 0.0]),
    )
    tx = np.cross(helper, n)
    tx /= np.linalg.norm(tx, axis=1, keepdims=True)
    ty = np.cross(n, tx)
    r = np.sqrt(u1)
    theta = 2.0 * np.pi * u2
    return (
        (r * np.cos(theta))[:, None] * tx
        + (r * np.sin(theta))[:, None] * ty
        + np.sqrt(np.maximum(1.0 - u1, 0.0))[:, None] * n
    )


def path_trace(
    scene: Scene,
    camera: Camera,
    spp: int,
    max_bounces: int = 8,
    seed: int = 0,
) -> np.ndarray:
    """Monte-Carlo global illumination estimate, (S,S,3) linear radiance."""
    if spp < 1:
        raise ValueError(f"spp must be >= 1, got {spp}")
    if max_bounces < 1:
        raise ValueError(f"max_bounces must be >= 1, got {max_bounces}")
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    s = camera.resolution
    o0, d0 = camera.ray_grid()
    npix = o0.shape[0]
    env = np.asarray(scene.env, dtype=np.float64)
    acc = np.zeros((npix, 3))
    chunk = max(1, RAY_BUDGET // npix)
    for start in range(0, spp, chunk):
        samples = range(start, min(start + chunk, spp))
        k = len(samples)
        table = np.concatenate(
            [_sample_table(seed, smp, npix, max_bounces) for smp in samples], axis=0
        )
        radiance = np.zeros((npix * k, 3))
        live = np.arange(npix * k)
        o = np.tile(o0, (k, 1))
        d = np.tile(d0, (k, 1))
        throughput = np.ones((npix * k, 3))
        for b in range(max_bounces):
            t, n, albedo, hit = scene.intersect(o, d)
            if not np.all(hit):
                esc = ~hit
                radiance[live[esc]] += throughput[esc] * env
                live, o, d = live[hit], o[hit], d[hit]
                t, n, albedo, throughput = t[hit], n[hit], albedo[hit], throughput[hit]
            if live.size == 0:
                break
            x = o + t[:, None] * d + n * SELF_HIT_EPS
            radiance[live] += throughput * _direct_at(scene, x, n, albedo)
            if b == max_bounces - 1:
                break
            d = _cosine_hemisphere(n, table[live, 3 * b], table[live, 3 * b + 1])
            o = x
            throughput = throughput * albedo
            if b >= RR_START_BOUNCE:
                p = np.clip(albedo.max(axis=1), *RR_CLAMP)
                alive = table[live, 3 * b + 2] <= p
                live, o, d = live[alive], o[alive], d[alive]
                throughput = throughput[alive] / p[alive, None]
        acc += radiance.reshape(k, npix, 3).sum(axis=0)
    return (acc / spp).reshape(s, s, 3).astype(np.float32)
