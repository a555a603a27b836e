"""CPU renderer: scene setup, path tracing, and dataset generation."""

from .dataset import (
    BUFFER_NAMES,
    DatasetManifest,
    FrameRecord,
    GBufferFrame,
    MANIFEST_NAME,
    generate_dataset,
    read_dib,
    read_manifest,
    render_frame,
    split_dataset,
    sweep_angles,
    write_dib,
    write_manifest,
)
from .geometry import Box, Cylinder, Rect, Sphere, TriangleMesh, load_obj, rotation_xy
from .scene import (
    OBJECT_KINDS,
    Camera,
    DirectionalLight,
    Scene,
    cornell_box,
    light_direction,
)
from .trace import (
    decode_normal,
    encode_normal,
    path_trace,
    raycast_gbuffers,
    render_direct,
)

__all__ = [
    "BUFFER_NAMES",
    "Box",
    "Camera",
    "Cylinder",
    "DatasetManifest",
    "DirectionalLight",
    "FrameRecord",
    "GBufferFrame",
    "MANIFEST_NAME",
    "OBJECT_KINDS",
    "Rect",
    "Scene",
    "Sphere",
    "TriangleMesh",
    "cornell_box",
    "decode_normal",
    "encode_normal",
    "generate_dataset",
    "light_direction",
    "load_obj",
    "path_trace",
    "raycast_gbuffers",
    "read_dib",
    "read_manifest",
    "render_frame",
    "render_direct",
    "split_dataset",
    "sweep_angles",
    "write_dib",
    "write_manifest",
]
