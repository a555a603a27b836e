import os

import pytest

from deepgi.render import MANIFEST_NAME, generate_dataset, split_dataset, write_manifest


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """Six 32x32 frames with train/val labels, shared across test modules.

    32 is the smallest square the five-layer discriminator ladder accepts.
    """
    out = tmp_path_factory.mktemp("data") / "tiny"
    manifest = generate_dataset(
        out,
        light_steps=3,
        object_steps=2,
        object_kinds=("sphere",),
        spp=8,
        resolution=32,
        seed=11,
        workers=1,
    )
    manifest = split_dataset(manifest, holdout=None, val_fraction=0.2)
    write_manifest(manifest, os.path.join(out, MANIFEST_NAME))
    return str(out), manifest
