"""deepgi: learned global illumination for a procedural Cornell-box scene.

A CPU path tracer produces ground-truth renders and G-buffers, and a
conditional adversarial image-to-image network learns the mapping from
direct illumination plus geometry buffers to the fully lit image. Autodiff,
networks, renderer, and training all live here with numpy as the only
numeric dependency.
"""

__version__ = "0.1.0"
