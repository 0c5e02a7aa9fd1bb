"""High-order Galerkin FEM for convection-diffusion on Shishkin meshes."""
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
