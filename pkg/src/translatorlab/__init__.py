"""Numerical laboratory for graphical translating solitons of mean curvature flow.

Solves the translator equation on truncated strips with capped infinite
boundary data, samples closed-form grim reaper oracles, extracts geometric
diagnostics (normals, slope profiles, rotation angles, ridges), builds
zero-set networks of difference fields, and assembles surface meshes from
graph pieces by their rotational symmetries.
"""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
__all__ = ["KERNEL_BACKEND", "__version__"]
