"""Meshing, assembly and verification of the P, D and Scherk type hypersurfaces."""

from .mesh import MeshError, PatchMesh, SliceError, mesh_graph, merge_meshes, read_ndoff, slice_mesh, write_ndoff, write_obj, write_off
from .verify import Check, PeriodicSurface, VerificationReport, verify_embedded_sample

__all__ = [
    "Check", "MeshError", "PatchMesh", "PeriodicSurface", "SliceError", "VerificationReport",
    "merge_meshes", "mesh_graph", "read_ndoff", "slice_mesh", "verify_embedded_sample",
    "write_ndoff", "write_obj", "write_off",
]
