from mhdkin.mesh.tetmesh import (
    LOCAL_EDGES,
    LOCAL_FACES,
    MAX_LEVEL,
    TetMesh,
    build_mesh,
    classify_boundary,
    entity_counts,
    mesh_size,
    write_mesh_text,
)

__all__ = [
    "LOCAL_EDGES",
    "LOCAL_FACES",
    "MAX_LEVEL",
    "TetMesh",
    "build_mesh",
    "classify_boundary",
    "entity_counts",
    "mesh_size",
    "write_mesh_text",
]
