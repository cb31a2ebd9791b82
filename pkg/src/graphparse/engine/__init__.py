"""Parse engine: lattice-aware chart recognition, packed forests, unpacking.

The recognizer kernel runs either compiled (Cython extension) or in pure
Python; :mod:`graphparse.engine.kernel` picks at import and the
``GRAPHPARSE_KERNEL`` environment variable overrides.
"""

from .forest import (
    Alternative,
    ChildView,
    ForestNode,
    InstanceView,
    ParseForest,
    check_constraints,
    forest_to_json_text,
    parse,
)
from .kernel import active_kernel_id, available_kernels, get_kernel
from .unpack import enumerate_graphs, instance_local_value

__all__ = [
    "parse",
    "enumerate_graphs",
    "check_constraints",
    "instance_local_value",
    "ParseForest",
    "ForestNode",
    "Alternative",
    "InstanceView",
    "ChildView",
    "forest_to_json_text",
    "get_kernel",
    "available_kernels",
    "active_kernel_id",
]
