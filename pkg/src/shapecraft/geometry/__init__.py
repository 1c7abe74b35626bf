from .core import (Aabb, Mesh, Transform, Vec3, boundary_edge_count, compute_aabb,
                   concat, is_closed, signed_volume, transform, weld)
from .curves import CURVE_KINDS, make_curve_object
from .csg import boolean
from .modifiers import (MODIFIER_NAMES, ModifierSpec, apply_modifier, array, bevel,
                        curve_deform, mirror, solidify, subdivision)
from .primitives import PRIMITIVE_KINDS, make_primitive

__all__ = [
    "Aabb", "Mesh", "Transform", "Vec3", "boundary_edge_count", "compute_aabb",
    "concat", "is_closed", "signed_volume", "transform", "weld",
    "CURVE_KINDS", "make_curve_object", "boolean",
    "MODIFIER_NAMES", "ModifierSpec", "apply_modifier", "array", "bevel",
    "curve_deform", "mirror", "solidify", "subdivision",
    "PRIMITIVE_KINDS", "make_primitive",
]
