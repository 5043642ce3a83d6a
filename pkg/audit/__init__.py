"""
Audit module initialization - numerical checks of the location convexity argument
"""

from .closed_forms import ConvexityQuantities, g_function, find_g_root, find_vertex_root, e_crossing_distance
from .finite_differences import central_gradient, central_hessian
from .report import ClaimVerdict, AuditReport
from .verifier import (
    sample_instances,
    audit_first_determinant,
    audit_second_determinant,
    audit_en_bound,
    audit_g_root,
    audit_I1_shape,
    run_audit,
)

__all__ = [
    "ConvexityQuantities",
    "g_function",
    "find_g_root",
    "find_vertex_root",
    "e_crossing_distance",
    "central_gradient",
    "central_hessian",
    "ClaimVerdict",
    "AuditReport",
    "sample_instances",
    "audit_first_determinant",
    "audit_second_determinant",
    "audit_en_bound",
    "audit_g_root",
    "audit_I1_shape",
    "run_audit",
]
