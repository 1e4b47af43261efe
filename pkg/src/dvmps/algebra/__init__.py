"""Pairing backend: prime field, quadratic extension, supersingular curve
group, Tate pairing with distortion map, hashing, operation counters."""

from .counters import OpCounters, counters_reset, counters_snapshot
from .curve import (
    INFINITY,
    CurveError,
    CurveParams,
    GroupElement,
    enumerate_points,
    in_subgroup,
    is_on_curve,
    point_add,
    point_from_bytes,
    point_neg,
    point_sub,
    point_to_bytes,
    scalar_mul,
)
from .field import FieldError
from .hashing import (
    HashToCurveError,
    hash_to_group,
    hash_to_scalar,
    scalar_from_seed,
    scalar_hash_input,
)
from .pairing import (
    GT_ONE,
    TargetElement,
    gt_inv,
    gt_mul,
    gt_order_divides_q,
    gt_pow,
    pairing,
)
from .params import DEMO, PARAM_SETS, TOY, generate_curve_params, get_params

__all__ = [
    "OpCounters",
    "counters_reset",
    "counters_snapshot",
    "INFINITY",
    "CurveError",
    "CurveParams",
    "GroupElement",
    "enumerate_points",
    "in_subgroup",
    "is_on_curve",
    "point_add",
    "point_from_bytes",
    "point_neg",
    "point_sub",
    "point_to_bytes",
    "scalar_mul",
    "FieldError",
    "HashToCurveError",
    "hash_to_group",
    "hash_to_scalar",
    "scalar_from_seed",
    "scalar_hash_input",
    "GT_ONE",
    "TargetElement",
    "gt_inv",
    "gt_mul",
    "gt_order_divides_q",
    "gt_pow",
    "pairing",
    "DEMO",
    "PARAM_SETS",
    "TOY",
    "generate_curve_params",
    "get_params",
]
