"""Exact measure computations and Monte Carlo estimates for limsup sets on tori."""

from .approx_sets import (
    ApproxSet, contains, equidist_discrepancy, pair_intersection_measure, regularity_probe,
    set_measure, to_one_by_m,
)
from .arith import gcd_vec, mobius, nearest_int_dist, primitive_count, totient
from .errors import DomainError, SingularityError, UnsupportedError, UnsupportedExact
from .independence import (
    chung_erdos_bound, erdos_renyi_constant, gcd_class_bound, qia_scan,
)
from .montecarlo import (
    McEstimate, TailProfile, bootstrap_demo, cassels_scaling_probe, limsup_profile,
    tail_union_estimate,
)
from .psi import (
    ApproxFunction, PowerLaw, ResidueRule, TableRule, catlin_phi, catlin_sup_term, chow_technau,
    eval_psi, finite_support, nrs_reduce, psi_transform, ray, series_partial_sum, univariate,
)
from .targets import TargetFamily, enumerate_targets, spread_constants
from .torus_geom import (
    TorusBall, TorusRegion, region_intersect_measure, region_measure, scale_region, vitali_refine,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxSet",
    "contains",
    "equidist_discrepancy",
    "pair_intersection_measure",
    "regularity_probe",
    "set_measure",
    "to_one_by_m",
    "gcd_vec",
    "mobius",
    "nearest_int_dist",
    "primitive_count",
    "totient",
    "DomainError",
    "SingularityError",
    "UnsupportedError",
    "UnsupportedExact",
    "chung_erdos_bound",
    "erdos_renyi_constant",
    "gcd_class_bound",
    "qia_scan",
    "McEstimate",
    "TailProfile",
    "bootstrap_demo",
    "cassels_scaling_probe",
    "limsup_profile",
    "tail_union_estimate",
    "ApproxFunction",
    "PowerLaw",
    "ResidueRule",
    "TableRule",
    "catlin_phi",
    "catlin_sup_term",
    "chow_technau",
    "eval_psi",
    "finite_support",
    "nrs_reduce",
    "psi_transform",
    "ray",
    "series_partial_sum",
    "univariate",
    "TargetFamily",
    "enumerate_targets",
    "spread_constants",
    "TorusBall",
    "TorusRegion",
    "region_intersect_measure",
    "region_measure",
    "scale_region",
    "vitali_refine",
]
