from .shapes import (
    Box,
    Complement,
    Disk,
    DomainSpec,
    HalfPlane,
    Intersect,
    Puncture,
    Strip,
    Union,
    disk,
    half_plane,
    load_domain,
    punctured_space,
    unit_strip,
)
from .grid import QhGraph, discretize, euclidean_geodesic, j_metric, qh_distance, qh_space
from .conditions import (
    annulus_classify,
    geodesic_conditions,
    phi_uniform_profile,
    spherical_compare,
    uniformity_constant,
)
from .growth import integral_condition, psi_transfer
