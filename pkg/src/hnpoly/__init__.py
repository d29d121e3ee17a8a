"""Harder-Narasimhan measures and polygons of lattices over Spec Z, and the
asymptotic objects of graded families built from them."""
from .errors import BudgetExceeded
from .filtered import FilteredSpace, exact_sequence_split, lambda_invariants, measure_of
from .lattices import (
    HermitianLattice,
    HNPolygon,
    LatticeMap,
    degree,
    diagonal_hn_polygon,
    first_minimum,
    h0,
    h0_vs_degplus,
    hn_measure,
    hn_polygon,
    map_height,
    positive_degree,
    slope,
)
from .measures import (
    AtomicMeasure,
    dilate,
    dirac,
    dominates,
    mix,
    positive_part_integral,
    translate,
    truncate,
    w1_distance,
)
from .polygons import Polygon, legendre_dual, legendre_inverse, max_value, polygon_of, sup_distance

__version__ = "0.1.0"
