"""Partitioning attributed graphs with semi-relaxed (fused) Gromov-Wasserstein transport."""

from .attributes import AttributeBundle, Curve, Histogram, attribute_distance_matrix, dtw, wasserstein1_hist
from .graph import AttributedGraph, geodesic_distances, structural_distances
from .kmeans import Partition, Seeding, kmeanspp_seed, lloyd_frechet
from .metrics import ari, rand_index
from .solvers import LossParams, fgw_loss, gw_loss, hard_project, srfgw_partition, srgw_solve
from .targets import TargetSpec, coarsened_target, equidistant_target

__version__ = "0.1.0"
