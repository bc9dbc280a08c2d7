"""Numerical lab for counting solutions of multiplicative Diophantine inequalities.

Counts ``q |qx1 - p1| |qx2 - p2|`` in ``(a, b)``, the volumes and variance
series that govern their fluctuations, lattice geometry in ``R^3`` and the
Monte Carlo CLT experiment built on top.
"""
import os

# OpenMP is bundled with numba wheels; TBB often is not, and its absence only
# produces a warning, so prefer it explicitly before numba is first imported.
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

from .core import DomainParams, InvalidParameterError, Point3  # noqa: E402
from .counting import count_products, count_products_many, count_via_lattice, discrepancy  # noqa: E402
from .lattice import EnumerationBudgetError, FlowExponent, UnimodularLattice  # noqa: E402
from .volumes import SeriesConfig, Variant, sigma_squared, vol_omega_exact  # noqa: E402

__all__ = [
    "DomainParams", "InvalidParameterError", "Point3",
    "count_products", "count_products_many", "count_via_lattice", "discrepancy",
    "EnumerationBudgetError", "FlowExponent", "UnimodularLattice",
    "SeriesConfig", "Variant", "sigma_squared", "vol_omega_exact",
]
__version__ = "0.1.0"
