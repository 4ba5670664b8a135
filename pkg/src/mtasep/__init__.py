"""Exact enumeration and simulation for the multispecies TASEP on a ring."""

from .combinatorics import binom, narayana
from .mlq import BudgetExceeded, ExactDist, MultilineQueue, Sector, stationary_from_queues
from .patterns import PatternQuery

__all__ = [
    "binom",
    "narayana",
    "BudgetExceeded",
    "ExactDist",
    "MultilineQueue",
    "Sector",
    "PatternQuery",
    "stationary_from_queues",
]
