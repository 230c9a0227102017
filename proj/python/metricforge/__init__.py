"""Quadratic-form semimetrics with designated pairwise distances."""

from ._core import (
    InputError,
    NumericalError,
    RankError,
    Semimetric,
    __version__,
    attack,
    capacity,
    check_axioms,
    dbscan,
    forge,
    kmeans,
    pair_order,
)

__all__ = [
    "InputError",
    "NumericalError",
    "RankError",
    "Semimetric",
    "__version__",
    "attack",
    "capacity",
    "check_axioms",
    "dbscan",
    "forge",
    "kmeans",
    "pair_order",
]
