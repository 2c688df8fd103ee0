"""Exact Shapley values over coalition lattices, axiom audits, and feature-selection pathology detectors."""
from .axioms import AxiomReport, audit_all
from .game import (
    Attribution,
    CapacityError,
    Coalition,
    Game,
    InvalidArgument,
    NumericError,
    ValidationError,
    exact_shapley,
    permutation_shapley,
)
from .toy_games import load_game, save_game, secret_holder_game, taxicab_game

__all__ = [
    "Attribution", "AxiomReport", "CapacityError", "Coalition", "Game", "InvalidArgument",
    "NumericError", "ValidationError", "audit_all", "exact_shapley", "load_game",
    "permutation_shapley", "save_game", "secret_holder_game", "taxicab_game",
]
