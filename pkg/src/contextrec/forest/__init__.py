"""From-scratch Gini decision trees and random forests."""

from contextrec.forest.ensemble import RandomForest, train_forest, tune_depth
from contextrec.forest.params import ForestParams, derive_seed
from contextrec.forest.storage import FORMAT_VERSION, load_forest, save_forest
from contextrec.forest.tree import LEAF, DecisionTree, Split, best_split, gini, grow_tree

__all__ = [
    "FORMAT_VERSION",
    "LEAF",
    "DecisionTree",
    "ForestParams",
    "RandomForest",
    "Split",
    "best_split",
    "derive_seed",
    "gini",
    "grow_tree",
    "load_forest",
    "save_forest",
    "train_forest",
    "tune_depth",
]
