"""Input validation helpers for the estimator API."""

from __future__ import annotations

import numpy as np

from .smiles import MolGraph, parse_smiles


def as_molgraph(drug) -> MolGraph:
    """Accept a SMILES string or an already-parsed graph."""
    if isinstance(drug, MolGraph):
        return drug
    if isinstance(drug, str):
        return parse_smiles(drug)
    raise TypeError(f"drug must be a SMILES string or MolGraph, got {type(drug).__name__}")


def check_cell_vector(cell, length: int) -> np.ndarray:
    vec = np.asarray(cell, dtype=np.float64).reshape(-1)
    if vec.shape != (length,):
        raise ValueError(f"cell vector must have length {length}, got {vec.shape[0]}")
    if not np.all(np.isfinite(vec)):
        raise ValueError("cell vector must be finite")
    return vec


def check_pairs(X, cell_dim: int) -> list[tuple[MolGraph, np.ndarray]]:
    """Normalize a sequence of (drug, cell) pairs for the network."""
    pairs = []
    for i, item in enumerate(X):
        try:
            drug, cell = item
        except (TypeError, ValueError):
            raise ValueError(
                f"X[{i}] must be a (drug, cell_vector) pair, got {type(item).__name__}"
            ) from None
        pairs.append((as_molgraph(drug), check_cell_vector(cell, cell_dim)))
    return pairs


def check_targets(y, n_samples: int) -> np.ndarray:
    targets = np.asarray(y, dtype=np.float64).reshape(-1)
    if targets.shape != (n_samples,):
        raise ValueError(f"y must have {n_samples} entries, got {targets.shape[0]}")
    if not np.all(np.isfinite(targets)):
        raise ValueError("targets must be finite")
    return targets
