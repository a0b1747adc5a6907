"""drugqnn: hybrid quantum-classical drug response regression.

A statevector simulator with adjoint gradients, a data re-uploading quantum
layer, from-scratch classical layers (conv / graph-conv / dense / Adam), a
SMILES subset parser, deterministic dataset handling, and two scikit-learn
style regressors (quantum head vs. classical head) over the same two-branch
network.
"""

from .data import (
    Dataset,
    Split,
    bundled_overfit_dataset,
    epoch_order,
    load_dataset,
    make_split,
    normalize_ic50,
)
from .estimators import ClassicalDrugResponseRegressor, HybridDrugResponseRegressor
from .exceptions import (
    ConfigError,
    DataError,
    DrugQnnError,
    SmilesParseError,
    TrainingError,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .reupload import ReuploadConfig, ReuploadLayer, ReuploadParams, build_circuit
from .simulator import (
    CNOT,
    RX,
    RY,
    RZ,
    Circuit,
    GateOp,
    Statevector,
    adjoint_gradients,
    apply_gate,
    cnot,
    expectation_z,
    gate_angle_gradients,
    new_zero_state,
    run_circuit,
    rx,
    ry,
    rz,
)
from .smiles import MolGraph, featurize, parse_smiles

__version__ = "0.1.0"

__all__ = [
    "CNOT", "Circuit", "ClassicalDrugResponseRegressor", "ConfigError",
    "DataError", "Dataset", "DrugQnnError", "GateOp",
    "HybridDrugResponseRegressor", "MolGraph", "RX", "RY", "RZ",
    "ReuploadConfig", "ReuploadLayer", "ReuploadParams", "SmilesParseError",
    "Split", "Statevector", "TrainingError", "adjoint_gradients", "apply_gate",
    "build_circuit", "bundled_overfit_dataset", "cnot", "epoch_order",
    "expectation_z", "featurize", "gate_angle_gradients", "load_checkpoint",
    "load_dataset", "make_split", "new_zero_state", "normalize_ic50",
    "parse_smiles", "rx", "run_circuit", "ry", "rz", "save_checkpoint",
]
