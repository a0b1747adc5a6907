"""Scikit-learn style regressors over (drug, cell line) pairs.

``X`` is a sequence of ``(drug, cell_vector)`` pairs, where ``drug`` is a
SMILES string or a parsed :class:`~drugqnn.smiles.MolGraph` and
``cell_vector`` is the binary mutation vector; ``y`` holds the regression
targets (normalized IC50 responses).  Both estimators train with per-sample
(or mini-batch) Adam steps, shuffling the training order deterministically
per epoch, so a fit is a pure function of (constructor params, data).

The hybrid estimator ends in the quantum re-uploading head, the classical
one in a small MLP head; branches are identical and identically initialized
for the same seed.
"""

from __future__ import annotations

import math
import time

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .data import epoch_permutation
from .exceptions import TrainingError
from .layers import Adam, mse
from .models import ResponseNetwork
from .validation import check_pairs, check_targets


class _DrugResponseRegressor(BaseEstimator, RegressorMixin):
    """Shared fit/predict machinery; subclasses fix the head kind."""

    _head_kind = None  # set by subclasses

    def _network_kwargs(self) -> dict:
        raise NotImplementedError

    def fit(self, X, y, eval_set=None, resume=False):
        """Train for ``self.epochs`` epochs.

        eval_set: optional (X_test, y_test) evaluated with frozen parameters
        after every epoch (in fixed order).  With ``resume=True`` training
        continues from the state left by a previous fit (or a loaded
        checkpoint) up to ``self.epochs`` total epochs.
        """
        pairs = check_pairs(X, self.cell_dim)
        targets = check_targets(y, len(pairs))
        if eval_set is not None:
            eval_pairs = check_pairs(eval_set[0], self.cell_dim)
            eval_targets = check_targets(eval_set[1], len(eval_pairs))
        else:
            eval_pairs, eval_targets = None, None

        if resume:
            if not hasattr(self, "network_"):
                raise TrainingError("resume requested but the estimator is not fitted")
            start_epoch = self.n_epochs_done_
        else:
            self.network_ = ResponseNetwork(
                head_kind=self._head_kind, seed=self.seed, **self._network_kwargs())
            self.optimizer_ = Adam(self.network_.parameters(), lr=self.lr)
            self.history_ = []
            start_epoch = 0

        net = self.network_
        optimizer = self.optimizer_
        n = len(pairs)
        batch_size = max(1, int(self.batch_size))

        for epoch in range(start_epoch, self.epochs):
            tick = time.perf_counter()
            order = epoch_permutation(n, epoch, self.seed)
            squared_error = 0.0
            accum = None
            accum_count = 0
            for position, idx in enumerate(order):
                graph, bits = pairs[idx]
                pred = net.forward(graph, bits)
                err = pred - targets[idx]
                if not math.isfinite(err):
                    raise TrainingError(
                        f"non-finite loss at epoch {epoch}, sample {position} "
                        f"(training record {idx})")
                squared_error += err * err
                net.backward(2.0 * err)
                grads = net.gradients()
                if batch_size == 1:
                    optimizer.step(grads)
                else:
                    if accum is None:
                        accum = [g.copy() for g in grads]
                    else:
                        for a, g in zip(accum, grads):
                            a += g
                    accum_count += 1
                    if accum_count == batch_size or position == n - 1:
                        optimizer.step([a / accum_count for a in accum])
                        accum = None
                        accum_count = 0
            train_mse = squared_error / n
            if eval_pairs is not None:
                test_mse = self._evaluate(eval_pairs, eval_targets)
            else:
                test_mse = float("nan")
            wall = time.perf_counter() - tick if self.record_timings else 0.0
            self.history_.append({
                "epoch": epoch,
                "train_mse": train_mse,
                "test_mse": test_mse,
                "wall_seconds": wall,
            })
            if self.verbose:
                print(f"epoch {epoch}: train_mse={train_mse:.6g} test_mse={test_mse:.6g}")
            if (self.early_stop_train_mse is not None
                    and train_mse < self.early_stop_train_mse):
                break

        self.n_epochs_done_ = (self.history_[-1]["epoch"] + 1) if self.history_ else 0
        self.loss_curve_ = [row["train_mse"] for row in self.history_]
        return self

    def _evaluate(self, pairs, targets) -> float:
        net = self.network_
        preds = np.array([net.predict(g, b) for g, b in pairs])
        return mse(preds, targets)

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "network_"):
            raise TrainingError("estimator is not fitted")
        pairs = check_pairs(X, self.cell_dim)
        return np.array([self.network_.predict(g, b) for g, b in pairs])

    def score_mse(self, X, y) -> float:
        """Plain MSE counterpart to RegressorMixin's R^2 ``score``."""
        pairs = check_pairs(X, self.cell_dim)
        targets = check_targets(y, len(pairs))
        return self._evaluate(pairs, targets)

    def parameter_census(self) -> dict[str, int]:
        if not hasattr(self, "network_"):
            raise TrainingError("estimator is not fitted")
        return self.network_.census()


class HybridDrugResponseRegressor(_DrugResponseRegressor):
    """Two-branch network with the quantum re-uploading head."""

    _head_kind = "hybrid"

    def __init__(self, lr=1.8e-3, epochs=10, seed=0, batch_size=1,
                 cell_dim=735, conv_channels=(32, 64, 128), kernel_size=8,
                 pool_window=3, gcn_dims=(78, 156, 312), drug_hidden=1024,
                 branch_dim=128, n_qubits=8, layers_per_block=5,
                 entangler="ring", rotation_axis="ry",
                 early_stop_train_mse=None, record_timings=False, verbose=0):
        self.lr = lr
        self.epochs = epochs
        self.seed = seed
        self.batch_size = batch_size
        self.cell_dim = cell_dim
        self.conv_channels = conv_channels
        self.kernel_size = kernel_size
        self.pool_window = pool_window
        self.gcn_dims = gcn_dims
        self.drug_hidden = drug_hidden
        self.branch_dim = branch_dim
        self.n_qubits = n_qubits
        self.layers_per_block = layers_per_block
        self.entangler = entangler
        self.rotation_axis = rotation_axis
        self.early_stop_train_mse = early_stop_train_mse
        self.record_timings = record_timings
        self.verbose = verbose

    def _network_kwargs(self):
        return dict(
            cell_dim=self.cell_dim, conv_channels=tuple(self.conv_channels),
            kernel_size=self.kernel_size, pool_window=self.pool_window,
            gcn_dims=tuple(self.gcn_dims), drug_hidden=self.drug_hidden,
            branch_dim=self.branch_dim, n_qubits=self.n_qubits,
            layers_per_block=self.layers_per_block, entangler=self.entangler,
            rotation_axis=self.rotation_axis,
        )

    def prediction_bounds(self) -> tuple[float, float]:
        """Reachable output interval [offset - |scale|, offset + |scale|]."""
        if not hasattr(self, "network_"):
            raise TrainingError("estimator is not fitted")
        return self.network_.head.output_bounds()


class ClassicalDrugResponseRegressor(_DrugResponseRegressor):
    """Same branches, with the dense -> ReLU -> dense(1) head."""

    _head_kind = "classical"

    def __init__(self, lr=1.8e-3, epochs=10, seed=0, batch_size=1,
                 cell_dim=735, conv_channels=(32, 64, 128), kernel_size=8,
                 pool_window=3, gcn_dims=(78, 156, 312), drug_hidden=1024,
                 branch_dim=128, head_hidden=8,
                 early_stop_train_mse=None, record_timings=False, verbose=0):
        self.lr = lr
        self.epochs = epochs
        self.seed = seed
        self.batch_size = batch_size
        self.cell_dim = cell_dim
        self.conv_channels = conv_channels
        self.kernel_size = kernel_size
        self.pool_window = pool_window
        self.gcn_dims = gcn_dims
        self.drug_hidden = drug_hidden
        self.branch_dim = branch_dim
        self.head_hidden = head_hidden
        self.early_stop_train_mse = early_stop_train_mse
        self.record_timings = record_timings
        self.verbose = verbose

    def _network_kwargs(self):
        return dict(
            cell_dim=self.cell_dim, conv_channels=tuple(self.conv_channels),
            kernel_size=self.kernel_size, pool_window=self.pool_window,
            gcn_dims=tuple(self.gcn_dims), drug_hidden=self.drug_hidden,
            branch_dim=self.branch_dim, head_hidden=self.head_hidden,
        )
