"""Assembly of the two-branch response network and its two heads.

A cell line enters as a binary vector through a conv/pool stack, the drug as
a molecular graph through a GCN stack; both branches end in an equal-width
embedding, which are concatenated (cell first, then drug) and consumed either
by the quantum re-uploading head or by a small classical MLP head.  Branch
construction draws from a shared seeded RNG in a fixed order, so the two
model variants start from identical branch weights for the same seed and
differ only in the head.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ConfigError
from .layers import Conv1d, Dense, GlobalMaxPool, GraphConv, MaxPool1d, ReLU
from .reupload import ReuploadConfig, ReuploadLayer, init_params
from .smiles import FEATURE_WIDTH


class CellLineEncoder:
    """Conv/pool stack over the mutation bit vector, flattened into a dense
    embedding.  All sizes are validated up front so a too-small input fails
    at construction, not mid-training."""

    def __init__(self, input_length: int, channels, kernel_size: int,
                 pool_window: int, out_dim: int, rng: np.random.Generator):
        self.input_length = input_length
        self.blocks = []
        length = input_length
        in_ch = 1
        for out_ch in channels:
            conv = Conv1d(in_ch, out_ch, kernel_size, rng=rng)
            pool = MaxPool1d(pool_window)
            length = pool.output_length(conv.output_length(length))
            if length < 1:
                raise ConfigError(
                    f"cell branch collapses to zero length with input {input_length}")
            self.blocks.append((conv, ReLU(), pool))
            in_ch = out_ch
        self.flat_dim = in_ch * length
        self.fc = Dense(self.flat_dim, out_dim, rng=rng)
        self._cache_shape = (in_ch, length)

    def forward(self, bits: np.ndarray) -> np.ndarray:
        x = bits[None, :]
        for conv, relu, pool in self.blocks:
            x = pool.forward(relu.forward(conv.forward(x)))
        return self.fc.forward(x.reshape(-1))

    def backward(self, upstream: np.ndarray):
        dx = self.fc.backward(upstream).reshape(self._cache_shape)
        for conv, relu, pool in reversed(self.blocks):
            dx = conv.backward(relu.backward(pool.backward(dx)))
        return dx

    def parameters(self):
        out = []
        for conv, _, _ in self.blocks:
            out.extend(conv.parameters())
        out.extend(self.fc.parameters())
        return out

    def gradients(self):
        out = []
        for conv, _, _ in self.blocks:
            out.extend(conv.gradients())
        out.extend(self.fc.gradients())
        return out


class DrugGraphEncoder:
    """GCN stack over (node features, adjacency), globally max-pooled, then
    two dense layers down to the embedding width."""

    def __init__(self, gcn_dims, hidden_dim: int, out_dim: int,
                 rng: np.random.Generator, in_features: int = FEATURE_WIDTH):
        self.gcn_layers = []
        width = in_features
        for dim in gcn_dims:
            self.gcn_layers.append((GraphConv(width, dim, rng=rng), ReLU()))
            width = dim
        self.pool = GlobalMaxPool()
        self.fc1 = Dense(width, hidden_dim, rng=rng)
        self.fc1_relu = ReLU()
        self.fc2 = Dense(hidden_dim, out_dim, rng=rng)

    def forward(self, node_features: np.ndarray, adjacency: np.ndarray) -> np.ndarray:
        x = node_features
        for gcn, relu in self.gcn_layers:
            x = relu.forward(gcn.forward(x, adjacency))
        v = self.pool.forward(x)
        return self.fc2.forward(self.fc1_relu.forward(self.fc1.forward(v)))

    def backward(self, upstream: np.ndarray):
        dv = self.fc1.backward(self.fc1_relu.backward(self.fc2.backward(upstream)))
        dx = self.pool.backward(dv)
        for gcn, relu in reversed(self.gcn_layers):
            dx = gcn.backward(relu.backward(dx))
        return dx

    def parameters(self):
        out = []
        for gcn, _ in self.gcn_layers:
            out.extend(gcn.parameters())
        out.extend(self.fc1.parameters())
        out.extend(self.fc2.parameters())
        return out

    def gradients(self):
        out = []
        for gcn, _ in self.gcn_layers:
            out.extend(gcn.gradients())
        out.extend(self.fc1.gradients())
        out.extend(self.fc2.gradients())
        return out


class QuantumHead:
    """Re-uploading layer over the concatenated embedding.

    Scalar output scale * <Z> + offset, so predictions always lie in
    [offset - |scale|, offset + |scale|].
    """

    def __init__(self, feature_dim: int, n_qubits: int, layers_per_block: int,
                 entangler: str, rotation_axis: str, rng: np.random.Generator):
        if feature_dim % n_qubits != 0:
            raise ConfigError(
                f"embedding width {feature_dim} is not divisible by {n_qubits} qubits")
        config = ReuploadConfig(
            n_qubits=n_qubits,
            n_blocks=feature_dim // n_qubits,
            layers_per_block=layers_per_block,
            entangler=entangler,
            rotation_axis=rotation_axis,
        )
        # readout pair is stored as 1-element arrays so the optimizer can
        # update every parameter uniformly in place
        self.layer = ReuploadLayer(config, params=init_params(config, rng))
        self._scale = np.array([self.layer.params.scale])
        self._offset = np.array([self.layer.params.offset])
        self.grad_thetas = np.zeros_like(self.layer.params.thetas)
        self.grad_scale = np.zeros(1)
        self.grad_offset = np.zeros(1)

    @property
    def n_rotation_parameters(self) -> int:
        return self.layer.config.n_thetas

    def forward(self, features: np.ndarray) -> float:
        self.layer.params.scale = float(self._scale[0])
        self.layer.params.offset = float(self._offset[0])
        return self.layer.forward(features)

    def backward(self, upstream: float) -> np.ndarray:
        grads = self.layer.backward(upstream)
        self.grad_thetas = grads.d_thetas
        self.grad_scale = np.array([grads.d_scale])
        self.grad_offset = np.array([grads.d_offset])
        return grads.d_features

    def parameters(self):
        return [self.layer.params.thetas, self._scale, self._offset]

    def gradients(self):
        return [self.grad_thetas, self.grad_scale, self.grad_offset]

    def output_bounds(self) -> tuple[float, float]:
        scale, offset = abs(float(self._scale[0])), float(self._offset[0])
        return offset - scale, offset + scale


class MlpHead:
    """Classical stand-in for the quantum head: dense -> ReLU -> dense(1)."""

    def __init__(self, feature_dim: int, hidden_dim: int, rng: np.random.Generator):
        self.fc1 = Dense(feature_dim, hidden_dim, rng=rng)
        self.relu = ReLU()
        self.fc2 = Dense(hidden_dim, 1, rng=rng)

    def forward(self, features: np.ndarray) -> float:
        return float(self.fc2.forward(self.relu.forward(self.fc1.forward(features)))[0])

    def backward(self, upstream: float) -> np.ndarray:
        return self.fc1.backward(self.relu.backward(self.fc2.backward(np.array([upstream]))))

    def parameters(self):
        return self.fc1.parameters() + self.fc2.parameters()

    def gradients(self):
        return self.fc1.gradients() + self.fc2.gradients()


class ResponseNetwork:
    """The full two-branch network with either head.

    ``head_kind`` is "hybrid" (quantum re-uploading head) or "classical"
    (MLP head).  Forward caches activations for exactly one backward.
    """

    def __init__(self, head_kind: str, seed: int, cell_dim: int = 735,
                 conv_channels=(32, 64, 128), kernel_size: int = 8,
                 pool_window: int = 3, gcn_dims=(78, 156, 312),
                 drug_hidden: int = 1024, branch_dim: int = 128,
                 n_qubits: int = 8, layers_per_block: int = 5,
                 entangler: str = "ring", rotation_axis: str = "ry",
                 head_hidden: int = 8):
        if head_kind not in ("hybrid", "classical"):
            raise ConfigError(f"head_kind must be 'hybrid' or 'classical', got {head_kind!r}")
        rng = np.random.default_rng(seed)
        # branch construction order is fixed so both head kinds share
        # identical branch initializations for the same seed
        self.cell_branch = CellLineEncoder(
            cell_dim, conv_channels, kernel_size, pool_window, branch_dim, rng)
        self.drug_branch = DrugGraphEncoder(gcn_dims, drug_hidden, branch_dim, rng)
        self.head_kind = head_kind
        self.seed = seed
        self.cell_dim = cell_dim
        self.branch_dim = branch_dim
        if head_kind == "hybrid":
            self.head = QuantumHead(2 * branch_dim, n_qubits, layers_per_block,
                                    entangler, rotation_axis, rng)
        else:
            self.head = MlpHead(2 * branch_dim, head_hidden, rng)

    def forward(self, graph, bits: np.ndarray) -> float:
        if bits.shape != (self.cell_dim,):
            raise ValueError(f"expected ({self.cell_dim},) cell vector, got {bits.shape}")
        cell_vec = self.cell_branch.forward(bits)
        drug_vec = self.drug_branch.forward(graph.features, graph.adjacency)
        return self.head.forward(np.concatenate([cell_vec, drug_vec]))

    def backward(self, upstream: float):
        d_embed = self.head.backward(upstream)
        self.cell_branch.backward(d_embed[: self.branch_dim])
        self.drug_branch.backward(d_embed[self.branch_dim:])

    def predict(self, graph, bits: np.ndarray) -> float:
        return self.forward(graph, bits)

    def parameters(self):
        return (self.cell_branch.parameters() + self.drug_branch.parameters()
                + self.head.parameters())

    def gradients(self):
        return (self.cell_branch.gradients() + self.drug_branch.gradients()
                + self.head.gradients())

    def census(self) -> dict[str, int]:
        """Trainable parameter counts per component, plus the rotation count
        for the quantum head."""
        counts = {
            "cell_branch": sum(p.size for p in self.cell_branch.parameters()),
            "drug_branch": sum(p.size for p in self.drug_branch.parameters()),
            "head": sum(p.size for p in self.head.parameters()),
        }
        if self.head_kind == "hybrid":
            counts["head_rotations"] = self.head.n_rotation_parameters
        counts["total"] = counts["cell_branch"] + counts["drug_branch"] + counts["head"]
        return counts
