"""Data re-uploading quantum layer.

Consumes a classical feature vector by encoding it across circuit depth on a
small fixed register: the features are cut into consecutive groups of
``n_qubits``, each group entering as one RZ angle per qubit, with trainable
variational layers (one rotation per qubit followed by an entangler of CNOTs)
between consecutive encoding groups and before the first one.  The readout is
<Z> on qubit 0 after every other qubit fans in through a CNOT, scaled and
shifted by two trainable readout parameters.

Because every feature is encoded by exactly one RZ, the layer output is a
degree-1 trigonometric polynomial a + b*cos(x) + c*sin(x) in each individual
feature, and 2*pi-periodic in it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .exceptions import ConfigError
from .simulator import CNOT, RX, RY, RZ, Circuit, GateOp, cnot, new_zero_state, rz

_AXIS_GATES = {"rx": RX, "ry": RY, "rz": RZ}


@dataclass(frozen=True)
class ReuploadConfig:
    """Shape of the re-uploading circuit.

    ``n_blocks`` is the number of encoding groups, so the layer consumes
    ``n_qubits * n_blocks`` features and owns
    ``n_qubits * layers_per_block * (n_blocks + 1)`` rotation angles (the
    ``+ 1`` is the variational block placed before any encoding).
    """

    n_qubits: int = 8
    n_blocks: int = 32
    layers_per_block: int = 5
    entangler: str = "ring"  # "ring" wraps qubit n-1 back onto 0; "chain" does not
    rotation_axis: str = "ry"

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ConfigError("re-uploading layer needs at least 2 qubits")
        if self.n_blocks < 1 or self.layers_per_block < 1:
            raise ConfigError("n_blocks and layers_per_block must be positive")
        if self.entangler not in ("ring", "chain"):
            raise ConfigError(f"entangler must be 'ring' or 'chain', got {self.entangler!r}")
        if self.rotation_axis not in _AXIS_GATES:
            raise ConfigError(f"rotation_axis must be one of {sorted(_AXIS_GATES)}")

    @property
    def n_features(self) -> int:
        return self.n_qubits * self.n_blocks

    @property
    def n_thetas(self) -> int:
        return self.n_qubits * self.layers_per_block * (self.n_blocks + 1)


@dataclass
class ReuploadParams:
    """Trainable state: rotation angles plus the affine readout pair."""

    thetas: np.ndarray
    scale: float = 1.0
    offset: float = 0.0


@dataclass
class ReuploadGrads:
    """Chain-rule results of one backward pass."""

    d_thetas: np.ndarray
    d_scale: float
    d_offset: float
    d_features: np.ndarray


def init_params(config: ReuploadConfig, rng: np.random.Generator) -> ReuploadParams:
    """Angles uniform on [0, 2*pi); readout starts as the identity map of <Z>."""
    thetas = rng.uniform(0.0, 2.0 * np.pi, size=config.n_thetas)
    return ReuploadParams(thetas=thetas, scale=1.0, offset=0.0)


def _entangler_pairs(config: ReuploadConfig):
    n = config.n_qubits
    last = n if config.entangler == "ring" else n - 1
    return [(q, (q + 1) % n) for q in range(last)]


def _build_ops(features, config: ReuploadConfig):
    """Ops list plus the positions of the encoding RZ gates (feature order)."""
    axis = _AXIS_GATES[config.rotation_axis]
    pairs = _entangler_pairs(config)
    ops: list[GateOp] = []
    encoding_positions: list[int] = []
    slot = 0

    def variational_block():
        nonlocal slot
        for _ in range(config.layers_per_block):
            for q in range(config.n_qubits):
                ops.append(GateOp(axis, q, param_index=slot))
                slot += 1
            for c, t in pairs:
                ops.append(cnot(c, t))

    variational_block()
    for b in range(config.n_blocks):
        for q in range(config.n_qubits):
            encoding_positions.append(len(ops))
            ops.append(rz(q, angle=float(features[b * config.n_qubits + q])))
        variational_block()
    for q in range(1, config.n_qubits):
        ops.append(cnot(q, 0))
    return ops, encoding_positions


def build_circuit(features, config: ReuploadConfig) -> Circuit:
    """The full measurement circuit for one feature vector.

    Encoding angles are baked in as fixed RZ angles; the trainable rotations
    carry parameter slots 0 .. n_thetas-1 in block/layer/qubit order.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.shape != (config.n_features,):
        raise ValueError(f"expected {config.n_features} features, got shape {features.shape}")
    ops, _ = _build_ops(features, config)
    return Circuit(config.n_qubits, ops, observable=0)


class ReuploadLayer:
    """Forward/backward wrapper around the re-uploading circuit.

    ``forward`` returns scale * <Z> + offset; ``backward`` propagates an
    upstream scalar into gradients for the angles, the readout pair, and the
    input features (everything the surrounding network needs).  A backward
    call consumes the activation cached by the matching forward.
    """

    def __init__(self, config: ReuploadConfig, params: ReuploadParams | None = None,
                 rng: np.random.Generator | None = None):
        self.config = config
        if params is None:
            params = init_params(config, rng if rng is not None else np.random.default_rng())
        if params.thetas.shape != (config.n_thetas,):
            raise ConfigError(
                f"expected {config.n_thetas} angles, got {params.thetas.shape}"
            )
        self.params = params
        ops, encoding_positions = _build_ops(np.zeros(config.n_features), config)
        circuit = Circuit(config.n_qubits, ops, observable=0)
        kinds, targets, controls, angles, slots = circuit._compile()
        self._kinds = kinds
        self._targets = targets
        self._controls = controls
        positions = np.flatnonzero(slots >= 0)
        self._theta_positions = positions[np.argsort(slots[positions])]
        self._enc_positions = np.asarray(encoding_positions, dtype=np.int64)
        self._want = np.zeros(len(kinds), dtype=np.bool_)
        self._want[self._theta_positions] = True
        self._want[self._enc_positions] = True
        self._base_angles = angles
        self._cache = None

    @property
    def n_trainable(self) -> int:
        return self.config.n_thetas + 2

    def circuit_for(self, features) -> Circuit:
        return build_circuit(features, self.config)

    def _resolved_angles(self, features) -> np.ndarray:
        angles = self._base_angles.copy()
        angles[self._theta_positions] = self.params.thetas  # positions ordered by slot
        angles[self._enc_positions] = features
        return angles

    def forward(self, features) -> float:
        features = np.asarray(features, dtype=np.float64)
        if features.shape != (self.config.n_features,):
            raise ValueError(
                f"expected {self.config.n_features} features, got shape {features.shape}"
            )
        if not np.all(np.isfinite(features)):
            raise ValueError("features must be finite")
        angles = self._resolved_angles(features)
        state = new_zero_state(self.config.n_qubits)
        _kernels.evolve(state.amplitudes, self._kinds, self._targets, self._controls, angles)
        z = float(_kernels.expectation_z(state.amplitudes, 0))
        self._cache = (angles, state.amplitudes, z)
        return self.params.scale * z + self.params.offset

    def backward(self, upstream: float) -> ReuploadGrads:
        if self._cache is None:
            raise RuntimeError("backward called without a preceding forward")
        angles, amps, z = self._cache
        self._cache = None
        gate_grads = np.zeros(len(self._kinds), dtype=np.float64)
        _kernels.adjoint_sweep(
            amps, self._kinds, self._targets, self._controls, angles, self._want, 0, gate_grads
        )
        factor = upstream * self.params.scale
        return ReuploadGrads(
            d_thetas=factor * gate_grads[self._theta_positions],
            d_scale=upstream * z,
            d_offset=upstream,
            d_features=factor * gate_grads[self._enc_positions],
        )
