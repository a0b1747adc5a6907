"""Dense statevector simulator for the RX/RY/RZ/CNOT gate set.

Conventions: amplitudes are stored as a flat complex128 array indexed by the
basis integer, qubit 0 being the least-significant bit.  Rotation gates are
exp(-i*theta*sigma/2):

    RX(t) = [[cos(t/2), -i sin(t/2)], [-i sin(t/2), cos(t/2)]]
    RY(t) = [[cos(t/2), -sin(t/2)],   [sin(t/2),     cos(t/2)]]
    RZ(t) = [[exp(-i t/2), 0],        [0,      exp(i t/2)]]

Measurement is the Pauli-Z expectation on a single qubit.  Gradients of that
expectation with respect to rotation angles come from the adjoint method: one
forward pass, then a single backward sweep that un-applies each gate once
while maintaining the back-propagated observable vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exceptions import ConfigError

RX = "rx"
RY = "ry"
RZ = "rz"
CNOT = "cnot"

ROTATION_KINDS = (RX, RY, RZ)

_KIND_CODES = {RX: _kernels.K_RX, RY: _kernels.K_RY, RZ: _kernels.K_RZ, CNOT: _kernels.K_CNOT}

MAX_QUBITS = 24  # 2^24 complex amplitudes = 256 MiB; hard memory guard


@dataclass(frozen=True)
class GateOp:
    """A single gate: rotation (one qubit, one angle) or CNOT (control/target).

    ``param_index`` links a rotation's angle to a trainable parameter slot;
    when set, the slot value supersedes ``angle`` at execution time.
    """

    kind: str
    qubit: int
    control: int | None = None
    angle: float = 0.0
    param_index: int | None = None

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == CNOT:
            if self.control is None:
                raise ValueError("CNOT requires a control qubit")
            if self.control == self.qubit:
                raise ValueError("CNOT control and target must be distinct")
            if self.param_index is not None:
                raise ValueError("CNOT carries no angle and cannot be parametrized")
        elif self.control is not None:
            raise ValueError(f"{self.kind} is a single-qubit gate; control not allowed")
        if self.qubit < 0 or (self.control is not None and self.control < 0):
            raise ValueError("qubit indices must be non-negative")


def rx(qubit: int, angle: float = 0.0, param_index: int | None = None) -> GateOp:
    return GateOp(RX, qubit, angle=angle, param_index=param_index)


def ry(qubit: int, angle: float = 0.0, param_index: int | None = None) -> GateOp:
    return GateOp(RY, qubit, angle=angle, param_index=param_index)


def rz(qubit: int, angle: float = 0.0, param_index: int | None = None) -> GateOp:
    return GateOp(RZ, qubit, angle=angle, param_index=param_index)


def cnot(control: int, target: int) -> GateOp:
    return GateOp(CNOT, target, control=control)


class Statevector:
    """An n-qubit pure state: 2^n complex amplitudes, unit norm."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, n_qubits: int, amplitudes: np.ndarray | None = None):
        if not 1 <= n_qubits <= MAX_QUBITS:
            raise ConfigError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
        self.n_qubits = n_qubits
        if amplitudes is None:
            amplitudes = np.zeros(1 << n_qubits, dtype=np.complex128)
            amplitudes[0] = 1.0
        else:
            amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
            if amplitudes.shape != (1 << n_qubits,):
                raise ValueError(
                    f"expected {1 << n_qubits} amplitudes for {n_qubits} qubits, "
                    f"got shape {amplitudes.shape}"
                )
        self.amplitudes = amplitudes

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amplitudes.copy())


def new_zero_state(n_qubits: int) -> Statevector:
    """|00...0>: amplitude 1 on basis index 0."""
    return Statevector(n_qubits)


def _check_op_qubits(op: GateOp, n_qubits: int):
    if op.qubit >= n_qubits or (op.control is not None and op.control >= n_qubits):
        raise ValueError(f"gate {op.kind} addresses qubit out of range for {n_qubits} qubits")


def apply_gate(state: Statevector, op: GateOp) -> Statevector:
    """Apply one gate in place and return the (mutated) state."""
    _check_op_qubits(op, state.n_qubits)
    kinds = np.array([_KIND_CODES[op.kind]], dtype=np.int64)
    targets = np.array([op.qubit], dtype=np.int64)
    controls = np.array([-1 if op.control is None else op.control], dtype=np.int64)
    angles = np.array([op.angle], dtype=np.float64)
    _kernels.evolve(state.amplitudes, kinds, targets, controls, angles)
    return state


def expectation_z(state: Statevector, qubit: int) -> float:
    """Pauli-Z expectation on ``qubit``; in [-1, 1]."""
    if not 0 <= qubit < state.n_qubits:
        raise ValueError(f"qubit {qubit} out of range for {state.n_qubits} qubits")
    return float(_kernels.expectation_z(state.amplitudes, qubit))


class Circuit:
    """An ordered gate sequence on ``n_qubits`` with a Z observable on one qubit.

    Validated at construction: all qubit indices in range, and each trainable
    ``param_index`` occurring at most once.
    """

    def __init__(self, n_qubits: int, ops, observable: int = 0):
        if not 1 <= n_qubits <= MAX_QUBITS:
            raise ConfigError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
        if not 0 <= observable < n_qubits:
            raise ValueError(f"observable qubit {observable} out of range")
        ops = tuple(ops)
        seen_slots = set()
        for op in ops:
            _check_op_qubits(op, n_qubits)
            if op.param_index is not None:
                if op.param_index < 0:
                    raise ValueError("param_index must be non-negative")
                if op.param_index in seen_slots:
                    raise ValueError(f"param_index {op.param_index} used more than once")
                seen_slots.add(op.param_index)
        self.n_qubits = n_qubits
        self.ops = ops
        self.observable = observable
        self.n_params = 1 + max(seen_slots) if seen_slots else 0
        self._compiled = None

    def _compile(self):
        """Flatten ops into parallel arrays consumed by the kernels."""
        if self._compiled is None:
            n = len(self.ops)
            kinds = np.empty(n, dtype=np.int64)
            targets = np.empty(n, dtype=np.int64)
            controls = np.full(n, -1, dtype=np.int64)
            angles = np.empty(n, dtype=np.float64)
            slots = np.full(n, -1, dtype=np.int64)
            for i, op in enumerate(self.ops):
                kinds[i] = _KIND_CODES[op.kind]
                targets[i] = op.qubit
                if op.control is not None:
                    controls[i] = op.control
                angles[i] = op.angle
                if op.param_index is not None:
                    slots[i] = op.param_index
            self._compiled = (kinds, targets, controls, angles, slots)
        return self._compiled


def _resolved_angles(circuit: Circuit, params) -> np.ndarray:
    kinds, targets, controls, angles, slots = circuit._compile()
    params = np.asarray(params, dtype=np.float64)
    if params.ndim != 1 and circuit.n_params > 0:
        raise ValueError("params must be a 1-D array of angles")
    if params.size < circuit.n_params:
        raise ValueError(
            f"circuit uses parameter slots up to {circuit.n_params - 1}, "
            f"got only {params.size} values"
        )
    resolved = angles.copy()
    bound = slots >= 0
    if bound.any():
        resolved[bound] = params[slots[bound]]
    return resolved


def run_circuit(circuit: Circuit, params=()) -> float:
    """Evolve |0...0> through the circuit; return <Z> on the observable qubit."""
    kinds, targets, controls, _, _ = circuit._compile()
    angles = _resolved_angles(circuit, params)
    state = new_zero_state(circuit.n_qubits)
    _kernels.evolve(state.amplitudes, kinds, targets, controls, angles)
    return float(_kernels.expectation_z(state.amplitudes, circuit.observable))


def adjoint_gradients(circuit: Circuit, params=()) -> np.ndarray:
    """d<Z>/d(param) for every trainable slot, by the adjoint method.

    Cost is one forward evolution plus one backward sweep over the gates,
    independent of the number of parameters.
    """
    _, slot_grads, _ = _adjoint(circuit, params, all_rotations=False)
    return slot_grads


def gate_angle_gradients(circuit: Circuit, params=()) -> tuple[float, np.ndarray]:
    """(<Z>, per-gate d<Z>/d(angle)) for every rotation gate, slotted or not.

    Entries for CNOT positions are zero.  This is the building block for
    layers that need gradients with respect to fixed encoding angles as well
    as trainable ones.
    """
    expectation, _, gate_grads = _adjoint(circuit, params, all_rotations=True)
    return expectation, gate_grads


def _adjoint(circuit: Circuit, params, all_rotations: bool):
    kinds, targets, controls, _, slots = circuit._compile()
    angles = _resolved_angles(circuit, params)
    state = new_zero_state(circuit.n_qubits)
    _kernels.evolve(state.amplitudes, kinds, targets, controls, angles)
    expectation = float(_kernels.expectation_z(state.amplitudes, circuit.observable))

    if all_rotations:
        want = kinds != _kernels.K_CNOT
    else:
        want = slots >= 0
    gate_grads = np.zeros(len(circuit.ops), dtype=np.float64)
    _kernels.adjoint_sweep(
        state.amplitudes, kinds, targets, controls, angles, want, circuit.observable, gate_grads
    )
    slot_grads = np.zeros(circuit.n_params, dtype=np.float64)
    bound = slots >= 0
    if bound.any():
        # slots are unique per circuit, so assignment (not accumulation) is exact
        slot_grads[slots[bound]] = gate_grads[bound]
    return expectation, slot_grads, gate_grads
