"""Compiled statevector kernels.

Amplitudes are a flat complex128 array indexed by basis integer with qubit 0
as the least-significant bit.  Gates are encoded as parallel int/float arrays
so the hot loops stay inside numba-compiled code; the circuit-level API lives
in :mod:`drugqnn.simulator`.
"""

import numpy as np
from numba import njit

# gate kind codes used in the compiled arrays
K_RX = 0
K_RY = 1
K_RZ = 2
K_CNOT = 3


@njit(cache=True)
def adam_update(p, g, m, v, lr, b1, b2, eps, bc1, bc2):
    """Fused in-place Adam step over one flat parameter array."""
    for i in range(p.shape[0]):
        m[i] = b1 * m[i] + (1.0 - b1) * g[i]
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i]
        p[i] -= lr * (m[i] / bc1) / (np.sqrt(v[i] / bc2) + eps)


@njit(cache=True)
def evolve(amps, kinds, targets, controls, angles):
    """Apply the gate sequence to ``amps`` in place."""
    n_amp = amps.shape[0]
    for g in range(kinds.shape[0]):
        kind = kinds[g]
        step = 1 << targets[g]
        if kind == K_CNOT:
            cmask = 1 << controls[g]
            for i in range(n_amp):
                if (i & cmask) != 0 and (i & step) == 0:
                    j = i | step
                    tmp = amps[i]
                    amps[i] = amps[j]
                    amps[j] = tmp
        else:
            half = 0.5 * angles[g]
            co = np.cos(half)
            si = np.sin(half)
            if kind == K_RX:
                for base in range(0, n_amp, step << 1):
                    for off in range(step):
                        i0 = base + off
                        i1 = i0 + step
                        a0 = amps[i0]
                        a1 = amps[i1]
                        amps[i0] = co * a0 - 1j * si * a1
                        amps[i1] = co * a1 - 1j * si * a0
            elif kind == K_RY:
                for base in range(0, n_amp, step << 1):
                    for off in range(step):
                        i0 = base + off
                        i1 = i0 + step
                        a0 = amps[i0]
                        a1 = amps[i1]
                        amps[i0] = co * a0 - si * a1
                        amps[i1] = si * a0 + co * a1
            else:  # K_RZ
                ph0 = complex(co, -si)
                ph1 = complex(co, si)
                for base in range(0, n_amp, step << 1):
                    for off in range(step):
                        i0 = base + off
                        amps[i0] = ph0 * amps[i0]
                        amps[i0 + step] = ph1 * amps[i0 + step]
    return amps


@njit(cache=True)
def expectation_z(amps, qubit):
    """<Z> on ``qubit``: sum of |amp|^2 signed by the qubit's bit."""
    mask = 1 << qubit
    total = 0.0
    for i in range(amps.shape[0]):
        p = amps[i].real * amps[i].real + amps[i].imag * amps[i].imag
        if i & mask:
            total -= p
        else:
            total += p
    return total


@njit(cache=True)
def adjoint_sweep(amps, kinds, targets, controls, angles, want_grad, obs_qubit, grads):
    """Backward sweep of the adjoint method.

    ``amps`` must hold the final state produced by :func:`evolve`; it is
    consumed (rolled back to the initial state).  For every gate ``g`` with
    ``want_grad[g]`` set, ``grads[g]`` receives d<Z_obs>/d(angle_g).  One
    auxiliary vector is kept: phi = Udag_remaining * Z_obs * U |0>, and each
    gate's inverse is applied to both vectors exactly once, so the cost is
    linear in the gate count.
    """
    n_amp = amps.shape[0]
    phi = np.empty_like(amps)
    omask = 1 << obs_qubit
    for i in range(n_amp):
        if i & omask:
            phi[i] = -amps[i]
        else:
            phi[i] = amps[i]

    for g in range(kinds.shape[0] - 1, -1, -1):
        kind = kinds[g]
        step = 1 << targets[g]
        if want_grad[g] and kind != K_CNOT:
            # d/dtheta exp(-i theta sigma/2) = -i sigma/2 * U, so the gradient
            # is 2 Re <phi| (-i sigma/2) |psi> = Im <phi| sigma |psi>.
            z = 0.0j
            if kind == K_RX:
                for i in range(n_amp):
                    z += phi[i].conjugate() * amps[i ^ step]
            elif kind == K_RY:
                for i in range(n_amp):
                    a = amps[i ^ step]
                    if i & step:
                        z += phi[i].conjugate() * (1j * a)
                    else:
                        z += phi[i].conjugate() * (-1j * a)
            else:  # K_RZ
                for i in range(n_amp):
                    if i & step:
                        z -= phi[i].conjugate() * amps[i]
                    else:
                        z += phi[i].conjugate() * amps[i]
            grads[g] = z.imag

        # un-apply gate g from both vectors
        if kind == K_CNOT:
            cmask = 1 << controls[g]
            for i in range(n_amp):
                if (i & cmask) != 0 and (i & step) == 0:
                    j = i | step
                    tmp = amps[i]
                    amps[i] = amps[j]
                    amps[j] = tmp
                    tmp = phi[i]
                    phi[i] = phi[j]
                    phi[j] = tmp
        else:
            half = -0.5 * angles[g]
            co = np.cos(half)
            si = np.sin(half)
            if kind == K_RX:
                for base in range(0, n_amp, step << 1):
                    for off in range(step):
                        i0 = base + off
                        i1 = i0 + step
                        a0 = amps[i0]
                        a1 = amps[i1]
                        amps[i0] = co * a0 - 1j * si * a1
                        amps[i1] = co * a1 - 1j * si * a0
                        a0 = phi[i0]
                        a1 = phi[i1]
                        phi[i0] = co * a0 - 1j * si * a1
                        phi[i1] = co * a1 - 1j * si * a0
            elif kind == K_RY:
                for base in range(0, n_amp, step << 1):
                    for off in range(step):
                        i0 = base + off
                        i1 = i0 + step
                        a0 = amps[i0]
                        a1 = amps[i1]
                        amps[i0] = co * a0 - si * a1
                        amps[i1] = si * a0 + co * a1
                        a0 = phi[i0]
                        a1 = phi[i1]
                        phi[i0] = co * a0 - si * a1
                        phi[i1] = si * a0 + co * a1
            else:  # K_RZ
                ph0 = complex(co, -si)
                ph1 = complex(co, si)
                for base in range(0, n_amp, step << 1):
                    for off in range(step):
                        i0 = base + off
                        i1 = i0 + step
                        amps[i0] = ph0 * amps[i0]
                        amps[i1] = ph1 * amps[i1]
                        phi[i0] = ph0 * phi[i0]
                        phi[i1] = ph1 * phi[i1]
    return grads
