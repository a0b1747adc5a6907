"""Classical neural-network building blocks with explicit backward passes.

Every layer caches what its backward pass needs during forward; ``backward``
takes the upstream gradient, fills the layer's ``grad_*`` arrays, and returns
the gradient with respect to its input.  No autodiff tape: the network wiring
is fixed, and keeping the chain rule explicit makes the seam to the quantum
layer's adjoint gradients auditable.

Arrays are plain numpy float64; a 1-D convolution input is (channels, length),
a graph layer input is (nodes, features).
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .exceptions import ConfigError


def uniform_fan_in(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    """Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) initialization."""
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Conv1d:
    """Valid (unpadded) cross-correlation over the length axis.

    weight: (out_channels, in_channels, kernel_size); bias: (out_channels,).
    """

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int,
                 stride: int = 1, rng: np.random.Generator | None = None):
        if kernel_size < 1 or stride < 1:
            raise ConfigError("kernel_size and stride must be >= 1")
        rng = rng if rng is not None else np.random.default_rng()
        fan_in = in_channels * kernel_size
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.stride = stride
        self.weight = uniform_fan_in(rng, fan_in, (out_channels, in_channels, kernel_size))
        self.bias = uniform_fan_in(rng, fan_in, (out_channels,))
        self.grad_weight = np.zeros_like(self.weight)
        self.grad_bias = np.zeros_like(self.bias)
        self._cache = None

    def output_length(self, length: int) -> int:
        if length < self.kernel_size:
            raise ValueError(
                f"input length {length} shorter than kernel {self.kernel_size}"
            )
        return (length - self.kernel_size) // self.stride + 1

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 2 or x.shape[0] != self.in_channels:
            raise ValueError(f"expected ({self.in_channels}, L) input, got {x.shape}")
        t = self.output_length(x.shape[1])
        windows = np.lib.stride_tricks.sliding_window_view(x, self.kernel_size, axis=1)
        windows = windows[:, :: self.stride][:, :t]  # (in, T, K)
        out = np.tensordot(self.weight, windows, axes=([1, 2], [0, 2])) + self.bias[:, None]
        self._cache = (x.shape[1], windows)
        return out

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        length, windows = self._cache
        self.grad_weight = np.tensordot(upstream, windows, axes=([1], [1]))
        self.grad_bias = upstream.sum(axis=1)
        t = upstream.shape[1]
        # (in, K, T) contributions in one contraction, then scatter per offset
        contrib = np.tensordot(self.weight, upstream, axes=([0], [0]))
        dx = np.zeros((self.in_channels, length))
        for k in range(self.kernel_size):
            dx[:, k : k + self.stride * t : self.stride] += contrib[:, k, :]
        return dx

    def parameters(self):
        return [self.weight, self.bias]

    def gradients(self):
        return [self.grad_weight, self.grad_bias]


class MaxPool1d:
    """Non-overlapping window maxima; a ragged tail is dropped.

    Ties resolve to the first index in the window, matching np.argmax.
    """

    def __init__(self, window: int):
        if window < 1:
            raise ConfigError("pool window must be >= 1")
        self.window = window
        self._cache = None

    def output_length(self, length: int) -> int:
        if self.window > length:
            raise ValueError(f"pool window {self.window} exceeds input length {length}")
        return length // self.window

    def forward(self, x: np.ndarray) -> np.ndarray:
        c, length = x.shape
        t = self.output_length(length)
        blocks = x[:, : t * self.window].reshape(c, t, self.window)
        argmax = blocks.argmax(axis=2)
        out = np.take_along_axis(blocks, argmax[:, :, None], axis=2)[:, :, 0]
        self._cache = (length, argmax)
        return out

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        length, argmax = self._cache
        c, t = upstream.shape
        dblocks = np.zeros((c, t, self.window))
        np.put_along_axis(dblocks, argmax[:, :, None], upstream[:, :, None], axis=2)
        dx = np.zeros((c, length))
        dx[:, : t * self.window] = dblocks.reshape(c, t * self.window)
        return dx


class Dense:
    """Affine map y = W x + b on 1-D vectors."""

    def __init__(self, in_features: int, out_features: int,
                 rng: np.random.Generator | None = None):
        rng = rng if rng is not None else np.random.default_rng()
        self.in_features = in_features
        self.out_features = out_features
        self.weight = uniform_fan_in(rng, in_features, (out_features, in_features))
        self.bias = uniform_fan_in(rng, in_features, (out_features,))
        self.grad_weight = np.zeros_like(self.weight)
        self.grad_bias = np.zeros_like(self.bias)
        self._cache = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape != (self.in_features,):
            raise ValueError(f"expected ({self.in_features},) input, got {x.shape}")
        self._cache = x
        return self.weight @ x + self.bias

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        x = self._cache
        self.grad_weight = np.outer(upstream, x)
        self.grad_bias = upstream.copy()
        return self.weight.T @ upstream

    def parameters(self):
        return [self.weight, self.bias]

    def gradients(self):
        return [self.grad_weight, self.grad_bias]


class ReLU:
    """Elementwise max(0, x); gradient is 0 at x == 0."""

    def __init__(self):
        self._cache = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._cache = x > 0
        return np.where(self._cache, x, 0.0)

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        return np.where(self._cache, upstream, 0.0)


class GraphConv:
    """Graph convolution with symmetric renormalization.

    forward(X, A) = D^{-1/2} (A + I) D^{-1/2} X W + b, where D is the degree
    matrix of A + I.  A must be a symmetric 0/1 adjacency with a zero
    diagonal; self-loops are added internally.
    """

    def __init__(self, in_features: int, out_features: int,
                 rng: np.random.Generator | None = None):
        rng = rng if rng is not None else np.random.default_rng()
        self.in_features = in_features
        self.out_features = out_features
        self.weight = uniform_fan_in(rng, in_features, (in_features, out_features))
        self.bias = uniform_fan_in(rng, in_features, (out_features,))
        self.grad_weight = np.zeros_like(self.weight)
        self.grad_bias = np.zeros_like(self.bias)
        self._cache = None

    @staticmethod
    def normalized_adjacency(adjacency: np.ndarray) -> np.ndarray:
        a = np.asarray(adjacency, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"adjacency must be square, got {a.shape}")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(a) != 0):
            raise ValueError("adjacency diagonal must be zero (self-loops are added here)")
        a_hat = a + np.eye(a.shape[0])
        inv_sqrt_deg = 1.0 / np.sqrt(a_hat.sum(axis=1))
        return a_hat * inv_sqrt_deg[:, None] * inv_sqrt_deg[None, :]

    def forward(self, x: np.ndarray, adjacency: np.ndarray) -> np.ndarray:
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ValueError(f"expected (N, {self.in_features}) input, got {x.shape}")
        s = self.normalized_adjacency(adjacency)
        sx = s @ x
        self._cache = (s, sx)
        return sx @ self.weight + self.bias

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        s, sx = self._cache
        self.grad_weight = sx.T @ upstream
        self.grad_bias = upstream.sum(axis=0)
        return s @ (upstream @ self.weight.T)  # s is symmetric

    def parameters(self):
        return [self.weight, self.bias]

    def gradients(self):
        return [self.grad_weight, self.grad_bias]


class GlobalMaxPool:
    """Column-wise maximum over nodes; gradient routes to the argmax row."""

    def __init__(self):
        self._cache = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        argmax = x.argmax(axis=0)
        self._cache = (x.shape[0], argmax)
        return x[argmax, np.arange(x.shape[1])]

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        n, argmax = self._cache
        dx = np.zeros((n, upstream.shape[0]))
        dx[argmax, np.arange(upstream.shape[0])] = upstream
        return dx


def mse(pred, target) -> float:
    """Mean squared error (1/N) sum (pred_i - target_i)^2."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred - target
    return float(np.mean(diff * diff))


def mse_grad(pred, target) -> np.ndarray:
    """d(mse)/d(pred) = 2 (pred - target) / N."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    return 2.0 * (pred - target) / pred.size


class Adam:
    """Bias-corrected Adam over a fixed list of parameter arrays.

    ``step`` updates the arrays in place so layers keep their references.
    """

    def __init__(self, params, lr: float = 1.8e-3, beta1: float = 0.9,
                 beta2: float = 0.999, epsilon: float = 1e-8):
        if lr < 0:
            raise ConfigError("learning rate must be non-negative")
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.step_count = 0
        self.first_moment = [np.zeros_like(p) for p in self.params]
        self.second_moment = [np.zeros_like(p) for p in self.params]

    def step(self, grads):
        grads = list(grads)
        if len(grads) != len(self.params):
            raise ValueError(f"expected {len(self.params)} gradient arrays, got {len(grads)}")
        self.step_count += 1
        bc1 = 1.0 - self.beta1 ** self.step_count
        bc2 = 1.0 - self.beta2 ** self.step_count
        for p, g, m, v in zip(self.params, grads, self.first_moment, self.second_moment):
            if g.shape != p.shape:
                raise ValueError(f"gradient shape {g.shape} does not match {p.shape}")
            _kernels.adam_update(
                p.ravel(), np.ascontiguousarray(g, dtype=np.float64).ravel(),
                m.ravel(), v.ravel(),
                self.lr, self.beta1, self.beta2, self.epsilon, bc1, bc2)
