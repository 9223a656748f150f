"""Toy-scale stacked sequence classifier and a finite-difference training demo.

The network is the smallest block that exercises the liquid mechanism inside
a model: per-feature SSM convolution (main kernel plus optional liquid
contribution, summed pre-nonlinearity), pointwise GELU, residual connection,
mean pooling over time, linear readout. Training uses central finite
differences over a deliberately tiny parameter vector; no autodiff.

Trainable parameters: the 1 -> H input lift, the per-layer per-feature
complex output maps, per-path gains, and the readout. The
diagonal-plus-low-rank core and the step sizes stay frozen at their LegS
initialization, so every forward pass reuses precomputed Krylov bases and
costs a handful of FFTs.

Inside a layer the main and per-order liquid tap sequences are normalized to
unit energy and scaled by their gains. Jointly rescaling the output and input
maps reproduces exactly this freedom (input-map scale s multiplies the
order-p path by s^p), so the gains are a reparametrization of the trainable
maps rather than an extra mechanism; without them the order-p paths start
orders of magnitude below the main path and a single learning rate cannot
balance the two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conv import SequenceBatch, next_pow2
from .errors import DimensionError, ParameterBudgetError
from .ssm import discretize_bilinear, init_dt_schedule, nplr_decompose, with_output_map

TASK_NAMES = ("adjacent-product-sign", "impulse-memory")
PARAM_BUDGET = 2000


@dataclass(frozen=True)
class LayerConfig:
    """Configuration of one SSM layer."""

    features: int = 4
    state_size: int = 4
    mode: str = "none"  # kb | pb | none
    max_order: int = 2
    window: int = 8
    norm: str = "none"  # batch | layer | none
    prenorm: bool = False
    dropout: float = 0.0
    activation: str = "gelu"  # gelu | identity
    residual: bool = True
    dt_min: float | None = None
    dt_max: float = 0.2

    def __post_init__(self):
        if self.features < 1 or self.state_size < 1:
            raise DimensionError("features and state_size must be >= 1")
        if self.mode not in ("kb", "pb", "none"):
            raise DimensionError(f"unknown mode {self.mode!r}")
        if self.mode != "none" and not 2 <= self.max_order <= 10:
            raise DimensionError("liquid order must lie in 2..10")
        if not 0.0 <= self.dropout < 1.0:
            raise DimensionError("dropout must lie in [0, 1)")
        if self.norm not in ("batch", "layer", "none"):
            raise DimensionError(f"unknown norm {self.norm!r}")
        if self.activation not in ("gelu", "identity"):
            raise DimensionError(f"unknown activation {self.activation!r}")


@dataclass(frozen=True)
class ModelStack:
    """Layer list plus readout width; all layers must share a feature count."""

    layers: tuple[LayerConfig, ...]
    n_classes: int = 2

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise DimensionError("need at least one layer")
        if len({layer.features for layer in self.layers}) != 1:
            raise DimensionError("all layers must share the feature count")
        if self.n_classes < 2:
            raise DimensionError("need at least two classes")

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def features(self) -> int:
        return self.layers[0].features


@dataclass(frozen=True)
class SyntheticTask:
    """Desk-scale dataset definition."""

    name: str = "adjacent-product-sign"
    length: int = 32
    noise: float = 0.0
    n_classes: int = 2

    def __post_init__(self):
        if self.name not in TASK_NAMES:
            raise DimensionError(f"unknown task {self.name!r}")
        if self.length < 2 or self.n_classes < 2:
            raise DimensionError("need length >= 2 and n_classes >= 2")


def gelu(x: np.ndarray) -> np.ndarray:
    """GELU-shaped smooth gate 0.5 x (1 + x / sqrt(1 + x^2)).

    The algebraic sigmoid keeps the forward pass free of transcendentals,
    which matters because finite-difference training re-runs it thousands of
    times; values track the usual tanh formulation to a few percent.
    """
    return 0.5 * x * (1.0 + x / np.sqrt(1.0 + x * x))


def generate_task(task: SyntheticTask, n: int, seed: int) -> tuple[SequenceBatch, np.ndarray]:
    """Draw a labelled dataset; balanced within 5 percent per class.

    adjacent-product-sign: i.i.d. standard-normal sequences, label 1 when the
    summed lag-1 product sum_k u_k u_{k+1} is positive. The Bayes statistic is
    exactly an order-2 consecutive correlation.

    impulse-memory: a single unit impulse whose position bucket is the label,
    plus optional background noise.
    """
    if n < 2:
        raise DimensionError("need at least two samples")
    rng = np.random.default_rng(seed)
    l = task.length
    if task.name == "adjacent-product-sign":
        for _ in range(64):
            u = rng.standard_normal((n, l))
            labels = (np.sum(u[:, :-1] * u[:, 1:], axis=1) > 0).astype(int)
            frac = labels.mean()
            if abs(frac - 0.5) <= 0.05:
                return SequenceBatch(u[:, :, None]), labels
        raise DimensionError("could not draw a balanced dataset")  # pragma: no cover
    # impulse-memory: round-robin bucket labels, then shuffled
    labels = np.arange(n) % task.n_classes
    rng.shuffle(labels)
    bucket = l // task.n_classes
    if bucket < 1:
        raise DimensionError("sequence too short for the class count")
    offsets = rng.integers(0, bucket, size=n)
    positions = labels * bucket + offsets
    u = task.noise * rng.standard_normal((n, l))
    u[np.arange(n), positions] += 1.0
    return SequenceBatch(u[:, :, None]), labels


class SequenceClassifier:
    """Stacked liquid-SSM classifier over single-channel sequences."""

    def __init__(self, stack: ModelStack, seq_length: int, seed: int = 0):
        self.stack = stack
        self.seq_length = int(seq_length)
        self.seed = int(seed)
        self._band_cache: dict[tuple[int, int], tuple] = {}
        h = stack.features
        rng = np.random.default_rng(seed)

        # frozen per-layer machinery: Krylov bases for the main and liquid taps
        self._krylov: list[np.ndarray] = []  # (H, N, L) for <c, a^i b>
        self._liquid_krylov: list[dict[int, np.ndarray]] = []  # order -> (H, N, window)
        c_init: list[np.ndarray] = []
        for li, layer in enumerate(stack.layers):
            base = nplr_decompose(layer.state_size, seed=seed * 1000 + li)
            schedule = init_dt_schedule(
                h,
                dt_min=layer.dt_min,
                dt_max=layer.dt_max,
                seed=seed * 1000 + li,
                seq_length=seq_length,
            )
            kry = np.empty((h, layer.state_size, seq_length), dtype=complex)
            liq: dict[int, np.ndarray] = {}
            if layer.mode != "none":
                for p in range(2, layer.max_order + 1):
                    liq[p] = np.empty((h, layer.state_size, layer.window), dtype=complex)
            cs = np.empty((h, layer.state_size), dtype=complex)
            for i in range(h):
                sysi = with_output_map(base, seed * 1000 + 97 * li + i)
                d = discretize_bilinear(sysi, float(schedule.per_feature_dt[i]))
                cs[i] = sysi.c / np.sqrt(layer.state_size)
                x = d.b_bar.copy()
                for t in range(seq_length):
                    kry[i, :, t] = x
                    x = d.a_bar @ x
                for p, store in liq.items():
                    xb = d.b_bar**p
                    a_step = d.a_bar if layer.mode == "kb" else np.eye(layer.state_size)
                    for t in range(layer.window):
                        store[i, :, t] = xb
                        xb = a_step @ xb
            self._krylov.append(kry)
            self._liquid_krylov.append(liq)
            c_init.append(cs)

        self.params: dict[str, np.ndarray] = {"lift_w": rng.normal(0.0, 1.0, h), "lift_b": np.zeros(h)}
        for li, cs in enumerate(c_init):
            layer = stack.layers[li]
            self.params[f"c_re_{li}"] = cs.real.copy()
            self.params[f"c_im_{li}"] = cs.imag.copy()
            self.params[f"gain_main_{li}"] = np.ones(h)
            if layer.mode != "none":
                self.params[f"gain_liquid_{li}"] = np.ones((h, layer.max_order - 1))
        self.params["readout_w"] = rng.normal(0.0, 0.1, (h, stack.n_classes))
        self.params["readout_b"] = np.zeros(stack.n_classes)
        self._order = sorted(self.params)

    # -- parameter vector plumbing ------------------------------------------

    @property
    def param_count(self) -> int:
        return sum(self.params[k].size for k in self._order)

    def get_param_vector(self) -> np.ndarray:
        return np.concatenate([self.params[k].ravel() for k in self._order])

    def set_param_vector(self, vec: np.ndarray):
        if vec.size != self.param_count:
            raise DimensionError(
                f"parameter vector has length {vec.size}, expected {self.param_count}"
            )
        pos = 0
        for k in self._order:
            size = self.params[k].size
            self.params[k] = vec[pos : pos + size].reshape(self.params[k].shape).copy()
            pos += size

    # -- forward -------------------------------------------------------------

    def _banded_operator(self, l: int, lk: int) -> tuple[np.ndarray, np.ndarray]:
        key = (l, lk)
        if key not in self._band_cache:
            lag = np.arange(l)[None, :] - np.arange(l)[:, None]  # [in, out] = out - in
            valid = (lag >= 0) & (lag < lk)
            self._band_cache[key] = (np.clip(lag, 0, lk - 1), valid)
        return self._band_cache[key]

    def _conv_all(self, x: np.ndarray, taps: np.ndarray) -> np.ndarray:
        """Per-feature causal convolution of x (n, H, L) with taps (H, L_k).

        Short sequences go through a banded-Toeplitz matmul, which beats the
        transform path by a wide margin at training sizes; longer ones fall
        back to FFT convolution.
        """
        l = x.shape[-1]
        lk = taps.shape[-1]
        if l * l <= 1 << 16:
            lag, valid = self._banded_operator(l, lk)
            band = np.where(valid, taps[:, lag], 0.0)  # (H, L, L)
            return (x.transpose(1, 0, 2) @ band).transpose(1, 0, 2)
        size = next_pow2(l + lk - 1)
        xf = np.fft.rfft(x, n=size)
        kf = np.fft.rfft(taps, n=size)
        return np.fft.irfft(xf * kf, n=size)[..., :l]

    def _correlation(self, x: np.ndarray, p: int) -> np.ndarray:
        """Order-p consecutive products along time for (n, H, L) activations."""
        n, h, l = x.shape
        v = np.ones((n, h, l - p + 1))
        for j in range(p):
            v = v * x[..., j : l - p + 1 + j]
        return np.concatenate([np.zeros((n, h, p - 1)), v], axis=-1)

    @staticmethod
    def _unit(taps: np.ndarray) -> np.ndarray:
        return taps / np.maximum(np.linalg.norm(taps, axis=-1, keepdims=True), 1e-12)

    def layer_contributions(self, li: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Pre-nonlinearity pieces of layer li on input x (n, H, L).

        Returns (main, liquid); their sum feeds the activation. Exposed so the
        degree-1 vs degree-2 behaviour under input negation can be tested
        directly.
        """
        c = self.params[f"c_re_{li}"] + 1j * self.params[f"c_im_{li}"]
        taps = np.einsum("hn,hnt->ht", c.conj(), self._krylov[li]).real
        gain = self.params[f"gain_main_{li}"]
        main = self._conv_all(x, self._unit(taps)) * gain[:, None]
        liquid = np.zeros_like(main)
        for p, kry in self._liquid_krylov[li].items():
            ltaps = np.einsum("hn,hnt->ht", c.conj(), kry).real
            lgain = self.params[f"gain_liquid_{li}"][:, p - 2]
            liquid += self._conv_all(self._correlation(x, p), self._unit(ltaps)) * lgain[:, None]
        return main, liquid

    def _normalize(self, x: np.ndarray, kind: str) -> np.ndarray:
        if kind == "batch":
            m = x.mean(axis=(0, 2), keepdims=True)
            v = x.var(axis=(0, 2), keepdims=True)
        else:  # layer
            m = x.mean(axis=1, keepdims=True)
            v = x.var(axis=1, keepdims=True)
        return (x - m) / np.sqrt(v + 1e-5)

    def forward(self, u: np.ndarray, train: bool = False, rng: np.random.Generator | None = None) -> np.ndarray:
        """Logits for a batch of raw sequences u (n, L)."""
        u = np.asarray(u, dtype=float)
        if u.ndim != 2 or u.shape[1] != self.seq_length:
            raise DimensionError(
                f"expected (n, {self.seq_length}) inputs, got {u.shape}"
            )
        x = u[:, None, :] * self.params["lift_w"][:, None] + self.params["lift_b"][:, None]
        for li, layer in enumerate(self.stack.layers):
            z_in = self._normalize(x, layer.norm) if layer.prenorm and layer.norm != "none" else x
            main, liquid = self.layer_contributions(li, z_in)
            z = main + liquid
            a = gelu(z) if layer.activation == "gelu" else z
            if train and layer.dropout > 0.0:
                if rng is None:
                    raise DimensionError("dropout requires an rng in training mode")
                mask = rng.random(a.shape) >= layer.dropout
                a = a * mask / (1.0 - layer.dropout)
            x = x + a if layer.residual else a
            if layer.norm != "none" and not layer.prenorm:
                x = self._normalize(x, layer.norm)
        pooled = x.mean(axis=2)
        return pooled @ self.params["readout_w"] + self.params["readout_b"]

    def loss_and_accuracy(self, u: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
        """Mean softmax cross-entropy and top-1 accuracy."""
        logits = self.forward(u)
        shifted = logits - logits.max(axis=1, keepdims=True)
        logz = np.log(np.sum(np.exp(shifted), axis=1))
        nll = logz - shifted[np.arange(len(labels)), labels]
        acc = float(np.mean(np.argmax(logits, axis=1) == labels))
        return float(np.mean(nll)), acc


def finite_difference_gradient(f, theta: np.ndarray, rel_step: float = 1e-4) -> np.ndarray:
    """Central finite-difference gradient, step rel_step * max(1, |theta_i|)."""
    grad = np.empty_like(theta)
    for i in range(theta.size):
        h = rel_step * max(1.0, abs(theta[i]))
        probe = theta.copy()
        probe[i] = theta[i] + h
        up = f(probe)
        probe[i] = theta[i] - h
        down = f(probe)
        grad[i] = (up - down) / (2.0 * h)
    return grad


def train_demo(
    model: SequenceClassifier,
    task: SyntheticTask,
    epochs: int,
    lr: float,
    seed: int,
    n_train: int = 200,
    momentum: float = 0.9,
    fd_step: float = 1e-4,
    budget: int = PARAM_BUDGET,
) -> dict:
    """Train by central finite differences with a plain momentum update.

    Refuses models over the parameter budget. Deterministic under a fixed
    seed: the dataset, the probe order, and the update rule contain no other
    randomness, and the objective always runs the forward pass in evaluation
    mode (dropout off; stochastic masks would poison the difference
    quotients). Returns a report with per-epoch loss/accuracy, final metrics,
    the seed, and a configuration echo.
    """
    if model.param_count > budget:
        raise ParameterBudgetError(model.param_count, budget)
    batch, labels = generate_task(task, n_train, seed)
    u = batch.values[:, :, 0]

    def objective(theta: np.ndarray) -> float:
        model.set_param_vector(theta)
        return model.loss_and_accuracy(u, labels)[0]

    theta = model.get_param_vector()
    velocity = np.zeros_like(theta)
    losses, accuracies = [], []
    for _ in range(epochs):
        model.set_param_vector(theta)
        loss, acc = model.loss_and_accuracy(u, labels)
        losses.append(loss)
        accuracies.append(acc)
        grad = finite_difference_gradient(objective, theta, rel_step=fd_step)
        velocity = momentum * velocity - lr * grad
        theta = theta + velocity
    model.set_param_vector(theta)
    final_loss, final_acc = model.loss_and_accuracy(u, labels)
    layer0 = model.stack.layers[0]
    return {
        "task": task.name,
        "seed": int(seed),
        "epochs": int(epochs),
        "lr": float(lr),
        "n_train": int(n_train),
        "param_count": int(model.param_count),
        "config": {
            "depth": model.stack.depth,
            "features": layer0.features,
            "state_size": layer0.state_size,
            "mode": layer0.mode,
            "max_order": layer0.max_order,
            "window": layer0.window,
            "length": model.seq_length,
        },
        "loss": [float(v) for v in losses],
        "accuracy": [float(v) for v in accuracies],
        "final_loss": float(final_loss),
        "final_accuracy": float(final_acc),
    }
