"""
Implicit Neural Representations

Coordinate networks mapping (s, t) to a p-dimensional latent field, with
forward evaluation, exact reverse-mode gradients and binary weight blobs.

Backbones:
- resmlp: GELU stem followed by residual GELU blocks
- ffnp: sin/cos positional encoding of each coordinate, then a GELU MLP
- ffng: frozen Gaussian random Fourier encoding, then a GELU MLP
"""

import logging
from collections import OrderedDict
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..kernels.matern import as_coords
from ..utils.config import config_hash
from ..utils.errors import DataError, NumericalError, ParameterError, ShapeError
from ..utils.serialization import pack_array, pack_header, unpack_array, unpack_header
from .activations import gelu, gelu_grad

logger = logging.getLogger(__name__)

BACKBONES = ("resmlp", "ffnp", "ffng")
INR_MAGIC = b"STACIINR"


@dataclass
class INRConfig:
    """
    Architecture of the latent network.

    Attributes:
        backbone: One of "resmlp", "ffnp", "ffng"
        layers: Number of hidden GELU layers (stem included)
        width: Hidden layer width
        latent_dim: Output dimension p
        ffnp_freq_constant: Highest positional-encoding frequency multiplier c
        ffnp_freq_count: Number of positional frequencies K per coordinate
        ffng_sigma: Standard deviation of the Gaussian encoding matrix
        ffng_encode_size: Number of Gaussian encoding rows
    """

    backbone: str = "resmlp"
    layers: int = 3
    width: int = 64
    latent_dim: int = 8
    ffnp_freq_constant: float = 30.0
    ffnp_freq_count: int = 16
    ffng_sigma: float = 1.0
    ffng_encode_size: int = 64

    def __post_init__(self):
        if self.backbone not in BACKBONES:
            raise ParameterError(f"unknown backbone '{self.backbone}', choose from {BACKBONES}")
        for name in ("layers", "width", "latent_dim", "ffnp_freq_count", "ffng_encode_size"):
            if int(getattr(self, name)) < 1:
                raise ParameterError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.ffnp_freq_constant <= 0 or self.ffng_sigma <= 0:
            raise ParameterError("encoding scales must be positive")

    @property
    def input_dim(self) -> int:
        """Width of the encoded input fed to the stem."""
        if self.backbone == "ffnp":
            return 3 + 6 * self.ffnp_freq_count
        if self.backbone == "ffng":
            return 2 * self.ffng_encode_size
        return 3

    @property
    def positional_frequencies(self) -> np.ndarray:
        """Ladder 2 pi k c / K, k = 1..K, used by the ffnp encoding."""
        K = self.ffnp_freq_count
        return 2.0 * np.pi * np.arange(1, K + 1) * self.ffnp_freq_constant / K


class INRLayout:
    """
    Index map from parameter names to segments of the flat weight vector.
    """

    def __init__(self, config: INRConfig):
        self.config = config
        shapes: List[Tuple[str, Tuple[int, ...]]] = []
        fan_in = config.input_dim
        for layer in range(config.layers):
            shapes.append((f"W{layer}", (config.width, fan_in)))
            shapes.append((f"b{layer}", (config.width,)))
            fan_in = config.width
        shapes.append(("W_out", (config.latent_dim, config.width)))
        shapes.append(("b_out", (config.latent_dim,)))

        self.segments: Dict[str, Tuple[slice, Tuple[int, ...]]] = OrderedDict()
        offset = 0
        for name, shape in shapes:
            size = int(np.prod(shape))
            self.segments[name] = (slice(offset, offset + size), shape)
            offset += size
        self.size = offset

    def view(self, flat: np.ndarray, name: str) -> np.ndarray:
        """Reshaped view of one parameter inside a flat vector."""
        sl, shape = self.segments[name]
        return flat[sl].reshape(shape)


@dataclass
class INRWeights:
    """
    Flat trainable weights plus the frozen encoding matrix (ffng only).

    Attributes:
        flat: Trainable parameters in index-map order
        encoding: Frozen (m, 3) Gaussian encoding matrix, or None
    """

    flat: np.ndarray
    encoding: Optional[np.ndarray] = None

    def copy(self) -> 'INRWeights':
        return INRWeights(self.flat.copy(), None if self.encoding is None else self.encoding.copy())


class INR:
    """
    A latent-field network of a fixed architecture.

    Attributes:
        config: Architecture
        layout: Flat-vector index map
    """

    def __init__(self, config: INRConfig):
        self.config = config
        self.layout = INRLayout(config)

    @property
    def n_params(self) -> int:
        return self.layout.size

    def init(self, alpha: float, seed: int) -> INRWeights:
        """
        Draw trainable weights from N(0, alpha); the ffng encoding from N(0, sigma^2).

        Args:
            alpha: Prior variance of the weights
            seed: Random seed

        Returns:
            Fresh weights
        """
        if not np.isfinite(alpha) or alpha < 0:
            raise ParameterError(f"alpha must be non-negative, got {alpha}")
        weight_seq, encoding_seq = np.random.SeedSequence(seed).spawn(2)
        flat = np.random.default_rng(weight_seq).normal(0.0, np.sqrt(alpha), self.n_params)
        encoding = None
        if self.config.backbone == "ffng":
            encoding = np.random.default_rng(encoding_seq).normal(
                0.0, self.config.ffng_sigma, (self.config.ffng_encode_size, 3))
        return INRWeights(flat, encoding)

    def encode(self, X: np.ndarray, weights: INRWeights) -> np.ndarray:
        """Input encoding of (n, 3) coordinates."""
        backbone = self.config.backbone
        if backbone == "ffnp":
            arg = X[:, :, None] * self.config.positional_frequencies[None, None, :]
            n = X.shape[0]
            return np.hstack([X, np.sin(arg).reshape(n, -1), np.cos(arg).reshape(n, -1)])
        if backbone == "ffng":
            if weights.encoding is None:
                raise ParameterError("ffng weights need an encoding matrix")
            proj = 2.0 * np.pi * X @ weights.encoding.T
            return np.hstack([np.sin(proj), np.cos(proj)])
        return X

    def forward(self, weights: INRWeights, batch, return_cache: bool = False):
        """
        Evaluate the latent field.

        Args:
            weights: Network weights
            batch: Coordinates or STPoints
            return_cache: Also return intermediates for :meth:`backward`

        Returns:
            (n, p) latent matrix, or (latent, cache) when return_cache is set
        """
        X = as_coords(batch)
        self._check_weights(weights)
        lay = self.layout
        flat = weights.flat
        e = self.encode(X, weights)

        pre: List[np.ndarray] = []
        hidden: List[np.ndarray] = []
        h = e
        for layer in range(self.config.layers):
            a = h @ lay.view(flat, f"W{layer}").T + lay.view(flat, f"b{layer}")
            g = gelu(a)
            if self.config.backbone == "resmlp" and layer > 0:
                g = h + g
            if not np.all(np.isfinite(g)):
                raise NumericalError("non-finite activations in latent network",
                                     where=f"layer {layer}")
            pre.append(a)
            hidden.append(g)
            h = g
        out = h @ lay.view(flat, "W_out").T + lay.view(flat, "b_out")
        if not np.all(np.isfinite(out)):
            raise NumericalError("non-finite latent output", where="output layer")
        if return_cache:
            return out, {"X": X, "e": e, "pre": pre, "hidden": hidden}
        return out

    def backward(self, weights: INRWeights, cache: dict, upstream: np.ndarray,
                 return_input_grad: bool = False):
        """
        Reverse-mode gradient of sum(upstream * forward(batch)).

        Args:
            weights: Network weights
            cache: Intermediates from ``forward(..., return_cache=True)``
            upstream: (n, p) gradient with respect to the latent output
            return_input_grad: Also return the (n, 3) gradient w.r.t. coordinates

        Returns:
            Flat gradient aligned with ``weights.flat`` (and the input gradient)
        """
        lay = self.layout
        flat = weights.flat
        hidden = cache["hidden"]
        pre = cache["pre"]
        U = np.asarray(upstream, dtype=float)
        expected = (hidden[-1].shape[0], self.config.latent_dim)
        if U.shape != expected:
            raise ShapeError(f"upstream must have shape {expected}, got {U.shape}")

        grad = np.zeros_like(flat)
        lay.view(grad, "W_out")[...] = U.T @ hidden[-1]
        lay.view(grad, "b_out")[...] = U.sum(axis=0)
        gh = U @ lay.view(flat, "W_out")

        for layer in range(self.config.layers - 1, -1, -1):
            below = hidden[layer - 1] if layer > 0 else cache["e"]
            ga = gh * gelu_grad(pre[layer])
            lay.view(grad, f"W{layer}")[...] = ga.T @ below
            lay.view(grad, f"b{layer}")[...] = ga.sum(axis=0)
            g_below = ga @ lay.view(flat, f"W{layer}")
            if self.config.backbone == "resmlp" and layer > 0:
                g_below = g_below + gh
            gh = g_below

        if not return_input_grad:
            return grad
        return grad, self._encoding_backward(cache["X"], weights, gh)

    def _encoding_backward(self, X: np.ndarray, weights: INRWeights, ge: np.ndarray) -> np.ndarray:
        backbone = self.config.backbone
        if backbone == "ffnp":
            freqs = self.config.positional_frequencies
            n, K = X.shape[0], freqs.size
            arg = X[:, :, None] * freqs[None, None, :]
            g_sin = ge[:, 3:3 + 3 * K].reshape(n, 3, K)
            g_cos = ge[:, 3 + 3 * K:].reshape(n, 3, K)
            return ge[:, :3] + np.sum((g_sin * np.cos(arg) - g_cos * np.sin(arg)) * freqs, axis=2)
        if backbone == "ffng":
            B = 2.0 * np.pi * weights.encoding
            proj = X @ B.T
            m = B.shape[0]
            g_proj = ge[:, :m] * np.cos(proj) - ge[:, m:] * np.sin(proj)
            return g_proj @ B
        return ge

    def _check_weights(self, weights: INRWeights):
        if weights.flat.shape != (self.n_params,):
            raise ShapeError(f"expected {self.n_params} weights, got {weights.flat.shape}")

    def save(self, weights: INRWeights) -> bytes:
        """Serialize weights to a versioned little-endian blob."""
        self._check_weights(weights)
        encoding = np.zeros(0) if weights.encoding is None else weights.encoding
        return (pack_header(INR_MAGIC, config_hash(self.config))
                + pack_array(weights.flat) + pack_array(encoding))

    def load(self, blob: bytes, offset: int = 0) -> Tuple[INRWeights, int]:
        """
        Deserialize weights written by :meth:`save`.

        Returns:
            (weights, offset just past the blob)
        """
        digest, offset = unpack_header(blob, INR_MAGIC, offset)
        if digest != config_hash(self.config):
            raise DataError("weight blob was written for a different INR configuration")
        flat, offset = unpack_array(blob, offset)
        encoding, offset = unpack_array(blob, offset)
        encoding = encoding.reshape(-1, 3) if encoding.size else None
        weights = INRWeights(flat, encoding)
        self._check_weights(weights)
        return weights, offset

    def describe(self) -> dict:
        """Architecture summary for logs and reports."""
        return {**asdict(self.config), "n_params": self.n_params}


def init_inr(config: INRConfig, alpha: float, seed: int) -> INRWeights:
    """
    Initialize latent-network weights.

    Args:
        config: Architecture
        alpha: Prior weight variance
        seed: Random seed

    Returns:
        INRWeights
    """
    return INR(config).init(alpha, seed)


def latent_forward(weights: INRWeights, config: INRConfig, batch) -> np.ndarray:
    """
    Evaluate the latent field at a batch of coordinates.

    Returns:
        (n, p) latent matrix
    """
    return INR(config).forward(weights, batch)


def latent_backward(weights: INRWeights, config: INRConfig, batch, upstream: np.ndarray,
                    return_input_grad: bool = False):
    """
    Gradient of sum(upstream * latent_forward(weights, config, batch)).

    Returns:
        Flat weight gradient (and the coordinate gradient when requested)
    """
    net = INR(config)
    _, cache = net.forward(weights, batch, return_cache=True)
    return net.backward(weights, cache, upstream, return_input_grad)
