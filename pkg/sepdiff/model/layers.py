from collections import OrderedDict
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from . import kernels as K


class Parameter:
    """A named array with a lazily allocated gradient."""

    def __init__(self, data: np.ndarray, trainable: bool = True):
        self.data = data
        self.grad: Optional[np.ndarray] = None
        self.trainable = trainable

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self) -> int:
        return int(np.prod(self.data.shape))

    def accumulate(self, grad: np.ndarray):
        if not self.trainable:
            return
        if self.grad is None:
            self.grad = np.array(grad, dtype=self.data.dtype, copy=True)
        else:
            self.grad += grad

    def zero_grad(self):
        self.grad = None

    def grad_or_zeros(self) -> np.ndarray:
        return self.grad if self.grad is not None else np.zeros_like(self.data)


class ParamFactory:
    """
    Creates initialized parameter arrays.

    With shape_only=True the arrays are zero-stride views, so a network of any size can
    be built just to count its parameters.
    """

    def __init__(self, rng: Optional[np.random.Generator], dtype=np.float32, shape_only: bool = False):
        self.rng = rng
        self.dtype = dtype
        self.shape_only = shape_only

    def _placeholder(self, shape) -> np.ndarray:
        return np.broadcast_to(np.zeros((), dtype=self.dtype), shape)

    def uniform(self, shape, fan_in: int) -> Parameter:
        if self.shape_only:
            return Parameter(self._placeholder(shape))
        bound = 1.0 / np.sqrt(fan_in)
        return Parameter(self.rng.uniform(-bound, bound, size=shape).astype(self.dtype))

    def normal(self, shape, std: float, trainable: bool = True) -> Parameter:
        if self.shape_only:
            return Parameter(self._placeholder(shape), trainable)
        return Parameter((self.rng.standard_normal(shape) * std).astype(self.dtype), trainable)

    def constant(self, shape, value: float) -> Parameter:
        if self.shape_only:
            return Parameter(self._placeholder(shape))
        return Parameter(np.full(shape, value, dtype=self.dtype))


class Module:
    """
    Base for network pieces.

    `forward` returns (output, cache) and `backward(d_output, cache)` accumulates parameter
    gradients and returns the input gradient. Calling a module runs inference only.
    """

    def __init__(self):
        object.__setattr__(self, "_params", OrderedDict())
        object.__setattr__(self, "_children", OrderedDict())

    def __setattr__(self, name, value):
        if isinstance(value, Parameter):
            self._params[name] = value
        elif isinstance(value, Module):
            self._children[name] = value
        object.__setattr__(self, name, value)

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Parameter]]:
        for name, param in self._params.items():
            yield prefix + name, param
        for name, child in self._children.items():
            yield from child.named_parameters(f"{prefix}{name}.")

    def parameters(self) -> List[Parameter]:
        return [p for _, p in self.named_parameters()]

    def parameter_count(self, trainable_only: bool = False) -> int:
        return sum(p.size for p in self.parameters() if p.trainable or not trainable_only)

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def astype(self, dtype) -> "Module":
        for p in self.parameters():
            p.data = np.asarray(p.data, dtype=dtype)
            p.grad = None
        return self

    def state_dict(self) -> Dict[str, np.ndarray]:
        return OrderedDict((name, p.data) for name, p in self.named_parameters())

    def forward(self, *args):
        raise NotImplementedError

    def backward(self, dy, cache):
        raise NotImplementedError

    def __call__(self, *args):
        return self.forward(*args)[0]


class ModuleList(Module):
    def __init__(self, modules=()):
        super().__init__()
        self._items: List[Module] = []
        for m in modules:
            self.append(m)

    def append(self, module: Module):
        setattr(self, str(len(self._items)), module)
        self._items.append(module)

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def __getitem__(self, index) -> Module:
        return self._items[index]


class Conv1d(Module):
    def __init__(self, init: ParamFactory, in_channels: int, out_channels: int, kernel: int = 3, stride: int = 1):
        super().__init__()
        self.stride = stride
        fan_in = in_channels * kernel
        self.weight = init.uniform((out_channels, in_channels, kernel), fan_in)
        self.bias = init.uniform((out_channels,), fan_in)

    def forward(self, x):
        return K.conv1d_forward(x, self.weight.data, self.bias.data, self.stride)

    def backward(self, dy, cache):
        dx, dw, db = K.conv1d_backward(dy, cache)
        self.weight.accumulate(dw)
        self.bias.accumulate(db)
        return dx


class ConvTranspose1d(Module):
    """Upsampling by `factor` with kernel 2*factor."""

    def __init__(self, init: ParamFactory, in_channels: int, out_channels: int, factor: int):
        super().__init__()
        self.factor = factor
        fan_in = in_channels * 2
        self.weight = init.uniform((in_channels, out_channels, 2 * factor), fan_in)
        self.bias = init.uniform((out_channels,), fan_in)

    def forward(self, x):
        return K.conv_transpose1d_forward(x, self.weight.data, self.bias.data, self.factor)

    def backward(self, dy, cache):
        dx, dw, db = K.conv_transpose1d_backward(dy, cache)
        self.weight.accumulate(dw)
        self.bias.accumulate(db)
        return dx


class GroupNorm(Module):
    def __init__(self, init: ParamFactory, channels: int):
        super().__init__()
        self.groups = K.group_count(channels)
        self.weight = init.constant((channels,), 1.0)
        self.bias = init.constant((channels,), 0.0)

    def forward(self, x):
        return K.groupnorm_forward(x, self.weight.data, self.bias.data, self.groups)

    def backward(self, dy, cache):
        dx, dgamma, dbeta = K.groupnorm_backward(dy, cache)
        self.weight.accumulate(dgamma)
        self.bias.accumulate(dbeta)
        return dx


class LayerNorm(Module):
    def __init__(self, init: ParamFactory, channels: int):
        super().__init__()
        self.weight = init.constant((channels,), 1.0)
        self.bias = init.constant((channels,), 0.0)

    def forward(self, x):
        return K.layernorm_forward(x, self.weight.data, self.bias.data)

    def backward(self, dy, cache):
        dx, dgamma, dbeta = K.layernorm_backward(dy, cache)
        self.weight.accumulate(dgamma)
        self.bias.accumulate(dbeta)
        return dx


class Linear(Module):
    def __init__(self, init: ParamFactory, in_features: int, out_features: int):
        super().__init__()
        self.weight = init.uniform((out_features, in_features), in_features)
        self.bias = init.uniform((out_features,), in_features)

    def forward(self, x):
        return K.linear_forward(x, self.weight.data, self.bias.data)

    def backward(self, dy, cache):
        dx, dw, db = K.linear_backward(dy, cache)
        self.weight.accumulate(dw)
        self.bias.accumulate(db)
        return dx


class PReLU(Module):
    def __init__(self, init: ParamFactory):
        super().__init__()
        self.slope = init.constant((1,), 0.25)

    def forward(self, x):
        return K.prelu_forward(x, self.slope.data)

    def backward(self, dy, cache):
        dx, dslope = K.prelu_backward(dy, cache)
        self.slope.accumulate(dslope)
        return dx


_ACTIVATIONS = {
    "silu": (K.silu_forward, K.silu_backward),
    "gelu": (K.gelu_forward, K.gelu_backward),
    "relu": (K.relu_forward, K.relu_backward),
}


class Activation(Module):
    def __init__(self, kind: str):
        super().__init__()
        self.kind = kind
        self._fwd, self._bwd = _ACTIVATIONS[kind]

    def forward(self, x):
        return self._fwd(x)

    def backward(self, dy, cache):
        return self._bwd(dy, cache)


class Sequential(ModuleList):
    def forward(self, x):
        caches = []
        for module in self:
            x, cache = module.forward(x)
            caches.append(cache)
        return x, caches

    def backward(self, dy, cache):
        for module, c in zip(reversed(self._items), reversed(cache)):
            dy = module.backward(dy, c)
        return dy


class FiLM(Module):
    """Per-channel scale and shift from a step embedding; starts as the identity."""

    def __init__(self, init: ParamFactory, embed_channels: int, channels: int):
        super().__init__()
        self.channels = channels
        self.weight = init.constant((2 * channels, embed_channels), 0.0)
        bias = init.constant((2 * channels,), 0.0)
        if not init.shape_only:
            bias.data[:channels] = 1.0
        self.bias = bias

    def forward(self, x, emb):
        params, lin_cache = K.linear_forward(emb, self.weight.data, self.bias.data)
        scale, shift = params[:, :self.channels], params[:, self.channels:]
        y, film_cache = K.film_forward(x, scale, shift)
        return y, (lin_cache, film_cache)

    def backward(self, dy, cache):
        """Returns (dx, d_emb)."""
        lin_cache, film_cache = cache
        dx, dscale, dshift = K.film_backward(dy, film_cache)
        demb, dw, db = K.linear_backward(np.concatenate([dscale, dshift], axis=1), lin_cache)
        self.weight.accumulate(dw)
        self.bias.accumulate(db)
        return dx, demb

    def __call__(self, x, emb):
        return self.forward(x, emb)[0]


class MultiHeadAttention(Module):
    """Self-attention over tokens (batch, time, channels), optionally with rotary positions."""

    def __init__(self, init: ParamFactory, channels: int, heads: int, rotary: bool = False):
        super().__init__()
        self.heads = heads
        self.rotary = rotary
        self.qkv = Linear(init, channels, 3 * channels)
        self.proj = Linear(init, channels, channels)

    def _split(self, t):
        batch, length, channels = t.shape
        return t.reshape(batch, length, self.heads, channels // self.heads).transpose(0, 2, 1, 3)

    def _merge(self, t):
        batch, heads, length, dim = t.shape
        return t.transpose(0, 2, 1, 3).reshape(batch, length, heads * dim)

    def forward(self, x):
        qkv, qkv_cache = self.qkv.forward(x)
        q, k, v = (self._split(part) for part in np.split(qkv, 3, axis=-1))
        rot_cache = None
        if self.rotary:
            q, rot_cache = K.rotary_forward(q)
            k, _ = K.rotary_forward(k)
        o, attn_cache = K.attention_forward(q, k, v)
        y, proj_cache = self.proj.forward(self._merge(o))
        return y, (qkv_cache, rot_cache, attn_cache, proj_cache)

    def backward(self, dy, cache):
        qkv_cache, rot_cache, attn_cache, proj_cache = cache
        do = self._split(self.proj.backward(dy, proj_cache))
        dq, dk, dv = K.attention_backward(do, attn_cache)
        if self.rotary:
            dq = K.rotary_backward(dq, rot_cache)
            dk = K.rotary_backward(dk, rot_cache)
        dqkv = np.concatenate([self._merge(dq), self._merge(dk), self._merge(dv)], axis=-1)
        return self.qkv.backward(dqkv, qkv_cache)


class AttentionBlock(Module):
    """x + attention(groupnorm(x)) along the time axis of (batch, channels, time)."""

    def __init__(self, init: ParamFactory, channels: int, heads: int):
        super().__init__()
        self.norm = GroupNorm(init, channels)
        self.attention = MultiHeadAttention(init, channels, heads)

    def forward(self, x):
        h, norm_cache = self.norm.forward(x)
        a, attn_cache = self.attention.forward(h.transpose(0, 2, 1))
        return x + a.transpose(0, 2, 1), (norm_cache, attn_cache)

    def backward(self, dy, cache):
        norm_cache, attn_cache = cache
        dh = self.attention.backward(dy.transpose(0, 2, 1), attn_cache).transpose(0, 2, 1)
        return dy + self.norm.backward(np.ascontiguousarray(dh), norm_cache)


class TransformerLayer(Module):
    """Pre-norm rotary transformer layer on tokens (batch, time, channels), feedforward 2x."""

    def __init__(self, init: ParamFactory, channels: int, heads: int):
        super().__init__()
        self.norm1 = LayerNorm(init, channels)
        self.attention = MultiHeadAttention(init, channels, heads, rotary=True)
        self.norm2 = LayerNorm(init, channels)
        self.feedforward = Sequential([Linear(init, channels, 2 * channels), Activation("gelu"),
                                       Linear(init, 2 * channels, channels)])

    def forward(self, x):
        h, n1 = self.norm1.forward(x)
        a, attn = self.attention.forward(h)
        x = x + a
        h, n2 = self.norm2.forward(x)
        f, ff = self.feedforward.forward(h)
        return x + f, (n1, attn, n2, ff)

    def backward(self, dy, cache):
        n1, attn, n2, ff = cache
        dy = dy + self.norm2.backward(self.feedforward.backward(dy, ff), n2)
        return dy + self.norm1.backward(self.attention.backward(dy, attn), n1)


class AvgPool(Module):
    def __init__(self, factor: int):
        super().__init__()
        self.factor = factor

    def forward(self, x):
        if self.factor == 1:
            return x, None
        return K.avgpool_forward(x, self.factor)

    def backward(self, dy, cache):
        if self.factor == 1:
            return dy
        return K.avgpool_backward(dy, cache)
