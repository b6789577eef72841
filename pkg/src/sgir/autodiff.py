"""Reverse-mode automatic differentiation over dense float64 matrices.

Every value is a 2-D Tensor (scalars are 1x1, row vectors 1xm). Ops build a
computation graph; ``backward`` walks it once in reverse topological order and
accumulates gradients into ``.grad``. Backward closures capture the forward
numpy arrays, not the Tensor objects, so optimizer updates that rebind
``.data`` never corrupt a graph built earlier.

Every op validates shapes up front and checks its output for NaN/inf, raising
NumericsError at the first non-finite value rather than letting it propagate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericsError, ShapeError

BCE_EPS = 1e-7
LOG_SIGMA_CLAMP = 10.0


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(1, -1)
        elif arr.ndim != 2:
            raise ShapeError(f"tensors are 2-D, got {arr.ndim}-D")
        self.data = np.ascontiguousarray(arr)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def detach(self) -> Tensor:
        return Tensor(self.data.copy())

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() on tensor of shape {self.shape}")
        return float(self.data[0, 0])

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{tag})"

    # operator sugar over the module-level ops
    def __add__(self, other):
        return add_scalar(self, other) if isinstance(other, (int, float)) else add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return scale(self, other) if isinstance(other, (int, float)) else mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return scale(self, -1.0)

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            return add_scalar(self, -other)
        return sub(self, other)

    def __rsub__(self, other):
        return add_scalar(scale(self, -1.0), other)

    def __matmul__(self, other):
        return matmul(self, other)


def _result(data: np.ndarray, parents: tuple[Tensor, ...], opname: str) -> Tensor:
    if not np.all(np.isfinite(data)):
        raise NumericsError(f"{opname} produced non-finite values")
    out = Tensor(data)
    out.requires_grad = any(p.requires_grad for p in parents)
    if out.requires_grad:
        out._parents = parents
    return out


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: {a.shape} @ {b.shape}")
    ad, bd = a.data, b.data
    out = _result(ad @ bd, (a, b), "matmul")
    if out.requires_grad:
        def back(g):
            _accumulate(a, g @ bd.T)
            _accumulate(b, ad.T @ g)
        out._backward = back
    return out


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum; either side may be a 1-row vector broadcast over rows."""
    if a.shape != b.shape:
        if b.shape == (1, a.shape[1]):
            pass
        elif a.shape == (1, b.shape[1]):
            a, b = b, a
        else:
            raise ShapeError(f"add: {a.shape} + {b.shape}")
    out = _result(a.data + b.data, (a, b), "add")
    if out.requires_grad:
        broadcast = b.shape != out.shape

        def back(g):
            _accumulate(a, g)
            _accumulate(b, g.sum(axis=0, keepdims=True) if broadcast else g)
        out._backward = back
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"sub: {a.shape} - {b.shape}")
    out = _result(a.data - b.data, (a, b), "sub")
    if out.requires_grad:
        def back(g):
            _accumulate(a, g)
            _accumulate(b, -g)
        out._backward = back
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"mul: {a.shape} * {b.shape}")
    ad, bd = a.data, b.data
    out = _result(ad * bd, (a, b), "mul")
    if out.requires_grad:
        def back(g):
            _accumulate(a, g * bd)
            _accumulate(b, g * ad)
        out._backward = back
    return out


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)
    out = _result(a.data * c, (a,), "scale")
    if out.requires_grad:
        out._backward = lambda g: _accumulate(a, g * c)
    return out


def add_scalar(a: Tensor, c: float) -> Tensor:
    c = float(c)
    out = _result(a.data + c, (a,), "add_scalar")
    if out.requires_grad:
        out._backward = lambda g: _accumulate(a, g)
    return out


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0.0
    out = _result(np.where(mask, a.data, 0.0), (a,), "relu")
    if out.requires_grad:
        out._backward = lambda g: _accumulate(a, g * mask)
    return out


def sigmoid(a: Tensor) -> Tensor:
    # evaluated piecewise to stay finite for large |x|
    x = a.data
    s = np.empty_like(x)
    pos = x >= 0
    s[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    s[~pos] = ex / (1.0 + ex)
    out = _result(s, (a,), "sigmoid")
    if out.requires_grad:
        out._backward = lambda g: _accumulate(a, g * s * (1.0 - s))
    return out


def exp(a: Tensor) -> Tensor:
    e = np.exp(a.data)
    out = _result(e, (a,), "exp")
    if out.requires_grad:
        out._backward = lambda g: _accumulate(a, g * e)
    return out


def log(a: Tensor) -> Tensor:
    if np.any(a.data <= 0.0):
        raise NumericsError("log of a non-positive value")
    out = _result(np.log(a.data), (a,), "log")
    if out.requires_grad:
        ad = a.data
        out._backward = lambda g: _accumulate(a, g / ad)
    return out


def clamp(a: Tensor, lo: float, hi: float) -> Tensor:
    """Clip to [lo, hi]; gradient flows only where the input is strictly inside."""
    if not lo < hi:
        raise ShapeError(f"clamp: empty interval [{lo}, {hi}]")
    inside = (a.data > lo) & (a.data < hi)
    out = _result(np.clip(a.data, lo, hi), (a,), "clamp")
    if out.requires_grad:
        out._backward = lambda g: _accumulate(a, g * inside)
    return out


def transpose(a: Tensor) -> Tensor:
    out = _result(a.data.T.copy(), (a,), "transpose")
    if out.requires_grad:
        out._backward = lambda g: _accumulate(a, g.T)
    return out


def sum_rows(a: Tensor) -> Tensor:
    """Column-wise sum of all rows: (n, m) -> (1, m). The pooling primitive."""
    out = _result(a.data.sum(axis=0, keepdims=True), (a,), "sum_rows")
    if out.requires_grad:
        n = a.shape[0]
        out._backward = lambda g: _accumulate(a, np.repeat(g, n, axis=0))
    return out


def sum_all(a: Tensor) -> Tensor:
    out = _result(np.array([[a.data.sum()]]), (a,), "sum_all")
    if out.requires_grad:
        shape = a.shape
        out._backward = lambda g: _accumulate(a, np.full(shape, g[0, 0]))
    return out


def mean_all(a: Tensor) -> Tensor:
    out = _result(np.array([[a.data.mean()]]), (a,), "mean_all")
    if out.requires_grad:
        shape = a.shape
        inv = 1.0 / a.data.size
        out._backward = lambda g: _accumulate(a, np.full(shape, g[0, 0] * inv))
    return out


def backward(loss: Tensor) -> None:
    """Accumulate d loss / d leaf into every reachable requires_grad Tensor.
    Repeated calls keep accumulating; use zero_grad between steps."""
    if loss.shape != (1, 1):
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        return
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen or not node.requires_grad:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            stack.append((p, False))
    loss.grad = np.ones_like(loss.data) if loss.grad is None else loss.grad + 1.0
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)


def zero_grad(params: list[Tensor]) -> None:
    for p in params:
        p.grad = None


# ---------------------------------------------------------------------------
# losses (composites of the primitives above, so gradients come for free)

def mse_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Mean squared error over all entries."""
    if pred.shape != target.shape:
        raise ShapeError(f"mse_loss: {pred.shape} vs {target.shape}")
    d = sub(pred, target)
    return mean_all(mul(d, d))


def weighted_bce_loss(pred_probs: Tensor, target: Tensor, pos_weight: float = 1.0,
                      norm: float = 1.0, mask: np.ndarray | None = None) -> Tensor:
    """Binary cross-entropy with positive-class weighting.

    Probabilities are clamped to [BCE_EPS, 1 - BCE_EPS] before the logs. The
    result is norm * mean over entries (over the mask's support when a binary
    mask is given; the mask is a constant, never differentiated through).
    """
    if pred_probs.shape != target.shape:
        raise ShapeError(f"weighted_bce_loss: {pred_probs.shape} vs {target.shape}")
    y = target.data
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ShapeError("weighted_bce_loss: target must be exactly binary")
    if np.any(pred_probs.data < 0.0) or np.any(pred_probs.data > 1.0):
        raise NumericsError("weighted_bce_loss: predictions outside [0, 1]")
    p = clamp(pred_probs, BCE_EPS, 1.0 - BCE_EPS)
    pos = scale(mul(target, log(p)), float(pos_weight))
    neg = mul(add_scalar(scale(target, -1.0), 1.0),
              log(add_scalar(scale(p, -1.0), 1.0)))
    per_entry = add(pos, neg)
    if mask is None:
        return scale(mean_all(per_entry), -float(norm))
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape != pred_probs.shape or not np.all((mask == 0.0) | (mask == 1.0)):
        raise ShapeError("weighted_bce_loss: mask must be binary and match shape")
    support = mask.sum()
    if support == 0.0:
        raise ShapeError("weighted_bce_loss: empty mask")
    masked = mul(per_entry, Tensor(mask))
    return scale(sum_all(masked), -float(norm) / support)


def weighted_bce_with_logits(logits: Tensor, target: Tensor,
                             pos_weight: float = 1.0, norm: float = 1.0,
                             mask: np.ndarray | None = None) -> Tensor:
    """weighted_bce_loss parameterized by logits instead of probabilities.

    Same value as weighted_bce_loss(sigmoid(logits), ...) up to the
    probability clamp, but the gradient is norm * (pos_weight-scaled
    sigmoid(x) - y) per entry, which stays alive however saturated the
    sigmoid is. Training uses this form: with probability-space BCE a
    confidently-wrong prediction at init has zero gradient past the clamp
    and can never be pulled back.
    """
    if logits.shape != target.shape:
        raise ShapeError(f"weighted_bce_with_logits: {logits.shape} vs "
                         f"{target.shape}")
    y = target.data
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ShapeError("weighted_bce_with_logits: target must be exactly binary")
    if mask is None:
        m = np.ones(logits.shape)
    else:
        m = np.asarray(mask, dtype=np.float64)
        if m.shape != logits.shape or not np.all((m == 0.0) | (m == 1.0)):
            raise ShapeError("weighted_bce_with_logits: mask must be binary "
                             "and match shape")
    support = m.sum()
    if support == 0.0:
        raise ShapeError("weighted_bce_with_logits: empty mask")
    x = logits.data
    pw = float(pos_weight)
    # softplus(x) = max(x, 0) + log1p(e^-|x|), so the per-entry loss
    # pw*y*softplus(-x) + (1-y)*softplus(x) never overflows.
    sp_pos = np.maximum(-x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    sp_neg = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    per_entry = (pw * y * sp_pos + (1.0 - y) * sp_neg) * m
    coeff = float(norm) / support
    out = _result(np.full((1, 1), per_entry.sum() * coeff),
                  (logits,), "weighted_bce_with_logits")
    if out.requires_grad:
        # piecewise-stable sigmoid: never exponentiates a positive number
        sig = np.where(x >= 0.0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                       np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
        def back(g):
            grad = (pw * y * (sig - 1.0) + (1.0 - y) * sig) * m * coeff
            _accumulate(logits, g[0, 0] * grad)
        out._backward = back
    return out


def kl_gaussian(mu: Tensor, log_sigma: Tensor) -> Tensor:
    """KL(q || N(0, I)) summed over latent dims, averaged over rows. The
    log-sigma input is clamped to +-LOG_SIGMA_CLAMP first."""
    if mu.shape != log_sigma.shape:
        raise ShapeError(f"kl_gaussian: {mu.shape} vs {log_sigma.shape}")
    ls = clamp(log_sigma, -LOG_SIGMA_CLAMP, LOG_SIGMA_CLAMP)
    inner = add_scalar(add(add(mul(mu, mu), exp(scale(ls, 2.0))),
                           scale(ls, -2.0)), -1.0)
    return scale(sum_all(inner), 0.5 / mu.shape[0])


# ---------------------------------------------------------------------------
# optimization

@dataclass
class OptimizerState:
    """AdamW state for one fixed parameter list (matched by position)."""
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def init_optimizer(params: list[Tensor], lr: float = 1e-3, beta1: float = 0.9,
                   beta2: float = 0.999, eps: float = 1e-8,
                   weight_decay: float = 0.01) -> OptimizerState:
    state = OptimizerState(lr, beta1, beta2, eps, weight_decay)
    state.m = [np.zeros_like(p.data) for p in params]
    state.v = [np.zeros_like(p.data) for p in params]
    return state


def adamw_step(state: OptimizerState, params: list[Tensor]) -> None:
    """One AdamW update with decoupled weight decay (decay applied to the
    parameter directly, not through the moments)."""
    if len(params) != len(state.m):
        raise ShapeError(f"optimizer holds {len(state.m)} slots, got "
                         f"{len(params)} params")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1 ** state.t
    bias2 = 1.0 - b2 ** state.t
    for i, p in enumerate(params):
        if p.grad is None:
            raise NumericsError(f"adamw_step: parameter "
                                f"{p.name or i} has no gradient")
        g = p.grad
        if not np.all(np.isfinite(g)):
            raise NumericsError(f"adamw_step: non-finite gradient on "
                                f"{p.name or i}")
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g
        m_hat = state.m[i] / bias1
        v_hat = state.v[i] / bias2
        p.data = (p.data * (1.0 - state.lr * state.weight_decay)
                  - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))


@dataclass
class LrSchedule:
    """Exponential decay: after step k the rate is base_lr * gamma**k."""
    base_lr: float
    gamma: float
    epoch: int = 0

    @property
    def lr(self) -> float:
        return self.base_lr * self.gamma ** self.epoch


def lr_step(schedule: LrSchedule, opts: list[OptimizerState]) -> None:
    schedule.epoch += 1
    for opt in opts:
        opt.lr = schedule.lr
