from typing import Dict, List, Sequence

import numpy as np

from ..errors import ShapeMismatchError
from .tensor import Tensor


class Adam:
    """
    Adam with bias correction: p <- p - lr * m_hat / (sqrt(v_hat) + eps).

    Parameters without a gradient after a backward pass are treated as
    having a zero gradient.
    """

    def __init__(
        self,
        params: Sequence[Tensor],
        lr: float = 5e-5,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params: List[Tensor] = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        self.t += 1
        correction1 = 1.0 - self.beta1**self.t
        correction2 = 1.0 - self.beta2**self.t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / correction1
            v_hat = v / correction2
            p.data -= (self.lr * m_hat / (np.sqrt(v_hat) + self.eps)).astype(p.dtype)

    def hyperparameters(self) -> Dict[str, float]:
        return {"lr": self.lr, "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps, "t": self.t}

    def moments(self) -> Dict[str, np.ndarray]:
        """Moment buffers keyed ``m.<i>`` / ``v.<i>`` in parameter order"""
        state = {}
        for i, (m, v) in enumerate(zip(self.m, self.v)):
            state[f"m.{i}"] = m
            state[f"v.{i}"] = v
        return state

    def load_state(self, hyperparameters: Dict[str, float], moments: Dict[str, np.ndarray]) -> None:
        for i, p in enumerate(self.params):
            m, v = moments[f"m.{i}"], moments[f"v.{i}"]
            if m.shape != p.shape or v.shape != p.shape:
                raise ShapeMismatchError("Optimizer state does not match the parameters", index=i, shape=p.shape)
            self.m[i] = np.array(m, dtype=p.dtype)
            self.v[i] = np.array(v, dtype=p.dtype)
        self.lr = float(hyperparameters.get("lr", self.lr))
        self.beta1 = float(hyperparameters.get("beta1", self.beta1))
        self.beta2 = float(hyperparameters.get("beta2", self.beta2))
        self.eps = float(hyperparameters.get("eps", self.eps))
        self.t = int(hyperparameters.get("t", self.t))
