"""Reverse-mode automatic differentiation over numpy arrays.

Every operation returns a new Tensor remembering its parents and a closure
mapping the output gradient to one gradient per parent. ``backward`` walks
the graph in reverse topological order and accumulates into ``grad`` of
every tensor that requires it.
"""

from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import AutodiffError, ShapeMismatchError

ArrayLike = Union[np.ndarray, float, int]
BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back to ``shape``"""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """N-dimensional array node of a differentiable computation"""

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        parents: Tuple["Tensor", ...] = (),
        backward: Optional[BackwardFn] = None,
        op: str = "",
        dtype=None,
    ):
        array = np.asarray(data, dtype=dtype)
        if not np.issubdtype(array.dtype, np.floating):
            array = array.astype(np.float32)
        self.data = array
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents if self.requires_grad else ()
        self._backward = backward if self.requires_grad else None
        self.op = op
        self.name = ""

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, op={self.op or 'leaf'})"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return not self._parents

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self, grad: Optional[np.ndarray] = None) -> None:
        """
        Accumulate d(self)/d(node) into every node that requires a gradient.

        Raises:
            AutodiffError: on a tensor with no recorded graph, or a non-scalar
                output without an explicit seed gradient
        """
        if not self.requires_grad:
            raise AutodiffError("backward called on a tensor that does not require grad")
        if grad is None:
            if self.size != 1:
                raise AutodiffError("backward needs a seed gradient for non-scalar outputs", shape=self.shape)
            grad = np.ones_like(self.data)

        order = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))

        grads = {id(self): np.asarray(grad, dtype=self.dtype)}
        for node in reversed(order):
            node_grad = grads.pop(id(node), None)
            if node_grad is None:
                continue
            if node.is_leaf:
                node.grad = node_grad if node.grad is None else node.grad + node_grad
                continue
            for parent, parent_grad in zip(node._parents, node._backward(node_grad)):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = parent_grad if key not in grads else grads[key] + parent_grad

    # arithmetic

    def __add__(self, other: Union["Tensor", ArrayLike]) -> "Tensor":
        other = as_tensor(other, self.dtype)
        return Tensor(
            self.data + other.data,
            parents=(self, other),
            backward=lambda g: (_unbroadcast(g, self.shape), _unbroadcast(g, other.shape)),
            op="add",
        )

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        return Tensor(-self.data, parents=(self,), backward=lambda g: (-g,), op="neg")

    def __sub__(self, other: Union["Tensor", ArrayLike]) -> "Tensor":
        return self + (-as_tensor(other, self.dtype))

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return as_tensor(other, self.dtype) - self

    def __mul__(self, other: Union["Tensor", ArrayLike]) -> "Tensor":
        other = as_tensor(other, self.dtype)
        return Tensor(
            self.data * other.data,
            parents=(self, other),
            backward=lambda g: (_unbroadcast(g * other.data, self.shape), _unbroadcast(g * self.data, other.shape)),
            op="mul",
        )

    __rmul__ = __mul__

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        if isinstance(other, Tensor):
            raise AutodiffError("Division by a tensor is not supported")
        return self * (1.0 / other)

    def __pow__(self, exponent: float) -> "Tensor":
        return Tensor(
            self.data**exponent,
            parents=(self,),
            backward=lambda g: (g * exponent * self.data ** (exponent - 1),),
            op="pow",
        )

    def __matmul__(self, other: "Tensor") -> "Tensor":
        other = as_tensor(other, self.dtype)
        if self.ndim != 2 or other.ndim != 2 or self.shape[1] != other.shape[0]:
            raise ShapeMismatchError("matmul needs (n, k) @ (k, m)", left=self.shape, right=other.shape)
        return Tensor(
            self.data @ other.data,
            parents=(self, other),
            backward=lambda g: (g @ other.data.T, self.data.T @ g),
            op="matmul",
        )

    def abs(self) -> "Tensor":
        return Tensor(np.abs(self.data), parents=(self,), backward=lambda g: (g * np.sign(self.data),), op="abs")

    def sum(self) -> "Tensor":
        return Tensor(
            self.data.sum(),
            parents=(self,),
            backward=lambda g: (np.broadcast_to(g, self.shape).copy(),),
            op="sum",
        )

    def mean(self) -> "Tensor":
        n = self.size
        return Tensor(
            self.data.mean(),
            parents=(self,),
            backward=lambda g: (np.full(self.shape, g / n, dtype=self.dtype),),
            op="mean",
        )

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        original = self.shape
        try:
            data = self.data.reshape(shape)
        except ValueError as e:
            raise ShapeMismatchError(f"Cannot reshape: {e}", shape=original, target=shape) from e
        return Tensor(data, parents=(self,), backward=lambda g: (g.reshape(original),), op="reshape")


def as_tensor(value: Union[Tensor, ArrayLike], dtype=None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=dtype))
