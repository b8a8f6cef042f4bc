"""Kernel functions for the support vector regressor."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

import numpy as np

KERNEL_KINDS = ("linear", "polynomial", "rbf", "sigmoid")

GammaValue = Union[float, str]  # positive float, or the "scale" sentinel


@dataclass(frozen=True)
class KernelParams:
    kind: str
    gamma: GammaValue = "scale"
    coef0: float = 0.0
    degree: int = 3

    def __post_init__(self) -> None:
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"kernel kind must be one of {KERNEL_KINDS}")
        if isinstance(self.gamma, str):
            if self.gamma != "scale":
                raise ValueError(f"gamma must be positive or 'scale', got {self.gamma!r}")
        elif self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.degree < 1:
            raise ValueError("degree must be >= 1")


def resolve_gamma(params: KernelParams, X: np.ndarray) -> KernelParams:
    """Replace the "scale" sentinel with 1 / (n_features * var(X)).

    On standardized inputs the entry variance is 1, so this is 1/n_features.
    A zero-variance X falls back to variance 1.
    """
    if not isinstance(params.gamma, str):
        return params
    var = float(np.var(X))
    if var <= 0.0:
        var = 1.0
    return replace(params, gamma=1.0 / (X.shape[1] * var))


def kernel_eval(params: KernelParams, x: np.ndarray, y: np.ndarray) -> float:
    """K(x, y) for a single pair; gamma must already be resolved."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(kernel_matrix(params, x[None, :], y[None, :])[0, 0])


def kernel_matrix(params: KernelParams, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise kernel values, shape (len(A), len(B)).

    gamma must be resolved for the kernels that use it; the linear kernel
    ignores it.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    if params.kind == "linear":
        return A @ B.T
    if isinstance(params.gamma, str):
        raise ValueError("gamma sentinel not resolved; call resolve_gamma first")
    gamma = float(params.gamma)
    if params.kind == "polynomial":
        return (gamma * (A @ B.T) + params.coef0) ** params.degree
    if params.kind == "sigmoid":
        return np.tanh(gamma * (A @ B.T) + params.coef0)
    # rbf; explicit differences keep the x == y distance exactly zero
    sq = np.sum((A[:, None, :] - B[None, :, :]) ** 2, axis=2)
    return np.exp(-gamma * sq)
