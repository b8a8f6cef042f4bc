"""Epsilon-insensitive support vector regression with an SMO dual solver.

The dual is solved in the doubled variable space theta = [alpha; alpha_star]
with signs z = [+1...; -1...]:

    minimize  f(theta) = 1/2 theta' Q theta + p' theta
    subject to z' theta = 0,  0 <= theta <= C

where Q = (z z') * K (kernel matrix tiled over both blocks) and
p = [eps - y; eps + y]. Working pairs are chosen by the maximal-violating-
pair rule on the gradient; convergence is declared when the largest KKT
violation m - M drops to tol. Fitting standardizes features and target
first and embeds the scaler in the model, so predictions accept raw inputs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import IO, Sequence

import numpy as np

from .errors import DegenerateDataError, FormatError
from .kernels import KernelParams, kernel_matrix, resolve_gamma
from .ranking import spearman

_TAU = 1e-12  # curvature floor; also sends indefinite-direction steps to the box edge
_SNAP = 1e-12  # relative distance at which dual variables snap to their bounds

MODEL_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SvrParams:
    C: float = 1.0
    epsilon: float = 0.1
    tol: float = 1e-3
    max_passes: int | None = None  # pair-update cap; None means 10 * n * 1000
    kernel: KernelParams = KernelParams("rbf")
    seed: int = 0

    def __post_init__(self) -> None:
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_passes is not None and self.max_passes <= 0:
            raise ValueError("max_passes must be positive")


@dataclass(frozen=True)
class Scaler:
    means: np.ndarray
    scales: np.ndarray  # per-feature population std; zero-variance columns get 1
    target_mean: float
    target_scale: float

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.means.shape[0]:
            raise ValueError(f"expected {self.means.shape[0]} features, got {X.shape[-1]}")
        return (X - self.means) / self.scales

    def transform_target(self, y: np.ndarray) -> np.ndarray:
        return (np.asarray(y, dtype=np.float64) - self.target_mean) / self.target_scale

    def invert_target(self, y_std: np.ndarray | float):
        return y_std * self.target_scale + self.target_mean


def fit_scaler(X: np.ndarray, y: np.ndarray) -> Scaler:
    """Per-column standardization parameters (population std, ddof=0).

    Constant columns keep their exact value as the mean with scale 1, so
    standardizing a constant column yields exact zeros.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a nonempty 2-d matrix")
    means = np.empty(X.shape[1])
    scales = np.empty(X.shape[1])
    for j in range(X.shape[1]):
        col = X[:, j]
        if np.all(col == col[0]):
            means[j], scales[j] = col[0], 1.0
        else:
            means[j], scales[j] = np.mean(col), np.std(col)
    if np.all(y == y[0]):
        t_mean, t_scale = float(y[0]), 1.0
    else:
        t_mean, t_scale = float(np.mean(y)), float(np.std(y))
    return Scaler(means=means, scales=scales, target_mean=t_mean, target_scale=t_scale)


@dataclass
class SmoResult:
    beta: np.ndarray  # alpha - alpha_star per training point
    bias: float
    converged: bool
    n_updates: int
    kkt_violation: float
    objective_trace: list[float] | None = None  # dual objective (maximization form)


def smo_solve(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    epsilon: float,
    tol: float,
    max_updates: int,
    log_objective: bool = False,
) -> SmoResult:
    """Solve the epsilon-SVR dual for a fixed kernel matrix.

    Returns the net dual coefficients beta, the bias (averaged over
    unbounded support vectors, else the KKT midpoint), and the final
    maximal KKT violation.
    """
    n = len(y)
    y = np.asarray(y, dtype=np.float64)
    z = np.concatenate([np.ones(n), -np.ones(n)])
    Q = np.tile(np.asarray(K, dtype=np.float64), (2, 2)) * np.outer(z, z)
    p = np.concatenate([epsilon - y, epsilon + y])
    theta = np.zeros(2 * n)
    G = p.copy()

    trace: list[float] | None = [] if log_objective else None
    snap = _SNAP * C
    n_updates = 0
    converged = False
    violation = np.inf

    while True:
        vals = -z * G
        up = ((z > 0) & (theta < C)) | ((z < 0) & (theta > 0))
        low = ((z < 0) & (theta < C)) | ((z > 0) & (theta > 0))
        up_vals = np.where(up, vals, -np.inf)
        low_vals = np.where(low, vals, np.inf)
        i = int(np.argmax(up_vals))
        j = int(np.argmin(low_vals))
        m, M = up_vals[i], low_vals[j]
        violation = m - M
        if not np.isfinite(violation) or violation <= tol:
            converged = True
            break
        if n_updates >= max_updates:
            break

        eta = K[i % n, i % n] + K[j % n, j % n] - 2.0 * K[i % n, j % n]
        step = (m - M) / max(eta, _TAU)
        room_i = C - theta[i] if z[i] > 0 else theta[i]
        room_j = theta[j] if z[j] > 0 else C - theta[j]
        step = min(step, room_i, room_j)
        if step <= 0.0:  # no feasible progress; numerically stalled
            break

        d_i = z[i] * step
        d_j = -z[j] * step
        theta[i] += d_i
        theta[j] += d_j
        for t in (i, j):
            if theta[t] < snap:
                theta[t] = 0.0
            elif theta[t] > C - snap:
                theta[t] = C
        G += Q[:, i] * d_i + Q[:, j] * d_j
        n_updates += 1
        if trace is not None:
            trace.append(-0.5 * float(theta @ G + theta @ p))

    unbounded = (theta > 0.0) & (theta < C)
    vals = -z * G
    if np.any(unbounded):
        bias = float(np.mean(vals[unbounded]))
    else:
        finite_m = vals[((z > 0) & (theta < C)) | ((z < 0) & (theta > 0))]
        finite_M = vals[((z < 0) & (theta < C)) | ((z > 0) & (theta > 0))]
        hi = float(np.max(finite_m)) if finite_m.size else None
        lo = float(np.min(finite_M)) if finite_M.size else None
        if hi is not None and lo is not None:
            bias = (hi + lo) / 2.0
        else:
            bias = hi if hi is not None else (lo if lo is not None else 0.0)

    beta = theta[:n] - theta[n:]
    return SmoResult(
        beta=beta,
        bias=bias,
        converged=converged,
        n_updates=n_updates,
        kkt_violation=float(violation),
        objective_trace=trace,
    )


@dataclass(frozen=True)
class SvrModel:
    support_vectors: np.ndarray  # standardized training rows with nonzero coefficient
    dual_coefs: np.ndarray  # alpha_i - alpha_star_i, |.| <= C
    bias: float
    params: SvrParams  # kernel gamma is resolved to a number here
    scaler: Scaler
    converged: bool

    def __post_init__(self) -> None:
        C = self.params.C
        n = max(len(self.dual_coefs), 1)
        if len(self.support_vectors) != len(self.dual_coefs):
            raise ValueError("support vector count must match dual coefficient count")
        if np.any(np.abs(self.dual_coefs) > C + 1e-9):
            raise ValueError("dual coefficients exceed the box constraint")
        if abs(float(np.sum(self.dual_coefs))) > 1e-8 * C * n:
            raise ValueError("dual coefficients do not sum to zero")


def svr_fit(X: np.ndarray, y: np.ndarray, params: SvrParams) -> SvrModel:
    """Fit epsilon-SVR on raw features; standardization is internal."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a nonempty n x d matrix")
    if y.shape != (X.shape[0],):
        raise ValueError(f"y must have shape ({X.shape[0]},)")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("inputs must be finite")

    scaler = fit_scaler(X, y)
    Xs = scaler.transform(X)
    ys = scaler.transform_target(y)
    kernel = resolve_gamma(params.kernel, Xs)
    K = kernel_matrix(kernel, Xs, Xs)
    n = X.shape[0]
    max_updates = params.max_passes if params.max_passes is not None else 10 * n * 1000
    result = smo_solve(K, ys, params.C, params.epsilon, params.tol, max_updates)

    mask = result.beta != 0.0
    return SvrModel(
        support_vectors=Xs[mask],
        dual_coefs=result.beta[mask],
        bias=result.bias,
        params=replace(params, kernel=kernel),
        scaler=scaler,
        converged=result.converged,
    )


def svr_predict(model: SvrModel, x: np.ndarray) -> float | np.ndarray:
    """Predict raw-scale targets for one vector (returns float) or a matrix."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    rows = x[None, :] if single else x
    rows_std = model.scaler.transform(rows)
    if len(model.support_vectors):
        k = kernel_matrix(model.params.kernel, rows_std, model.support_vectors)
        y_std = k @ model.dual_coefs + model.bias
    else:
        y_std = np.full(len(rows_std), model.bias)
    y = model.scaler.invert_target(y_std)
    return float(y[0]) if single else y


def _model_to_dict(model: SvrModel) -> dict:
    kernel = model.params.kernel
    return {
        "version": MODEL_SCHEMA_VERSION,
        "kernel": {
            "kind": kernel.kind,
            "gamma": kernel.gamma,
            "coef0": kernel.coef0,
            "degree": kernel.degree,
        },
        "C": model.params.C,
        "epsilon": model.params.epsilon,
        "scaler": {
            "means": model.scaler.means.tolist(),
            "scales": model.scaler.scales.tolist(),
            "target_mean": model.scaler.target_mean,
            "target_scale": model.scaler.target_scale,
        },
        "support_vectors": model.support_vectors.tolist(),
        "dual_coefs": model.dual_coefs.tolist(),
        "bias": model.bias,
        "converged": model.converged,
    }


def save_model(model: SvrModel, fh: IO[str]) -> None:
    """Serialize to JSON; floats use repr so predictions round-trip bit-exactly."""
    json.dump(_model_to_dict(model), fh, indent=2, sort_keys=True)
    fh.write("\n")


def load_model(fh: IO[str]) -> SvrModel:
    try:
        doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"model JSON unreadable: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("model document must be a JSON object")
    version = doc.get("version")
    if version != MODEL_SCHEMA_VERSION:
        raise FormatError(f"unsupported model version {version!r}")
    for key in ("kernel", "C", "epsilon", "scaler", "support_vectors", "dual_coefs", "bias", "converged"):
        if key not in doc:
            raise FormatError(f"model document missing field {key!r}")
    kernel_doc = doc["kernel"]
    scaler_doc = doc["scaler"]
    try:
        kernel = KernelParams(
            kind=kernel_doc["kind"],
            gamma=kernel_doc["gamma"],
            coef0=kernel_doc["coef0"],
            degree=kernel_doc["degree"],
        )
        params = SvrParams(C=doc["C"], epsilon=doc["epsilon"], kernel=kernel)
        scaler = Scaler(
            means=np.asarray(scaler_doc["means"], dtype=np.float64),
            scales=np.asarray(scaler_doc["scales"], dtype=np.float64),
            target_mean=float(scaler_doc["target_mean"]),
            target_scale=float(scaler_doc["target_scale"]),
        )
        return SvrModel(
            support_vectors=np.asarray(doc["support_vectors"], dtype=np.float64).reshape(
                len(doc["dual_coefs"]), -1
            )
            if doc["dual_coefs"]
            else np.zeros((0, len(scaler_doc["means"]))),
            dual_coefs=np.asarray(doc["dual_coefs"], dtype=np.float64),
            bias=float(doc["bias"]),
            params=params,
            scaler=scaler,
            converged=bool(doc["converged"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad model document: {exc}") from exc


@dataclass
class GridSearchResult:
    best: SvrParams
    table: list[tuple[SvrParams, float | None]] = field(default_factory=list)


def grid_search(
    X: np.ndarray,
    y: np.ndarray,
    candidates: Sequence[SvrParams],
    train_idx: Sequence[int],
    val_idx: Sequence[int],
) -> GridSearchResult:
    """Pick the candidate maximizing validation rank correlation.

    Ties break toward smaller C, then smaller degree, then earlier position
    in the candidate list, so the result is deterministic.
    """
    if not candidates:
        raise ValueError("candidate grid must be nonempty")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    train_idx = np.asarray(train_idx, dtype=int)
    val_idx = np.asarray(val_idx, dtype=int)
    y_val = y[val_idx]
    if len(val_idx) < 2 or np.unique(y_val).size < 2:
        raise DegenerateDataError(
            "validation targets are all tied; choose a different train/validation split"
        )

    table: list[tuple[SvrParams, float | None]] = []
    for cand in candidates:
        model = svr_fit(X[train_idx], y[train_idx], cand)
        score = spearman(svr_predict(model, X[val_idx]), y_val)
        table.append((cand, score))

    def sort_key(item: tuple[int, tuple[SvrParams, float | None]]):
        idx, (cand, score) = item
        return (-(score if score is not None else -2.0), cand.C, cand.kernel.degree, idx)

    best_idx = min(enumerate(table), key=sort_key)[0]
    return GridSearchResult(best=table[best_idx][0], table=table)
