"""Binary soft-margin SVM with a Gaussian kernel, trained by SMO.

The solver picks the maximal-violating working pair each step, with ties
broken by a priority permutation drawn once from the seed, so training is
bit-for-bit reproducible and exactly antisymmetric under label negation.
Probability output comes from a sigmoid fitted to training decision values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import expit

from .errors import EmptyInput, SingleClass

DEFAULT_KERNEL_SCALE = 3.0
DEFAULT_BOX_C = 1.0
DEFAULT_TOL = 1e-3
RETAIN_EPS = 1e-12


def rbf_kernel(u, v, scale: float = DEFAULT_KERNEL_SCALE) -> float:
    """exp(-||u - v||^2 / scale^2); note the scale convention is not 1/(2*sigma^2)."""
    diff = np.asarray(u, dtype=np.float64) - np.asarray(v, dtype=np.float64)
    return float(np.exp(-np.dot(diff, diff) / scale**2))


def _kernel_matrix(a: np.ndarray, b: np.ndarray, scale: float) -> np.ndarray:
    return np.exp(-cdist(a, b, "sqeuclidean") / scale**2)


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray
    dual_coefs: np.ndarray  # alpha_i * y_i, only |alpha| > 1e-12 retained
    bias: float
    kernel_scale: float
    box_c: float
    converged: bool
    n_iter: int
    seed: int
    objective_trace: tuple[float, ...] | None = None


@dataclass(frozen=True)
class PlattCalibration:
    a: float  # slope, negative for a usefully oriented classifier
    b: float


def _validate_training_set(x: np.ndarray, y: np.ndarray) -> None:
    if len(x) == 0:
        raise EmptyInput("empty training set")
    if len(x) != len(y):
        raise ValueError("feature/label length mismatch")
    if len(x) < 2:
        raise ValueError("need at least two training points")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite feature values")
    if not np.all(np.isin(y, (-1, 1))):
        raise ValueError("labels must be +1 or -1")
    if np.all(y == y[0]):
        raise SingleClass("training set contains a single class")


def _pick(candidates: np.ndarray, crit: np.ndarray, priority: np.ndarray, largest: bool) -> int:
    vals = crit[candidates]
    best = vals.max() if largest else vals.min()
    ties = candidates[vals == best]
    return int(ties[np.argmax(priority[ties])])


def train_svm(
    x: np.ndarray,
    y: np.ndarray,
    box_c: float = DEFAULT_BOX_C,
    kernel_scale: float = DEFAULT_KERNEL_SCALE,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    keep_objective_trace: bool = False,
) -> SvmModel:
    """Solve the dual QP by sequential minimal optimization.

    Each iteration updates the pair (i, j) with the largest KKT violation,
    where i maximizes y_t*g_t over points allowed to grow and j minimizes it
    over points allowed to shrink, g being the negated dual gradient. The
    iteration cap is 100*n; hitting it returns the model with converged=False
    rather than raising, so sweeps over hard folds still complete.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _validate_training_set(x, y)
    n = len(y)
    kmat = _kernel_matrix(x, x, kernel_scale)
    alpha = np.zeros(n)
    g = np.ones(n)
    lo = np.where(y > 0, 0.0, -box_c)  # bounds on y_t * alpha_t
    hi = np.where(y > 0, box_c, 0.0)
    priority = np.random.default_rng(seed).permutation(n)
    trace: list[float] = []
    max_iter = 100 * n
    converged = False
    it = 0
    while it < max_iter:
        if keep_objective_trace:
            ya = alpha * y
            trace.append(float(alpha.sum() - 0.5 * ya @ kmat @ ya))
        crit = y * g
        up = np.nonzero(y * alpha < hi)[0]
        down = np.nonzero(y * alpha > lo)[0]
        if len(up) == 0 or len(down) == 0:
            converged = True
            break
        i = _pick(up, crit, priority, largest=True)
        j = _pick(down, crit, priority, largest=False)
        if crit[i] - crit[j] < tol:
            converged = True
            break
        step = min(hi[i] - y[i] * alpha[i], y[j] * alpha[j] - lo[j])
        denom = kmat[i, i] + kmat[j, j] - 2.0 * kmat[i, j]
        if denom > 0.0:
            step = min(step, (crit[i] - crit[j]) / denom)
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        for t in (i, j):
            if alpha[t] < RETAIN_EPS:
                alpha[t] = 0.0
            elif alpha[t] > box_c - RETAIN_EPS:
                alpha[t] = box_c
        g += step * y * (kmat[j] - kmat[i])
        it += 1

    crit = y * g
    free = (alpha > 0.0) & (alpha < box_c)
    if free.any():
        bias = float(crit[free].mean())
    else:
        up = np.nonzero(y * alpha < hi)[0]
        down = np.nonzero(y * alpha > lo)[0]
        top = crit[up].max() if len(up) else 0.0
        bottom = crit[down].min() if len(down) else 0.0
        bias = float((top + bottom) / 2.0)

    keep = alpha > RETAIN_EPS
    return SvmModel(
        support_vectors=x[keep].copy(),
        dual_coefs=(alpha * y)[keep].copy(),
        bias=bias,
        kernel_scale=kernel_scale,
        box_c=box_c,
        converged=converged,
        n_iter=it,
        seed=int(seed),
        objective_trace=tuple(trace) if keep_objective_trace else None,
    )


def decision_values(model: SvmModel, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if len(model.support_vectors) == 0:
        return np.full(len(x), model.bias)
    k = _kernel_matrix(x, model.support_vectors, model.kernel_scale)
    return k @ model.dual_coefs + model.bias


def decision_value(model: SvmModel, x: np.ndarray) -> float:
    return float(decision_values(model, x)[0])


def fit_calibration(values: np.ndarray, labels: np.ndarray) -> PlattCalibration:
    """Fit p(f) = 1/(1 + exp(a*f + b)) by Newton descent on cross-entropy.

    Targets are the regularized frequencies (n_pos+1)/(n_pos+2) and
    1/(n_neg+2) rather than hard 0/1, which keeps the fit finite even for
    perfectly separated decision values.
    """
    f = np.asarray(values, dtype=np.float64)
    y = np.asarray(labels)
    n_pos = int(np.count_nonzero(y > 0))
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("calibration needs both classes")
    t = np.where(y > 0, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))

    def objective(a: float, b: float) -> float:
        z = a * f + b
        # t*z + log(1+exp(-z)), written to avoid overflow for large |z|
        return float(np.sum(np.where(z >= 0, t * z + np.log1p(np.exp(-z)),
                                     (t - 1.0) * z + np.log1p(np.exp(z)))))

    sigma = 1e-12
    a, b = 0.0, float(np.log((n_neg + 1.0) / (n_pos + 1.0)))
    fval = objective(a, b)
    for _ in range(100):
        z = a * f + b
        p = expit(-z)  # model probability of the positive class
        d1 = t - p
        d2 = p * (1.0 - p)
        grad = np.array([np.dot(f, d1), d1.sum()])
        if np.all(np.abs(grad) < 1e-5):
            break
        h11 = np.dot(f * f, d2) + sigma
        h12 = np.dot(f, d2)
        h22 = d2.sum() + sigma
        det = h11 * h22 - h12 * h12
        da = -(h22 * grad[0] - h12 * grad[1]) / det
        db = -(-h12 * grad[0] + h11 * grad[1]) / det
        step = 1.0
        while step >= 1e-10:
            na, nb = a + step * da, b + step * db
            nval = objective(na, nb)
            if nval < fval + 1e-4 * step * (grad[0] * da + grad[1] * db):
                a, b, fval = na, nb, nval
                break
            step /= 2.0
        else:
            break
    return PlattCalibration(a=float(a), b=float(b))


def predict_proba(model: SvmModel, calibration: PlattCalibration, x: np.ndarray) -> np.ndarray:
    """Calibrated probability of class +1 for one sample or a batch."""
    f = decision_values(model, x)
    return expit(-(calibration.a * f + calibration.b))


def classifier_to_document(model: SvmModel, calibration: PlattCalibration) -> dict:
    """JSON-ready record; float values survive a dump/load cycle bit-exactly."""
    return {
        "support_vectors": model.support_vectors.tolist(),
        "dual_coefs": model.dual_coefs.tolist(),
        "bias": model.bias,
        "kernel_scale": model.kernel_scale,
        "box_c": model.box_c,
        "converged": model.converged,
        "n_iter": model.n_iter,
        "seed": model.seed,
        "calibration_a": calibration.a,
        "calibration_b": calibration.b,
    }


def classifier_from_document(doc: dict) -> tuple[SvmModel, PlattCalibration]:
    model = SvmModel(
        support_vectors=np.array(doc["support_vectors"], dtype=np.float64).reshape(
            len(doc["support_vectors"]), -1
        ),
        dual_coefs=np.array(doc["dual_coefs"], dtype=np.float64),
        bias=doc["bias"],
        kernel_scale=doc["kernel_scale"],
        box_c=doc["box_c"],
        converged=doc["converged"],
        n_iter=doc["n_iter"],
        seed=doc["seed"],
    )
    return model, PlattCalibration(a=doc["calibration_a"], b=doc["calibration_b"])
