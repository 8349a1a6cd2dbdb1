"""Gaussian naive Bayes, backprop MLP and SMO-trained kernel SVM.

Labels are integers: 1 for ringworm-positive, 0 for negative. Every
classifier breaks ties toward the negative class. Models are small
dataclasses holding numpy arrays; ``to_dict`` / :func:`model_from_dict`
round-trip them through JSON-compatible dicts without loss.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .features import NEGATIVE, POSITIVE, FeatureVector

EPS_SIGMA = 1e-6
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class TrainingError(RuntimeError):
    """Training data cannot produce a model (empty set, missing class, ...)."""


def _xy(X, y=None):
    """Accept a matrix + labels or a sequence of labeled FeatureVectors."""
    if y is None:
        vectors = list(X)
        if not vectors:
            raise TrainingError("empty training set")
        if any(v.label is None for v in vectors):
            raise TrainingError("every training vector needs a label")
        X = np.vstack([v.values for v in vectors])
        y = np.array([v.label for v in vectors])
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y).astype(np.int64).ravel()
    if X.shape[0] == 0:
        raise TrainingError("empty training set")
    if X.shape[0] != y.size:
        raise ValueError(f"{X.shape[0]} samples but {y.size} labels")
    return X, y


def _vec(v) -> np.ndarray:
    return v.values if isinstance(v, FeatureVector) else np.asarray(v, dtype=np.float64)


def _check_dim(x: np.ndarray, expected: int) -> None:
    if x.shape[-1] != expected:
        raise ValueError(f"expected {expected} features, got {x.shape[-1]}")


# ------------------------------------------------------------ naive Bayes


def gaussian_pdf(x: float, mu: float, sigma: float) -> float:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    z = (x - mu) / sigma
    return math.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * sigma)


@dataclass(eq=False)
class GnbModel:
    """Class priors plus per-class, per-feature normal parameters.

    Row 0 of ``means``/``stds`` belongs to the negative class, row 1 to the
    positive class; ``priors`` is indexed the same way.
    """

    priors: np.ndarray
    means: np.ndarray
    stds: np.ndarray

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    def log_scores(self, x) -> np.ndarray:
        """log p(C) + sum_i log f(x_i; mu, sigma) for both classes."""
        x = _vec(x)
        _check_dim(x, self.n_features)
        z = (x - self.means) / self.stds
        return np.log(self.priors) - np.sum(
            0.5 * z * z + np.log(self.stds) + _LOG_SQRT_2PI, axis=-1
        )

    def predict(self, X) -> np.ndarray:
        return np.array([gnb_predict(self, x)[0] for x in np.atleast_2d(X)])

    def to_dict(self) -> dict:
        return {
            "kind": "gnb",
            "n_features": self.n_features,
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "stds": self.stds.tolist(),
            "eps_sigma": EPS_SIGMA,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GnbModel":
        return cls(np.asarray(d["priors"]), np.asarray(d["means"]), np.asarray(d["stds"]))


def gnb_train(X, y=None) -> GnbModel:
    """Maximum-likelihood priors, means and (divide-by-n) deviations."""
    X, y = _xy(X, y)
    priors, means, stds = [], [], []
    for label in (NEGATIVE, POSITIVE):
        rows = X[y == label]
        if rows.shape[0] == 0:
            raise TrainingError(f"no training samples for class {label}")
        priors.append(rows.shape[0] / X.shape[0])
        means.append(rows.mean(axis=0))
        stds.append(np.maximum(rows.std(axis=0), EPS_SIGMA))
    return GnbModel(np.array(priors), np.vstack(means), np.vstack(stds))


def gnb_predict(model: GnbModel, v) -> tuple[int, float]:
    """Label and its posterior probability."""
    scores = model.log_scores(v)
    post = np.exp(scores - scores.max())
    post /= post.sum()
    label = POSITIVE if scores[1] > scores[0] else NEGATIVE
    return label, float(post[label])


# -------------------------------------------------------------------- MLP


def _sigmoid(a):
    return 1.0 / (1.0 + np.exp(-a))


@dataclass(frozen=True)
class MlpTrainConfig:
    eta: float = 0.8
    alpha: float = 0.7
    hidden: int = 20
    max_epochs: int = 2000
    target_mse: float = 0.01
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.eta < 0 or not 0 <= self.alpha < 1 or self.hidden < 1:
            raise ValueError(f"invalid MLP config {self}")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be >= 0")


@dataclass(eq=False)
class MlpModel:
    """One sigmoid hidden layer, two sigmoid outputs.

    Output 0 is trained toward 1 for positive samples, output 1 toward 1 for
    negative samples.
    """

    w_hidden: np.ndarray  # (n_hidden, n_in)
    b_hidden: np.ndarray
    w_out: np.ndarray  # (2, n_hidden)
    b_out: np.ndarray
    config: Optional[MlpTrainConfig] = None
    epochs_run: int = 0
    final_mse: float = float("nan")

    @property
    def sizes(self) -> tuple[int, int, int]:
        return self.w_hidden.shape[1], self.w_hidden.shape[0], self.w_out.shape[0]

    def copy(self) -> "MlpModel":
        return MlpModel(
            self.w_hidden.copy(), self.b_hidden.copy(), self.w_out.copy(), self.b_out.copy(),
            self.config, self.epochs_run, self.final_mse,
        )

    def predict(self, X) -> np.ndarray:
        out = mlp_forward(self, np.atleast_2d(X))
        return np.where(out[:, 0] > out[:, 1], POSITIVE, NEGATIVE)

    def to_dict(self) -> dict:
        return {
            "kind": "mlp",
            "n_features": self.sizes[0],
            "sizes": list(self.sizes),
            "w_hidden": self.w_hidden.tolist(),
            "b_hidden": self.b_hidden.tolist(),
            "w_out": self.w_out.tolist(),
            "b_out": self.b_out.tolist(),
            "config": None if self.config is None else asdict(self.config),
            "epochs_run": self.epochs_run,
            "final_mse": self.final_mse,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpModel":
        cfg = d.get("config")
        return cls(
            np.asarray(d["w_hidden"], dtype=np.float64),
            np.asarray(d["b_hidden"], dtype=np.float64),
            np.asarray(d["w_out"], dtype=np.float64),
            np.asarray(d["b_out"], dtype=np.float64),
            None if cfg is None else MlpTrainConfig(**cfg),
            d.get("epochs_run", 0),
            d.get("final_mse", float("nan")),
        )


def mlp_init(n_in: int, n_hidden: int, seed: int, n_out: int = 2) -> MlpModel:
    """Weights and biases uniform in [-0.5, 0.5]."""
    rng = np.random.default_rng(seed)
    return MlpModel(
        rng.uniform(-0.5, 0.5, (n_hidden, n_in)),
        rng.uniform(-0.5, 0.5, n_hidden),
        rng.uniform(-0.5, 0.5, (n_out, n_hidden)),
        rng.uniform(-0.5, 0.5, n_out),
    )


def _forward(model: MlpModel, x: np.ndarray):
    hidden = _sigmoid(x @ model.w_hidden.T + model.b_hidden)
    return hidden, _sigmoid(hidden @ model.w_out.T + model.b_out)


def mlp_forward(model: MlpModel, v) -> np.ndarray:
    x = _vec(v)
    _check_dim(x, model.sizes[0])
    return _forward(model, x)[1]


def mlp_gradients(model: MlpModel, x: np.ndarray, target: np.ndarray):
    """Gradients of E = 1/2 * sum((target - output)**2) for one sample.

    Returns ``(dW_hidden, db_hidden, dW_out, db_out)``.
    """
    hidden, out = _forward(model, x)
    delta_out = (out - target) * out * (1.0 - out)
    delta_hidden = (model.w_out.T @ delta_out) * hidden * (1.0 - hidden)
    return (
        np.outer(delta_hidden, x),
        delta_hidden,
        np.outer(delta_out, hidden),
        delta_out,
    )


def _targets(y: np.ndarray) -> np.ndarray:
    return np.column_stack([y == POSITIVE, y == NEGATIVE]).astype(np.float64)


def mlp_mse(model: MlpModel, X, y) -> float:
    """Mean over samples and both outputs of the squared error."""
    _, out = _forward(model, np.atleast_2d(X))
    return float(np.mean((_targets(np.asarray(y)) - out) ** 2))


def mlp_train(X, y=None, config: MlpTrainConfig = MlpTrainConfig()) -> MlpModel:
    """Online backpropagation with momentum.

    Each sample applies ``dw(t) = -eta * dE/dw + alpha * dw(t-1)``; sample
    order is reshuffled every epoch from ``config.seed``. Training stops after
    ``config.max_epochs`` epochs or once the epoch MSE reaches
    ``config.target_mse``.
    """
    X, y = _xy(X, y)
    T = _targets(y)
    model = mlp_init(X.shape[1], config.hidden, config.seed)
    model.config = config
    params = [model.w_hidden, model.b_hidden, model.w_out, model.b_out]
    velocity = [np.zeros_like(p) for p in params]
    rng = np.random.default_rng(config.seed + 1)
    order = np.arange(X.shape[0])
    mse = mlp_mse(model, X, y)
    epoch = 0
    while epoch < config.max_epochs and mse > config.target_mse:
        if config.shuffle:
            rng.shuffle(order)
        for n in order:
            grads = mlp_gradients(model, X[n], T[n])
            for p, v, g in zip(params, velocity, grads):
                v *= config.alpha
                v -= config.eta * g
                p += v
        epoch += 1
        mse = mlp_mse(model, X, y)
        if not np.isfinite(mse):
            raise TrainingError(f"MLP diverged at epoch {epoch}")
    model.epochs_run = epoch
    model.final_mse = mse
    return model


def mlp_predict(model: MlpModel, v) -> int:
    out = mlp_forward(model, v)
    return POSITIVE if out[0] > out[1] else NEGATIVE


# -------------------------------------------------------------------- SVM

KERNEL_KINDS = ("rbf", "polynomial", "linear")


@dataclass(frozen=True)
class Kernel:
    kind: str = "rbf"
    gamma: float = 0.5
    degree: int = 3

    def __post_init__(self):
        kind = {"poly": "polynomial"}.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        if kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if not self.gamma > 0 or self.degree < 1:
            raise ValueError(f"invalid kernel parameters {self}")

    def matrix(self, A, B) -> np.ndarray:
        A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        B = np.atleast_2d(np.asarray(B, dtype=np.float64))
        if self.kind == "rbf":
            sq = np.sum((A[:, None, :] - B[None, :, :]) ** 2, axis=-1)
            return np.exp(-self.gamma * sq)
        dot = A @ B.T
        if self.kind == "polynomial":
            return (dot + 1.0) ** self.degree
        return dot


def kernel_eval(k: Kernel, a, b) -> float:
    a, b = _vec(a), _vec(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    if k.kind == "rbf":
        return float(math.exp(-k.gamma * float(np.sum((a - b) ** 2))))
    dot = float(np.sum(a * b))
    if k.kind == "polynomial":
        return (dot + 1.0) ** k.degree
    return dot


@dataclass(eq=False)
class SvmModel:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i
    bias: float
    kernel: Kernel
    C: float
    tol: float = 1e-3
    iterations: int = 0

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    def decision(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        _check_dim(X, self.n_features)
        return self.kernel.matrix(X, self.support_vectors) @ self.dual_coef + self.bias

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision(X) > 0, POSITIVE, NEGATIVE)

    def to_dict(self) -> dict:
        return {
            "kind": "svm",
            "n_features": self.n_features,
            "support_vectors": self.support_vectors.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "bias": self.bias,
            "kernel": asdict(self.kernel),
            "C": self.C,
            "tol": self.tol,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        sv = np.asarray(d["support_vectors"], dtype=np.float64).reshape(-1, d["n_features"])
        return cls(
            sv, np.asarray(d["dual_coef"], dtype=np.float64), float(d["bias"]),
            Kernel(**d["kernel"]), float(d["C"]), float(d.get("tol", 1e-3)),
            int(d.get("iterations", 0)),
        )


@dataclass
class SmoResult:
    """Full dual solution, kept for diagnostics and optimality checks."""

    alpha: np.ndarray
    y: np.ndarray
    bias: float
    objective: float
    iterations: int


def smo_solve(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3, max_iter: int = 1_000_000) -> SmoResult:
    """Minimize 1/2 a'Qa - sum(a) s.t. 0 <= a <= C, y'a = 0, Q = yy' * K.

    Each step picks the maximal violating pair (i from the "up" set with the
    largest -y*grad, j from the "low" set with the smallest) and solves the
    two-variable subproblem in closed form. Stops once the violation gap is
    at most ``tol``.
    """
    n = y.size
    y = y.astype(np.float64)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    tau = 1e-12
    it = 0
    while it < max_iter:
        v = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(v[up])])
        j = int(np.flatnonzero(low)[np.argmin(v[low])])
        if v[i] - v[j] <= tol:
            break
        it += 1
        old_i, old_j = alpha[i], alpha[j]
        q_ij = y[i] * y[j] * K[i, j]
        if y[i] != y[j]:
            quad = max(K[i, i] + K[j, j] + 2.0 * q_ij, tau)
            delta = (-grad[i] - grad[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j], alpha[i] = 0.0, diff
            elif alpha[i] < 0:
                alpha[i], alpha[j] = 0.0, -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, C - diff
            elif alpha[j] > C:
                alpha[j], alpha[i] = C, C + diff
        else:
            quad = max(K[i, i] + K[j, j] - 2.0 * q_ij, tau)
            delta = (grad[i] - grad[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, total - C
            elif alpha[j] < 0:
                alpha[j], alpha[i] = 0.0, total
            if total > C:
                if alpha[j] > C:
                    alpha[j], alpha[i] = C, total - C
            elif alpha[i] < 0:
                alpha[i], alpha[j] = 0.0, total
        d_i, d_j = alpha[i] - old_i, alpha[j] - old_j
        grad += y * (y[i] * d_i * K[i] + y[j] * d_j * K[j])
    else:
        warnings.warn(f"SMO stopped at max_iter={max_iter} before reaching tol={tol}")

    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(np.mean(yg[free]))
    else:
        ub, lb = math.inf, -math.inf
        for t in range(n):
            if alpha[t] >= C:
                if y[t] < 0:
                    ub = min(ub, yg[t])
                else:
                    lb = max(lb, yg[t])
            else:
                if y[t] > 0:
                    ub = min(ub, yg[t])
                else:
                    lb = max(lb, yg[t])
        rho = (ub + lb) / 2.0
    # grad = Qa - 1, so 1/2 a'Qa - sum(a) = 1/2 a'(grad - 1)
    objective = float(0.5 * np.dot(alpha, grad - 1.0))
    return SmoResult(alpha, y, -rho + 0.0, objective, it)


def _pm(y: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(y) > 0, 1.0, -1.0)


def svm_train(X, y=None, kernel: Kernel = Kernel(), C: float = 1.0, tol: float = 1e-3) -> SvmModel:
    """Soft-margin kernel SVM trained by SMO.

    Labels may be given as {0, 1} or {-1, +1}. Only samples with a
    positive dual coefficient are kept.
    """
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    X, y = _xy(X, y)
    ypm = _pm(y)
    if np.all(ypm > 0) or np.all(ypm < 0):
        raise TrainingError("SVM training needs samples from both classes")
    K = kernel.matrix(X, X)
    res = smo_solve(K, ypm, C, tol)
    keep = res.alpha > 0
    return SvmModel(
        X[keep].copy(), (res.alpha * ypm)[keep], res.bias, kernel, C, tol, res.iterations
    )


def svm_decision(model: SvmModel, v) -> float:
    return float(model.decision(_vec(v))[0])


def svm_predict(model: SvmModel, v) -> int:
    return POSITIVE if svm_decision(model, v) > 0 else NEGATIVE


# --------------------------------------------------------------- ensemble


def majority_vote(votes: Sequence[int]) -> int:
    votes = list(votes)
    if len(votes) != 3:
        raise ValueError(f"majority voting needs exactly 3 votes, got {len(votes)}")
    if any(v not in (POSITIVE, NEGATIVE) for v in votes):
        raise ValueError(f"votes must be binary labels, got {votes}")
    return POSITIVE if sum(votes) >= 2 else NEGATIVE


# ---------------------------------------------------- specs & persistence

Model = Union[GnbModel, MlpModel, SvmModel]
CLASSIFIER_KINDS = ("gnb", "mlp", "svm")


@dataclass(frozen=True)
class ClassifierSpec:
    """Which classifier to train and with what hyperparameters."""

    kind: str
    mlp: MlpTrainConfig = field(default_factory=MlpTrainConfig)
    kernel: Kernel = field(default_factory=Kernel)
    C: float = 1.0
    tol: float = 1e-3

    def __post_init__(self):
        if self.kind not in CLASSIFIER_KINDS:
            raise ValueError(f"unknown classifier {self.kind!r}")

    @property
    def name(self) -> str:
        return self.kind

    def train(self, X, y, seed: Optional[int] = None) -> Model:
        if self.kind == "gnb":
            return gnb_train(X, y)
        if self.kind == "mlp":
            cfg = self.mlp
            if seed is not None:
                cfg = MlpTrainConfig(**{**asdict(cfg), "seed": seed})
            return mlp_train(X, y, cfg)
        return svm_train(X, y, self.kernel, self.C, self.tol)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "mlp": asdict(self.mlp),
            "kernel": asdict(self.kernel),
            "C": self.C,
            "tol": self.tol,
        }


_MODEL_TYPES = {"gnb": GnbModel, "mlp": MlpModel, "svm": SvmModel}


def model_from_dict(d: dict) -> Model:
    try:
        cls = _MODEL_TYPES[d["kind"]]
    except KeyError:
        raise ValueError(f"unknown model kind {d.get('kind')!r}") from None
    return cls.from_dict(d)
