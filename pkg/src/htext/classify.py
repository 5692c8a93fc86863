"""One-vs-rest L2 logistic regression and micro/macro F1 evaluation.

The binary objective per class is ``C * sum_i log(1 + exp(-y_i (w.x_i + b))) + ||w||^2 / 2``
with an unpenalized bias, minimized by damped Newton iterations.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, log_expit

GRAD_TOL = 1e-6
MAX_NEWTON_ITER = 100


class ClassifierError(ValueError):
    pass


def logistic_objective(w, b, X, y_pm, C):
    """Regularized logistic loss; ``y_pm`` holds +1/-1 labels."""
    margin = y_pm * (X @ w + b)
    return float(-C * log_expit(margin).sum() + 0.5 * w @ w)


def fit_binary(X, y_pm, C=1.0, tol=GRAD_TOL, max_iter=MAX_NEWTON_ITER):
    """Newton's method with Armijo backtracking.

    Returns ``(w, b, history)`` where ``history`` lists the objective after
    each accepted iteration (starting with the value at zero).
    """
    n, d = X.shape
    Xa = np.hstack([X, np.ones((n, 1))])
    reg = np.ones(d + 1)
    reg[-1] = 0.0
    theta = np.zeros(d + 1)

    def value(th):
        return logistic_objective(th[:-1], th[-1], X, y_pm, C)

    f = value(theta)
    history = [f]
    for _ in range(max_iter):
        margin = y_pm * (Xa @ theta)
        s = expit(-margin)  # = 1 - sigma(margin)
        grad = -C * Xa.T @ (y_pm * s) + reg * theta
        if np.linalg.norm(grad) <= tol:
            break
        curv = s * (1.0 - s)
        H = C * (Xa.T * curv) @ Xa + np.diag(reg)
        H[np.diag_indices_from(H)] += 1e-12
        try:
            step = np.linalg.solve(H, -grad)
        except np.linalg.LinAlgError:
            step = -grad
        slope = grad @ step
        if slope >= 0:  # not a descent direction (near-singular Hessian)
            step, slope = -grad, -(grad @ grad)
        alpha = 1.0
        while True:
            cand = theta + alpha * step
            f_new = value(cand)
            if f_new <= f + 1e-4 * alpha * slope or alpha < 1e-12:
                break
            alpha *= 0.5
        if f_new > f:
            break
        theta, f = cand, f_new
        history.append(f)
    return theta[:-1].copy(), float(theta[-1]), history


@dataclass
class ClassifierModel:
    weights: np.ndarray  # (n_classes, d)
    bias: np.ndarray  # (n_classes,)
    classes: np.ndarray  # label id for each row
    C: float = 1.0
    history: list = field(default_factory=list, repr=False)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def dimension(self) -> int:
        return self.weights.shape[1]

    def scores(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dimension:
            raise ClassifierError(f"feature dimension {X.shape[1]} != model dimension {self.dimension}")
        return X @ self.weights.T + self.bias

    def predict_proba_ovr(self, X) -> np.ndarray:
        """Per-class binary probabilities (not normalized across classes)."""
        return expit(self.scores(X))


def train_classifier(features, labels, C_reg: float = 1.0, tol: float = GRAD_TOL) -> ClassifierModel:
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    if X.ndim != 2 or len(X) != len(y):
        raise ClassifierError("features must be (n, d) with one label per row")
    if not np.all(np.isfinite(X)):
        raise ClassifierError("features must be finite")
    classes = np.unique(y)
    if len(classes) < 2:
        raise ClassifierError("need at least two classes to train a classifier")
    W = np.zeros((len(classes), X.shape[1]))
    b = np.zeros(len(classes))
    histories = []
    for k, c in enumerate(classes):
        y_pm = np.where(y == c, 1.0, -1.0)
        W[k], b[k], hist = fit_binary(X, y_pm, C_reg, tol)
        histories.append(hist)
    return ClassifierModel(W, b, classes, C_reg, histories)


def predict(model: ClassifierModel, features):
    """Argmax over class scores; the first (lowest-id) class wins ties.

    Returns a label id for a single vector or an array for a matrix.
    """
    single = np.ndim(features) == 1
    out = model.classes[np.argmax(model.scores(features), axis=1)]
    return out[0] if single else out


@dataclass
class EvalReport:
    micro_f1: float
    macro_f1: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    confusion: np.ndarray  # rows gold, columns predicted
    classes: np.ndarray

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.confusion) / self.confusion.sum())

    def to_dict(self, class_names=None) -> dict:
        names = [str(c) if class_names is None else class_names[c] for c in self.classes]
        return {
            "micro_f1": self.micro_f1,
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "per_class": {
                name: {
                    "precision": float(p), "recall": float(r), "f1": float(f), "support": int(s)
                }
                for name, p, r, f, s in zip(names, self.precision, self.recall, self.f1, self.support)
            },
            "confusion": self.confusion.tolist(),
            "classes": names,
        }

    def to_text(self, class_names=None) -> str:
        d = self.to_dict(class_names)
        lines = [f"micro_f1={d['micro_f1']:.6f}", f"macro_f1={d['macro_f1']:.6f}", f"accuracy={d['accuracy']:.6f}"]
        for name, m in d["per_class"].items():
            lines.append(
                f"class={name} precision={m['precision']:.6f} recall={m['recall']:.6f} "
                f"f1={m['f1']:.6f} support={m['support']}"
            )
        return "\n".join(lines)


def _f1(tp, fp, fn):
    denom = 2 * tp + fp + fn
    return np.divide(2 * tp, denom, out=np.zeros_like(denom, dtype=np.float64), where=denom > 0)


def evaluate(predictions, gold, classes=None) -> EvalReport:
    """Micro-F1 from pooled counts, macro-F1 as the plain mean of per-class F1.

    ``classes`` fixes the class set; by default it is the union of the labels
    seen in ``gold`` and ``predictions``. Classes with neither support nor
    predictions score F1 = 0.
    """
    pred = np.asarray(predictions)
    gold = np.asarray(gold)
    if pred.shape != gold.shape or pred.ndim != 1:
        raise ClassifierError("predictions and gold must be 1-D and of equal length")
    if len(gold) == 0:
        raise ClassifierError("cannot evaluate an empty prediction set")
    classes = np.unique(np.concatenate([gold, pred])) if classes is None else np.asarray(classes)
    index = {c: i for i, c in enumerate(classes.tolist())}
    try:
        gi = np.array([index[c] for c in gold.tolist()])
        pi = np.array([index[c] for c in pred.tolist()])
    except KeyError as exc:
        raise ClassifierError(f"label {exc.args[0]!r} outside the class set") from None
    k = len(classes)
    conf = np.zeros((k, k), dtype=np.int64)
    np.add.at(conf, (gi, pi), 1)
    tp = np.diag(conf).astype(np.float64)
    fp = conf.sum(axis=0) - tp
    fn = conf.sum(axis=1) - tp
    precision = np.divide(tp, tp + fp, out=np.zeros(k), where=(tp + fp) > 0)
    recall = np.divide(tp, tp + fn, out=np.zeros(k), where=(tp + fn) > 0)
    f1 = _f1(tp, fp, fn)
    micro = float(_f1(tp.sum(), fp.sum(), fn.sum()))
    return EvalReport(
        micro_f1=micro,
        macro_f1=float(f1.mean()),
        precision=precision,
        recall=recall,
        f1=f1,
        support=conf.sum(axis=1),
        confusion=conf,
        classes=classes,
    )
