"""Characteristic functions over feature lattices.

Each builder returns a normalized :class:`~shapaudit.game.Game` whose players
are the dataset (or population) features in column order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .dgp import Dataset, PopulationModel, SecretInteraction, secret_terms
from .game import Game, InvalidArgument, NumericError, members

RIDGE = 1e-12


# ---- least squares ----

def ols(design: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    """Coefficients and residual sum of squares; ``design`` carries its own intercept column.

    Solved by SVD-based lstsq; a rank-deficient design is an error.
    """
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise NumericError(f"rank-deficient design: rank {rank} < {design.shape[1]} columns")
    resid = y - design @ coef
    return coef, float(resid @ resid)


def _with_intercept(cols: list[np.ndarray], n: int) -> np.ndarray:
    return np.column_stack([np.ones(n), *cols])


# ---- population / empirical R^2 ----

def r2_game_population(pop: PopulationModel, target: str = "Y") -> Game:
    if pop.covariance is None:
        raise InvalidArgument("R^2 population game needs a covariance model")
    t = pop.names.index(target)
    feats = [k for k in range(len(pop.names)) if k != t]
    cov = pop.covariance
    var_y = cov[t, t]
    d = len(feats)

    def worth(S: int) -> float:
        idx = [feats[i] for i in members(S, d)]
        if not idx:
            return 0.0
        sigma = cov[np.ix_(idx, idx)]
        s = cov[idx, t]
        try:
            beta = np.linalg.solve(sigma, s)
        except np.linalg.LinAlgError:
            try:
                beta = np.linalg.solve(sigma + RIDGE * np.eye(len(idx)), s)
            except np.linalg.LinAlgError:
                names = [pop.names[k] for k in idx]
                raise NumericError(f"singular covariance block for coalition {names}") from None
        return float(s @ beta / var_y)

    return Game.from_function(worth, d, [pop.names[k] for k in feats], tag="r2_population")


def r2_game_empirical(data: Dataset) -> Game:
    n, d = data.x.shape
    if n <= d + 1:
        raise InvalidArgument(f"need n > d+1 observations, got n={n}, d={d}")
    yc = data.y - data.y.mean()
    tss = float(yc @ yc)
    xc = data.x - data.x.mean(axis=0)

    def worth(S: int) -> float:
        idx = list(members(S, d))
        if not idx or tss == 0.0:
            return 0.0
        _, rss = ols(xc[:, idx], yc)
        return 1.0 - rss / tss

    return Game.from_function(worth, d, data.names, tag="r2_empirical")


# ---- Bayes-optimal accuracy over a discrete joint table ----

def bayes_accuracy_raw(pop: PopulationModel) -> np.ndarray:
    """m(S) = sum over cells of x_S of max_y P(x_S, y), for every S."""
    table = pop.joint_table
    if table is None:
        raise InvalidArgument("Bayes accuracy game needs a joint table")
    d = table.ndim - 1
    raw = np.empty(1 << d)
    for S in range(1 << d):
        drop = tuple(i for i in range(d) if not S >> i & 1)
        marg = table.sum(axis=drop) if drop else table
        raw[S] = marg.max(axis=-1).sum()
    return raw


def bayes_accuracy_game(pop: PopulationModel) -> Game:
    return Game.from_values(bayes_accuracy_raw(pop), pop.names[:-1], tag="bayes_accuracy")


# ---- Gaussian log-likelihood gain of the closest true submodel ----

def loglik_game(data: Dataset, truth: SecretInteraction) -> Game:
    """C(S) = 0.5 ln(RSS_empty / RSS_S).

    The submodel for S keeps the true model's nonzero terms whose variables
    all lie in S, fitted by least squares with an intercept.  This is the
    gain in maximized per-sample Gaussian log-likelihood over the
    intercept-only fit.
    """
    n, d = data.x.shape
    terms = {t: secret_terms(data.x, t) for t, beta in truth.coefficients().items() if beta != 0}
    yc = data.y - data.y.mean()
    rss0 = float(yc @ yc)
    if rss0 <= 0:
        raise NumericError("response has zero variance")

    def worth(S: int) -> float:
        cols = [col for t, col in terms.items() if t & S == t]
        if not cols:
            return 0.0
        _, rss = ols(_with_intercept(cols, n), data.y)
        if rss <= 0:
            raise NumericError(f"non-positive RSS for coalition {members(S, d)}")
        return 0.5 * math.log(rss0 / rss)

    return Game.from_function(worth, d, data.names, tag="loglik")


# ---- taxicab MSE skill of the max predictor ----

def mse_skill_game(data: Dataset) -> Game:
    """C(S) = mean(y^2) - mean((y - max_{i in S} x_i)^2); the empty predictor is 0."""
    n, d = data.x.shape
    base = float(np.mean(data.y ** 2))

    def worth(S: int) -> float:
        idx = list(members(S, d))
        if not idx:
            return 0.0
        pred = data.x[:, idx].max(axis=1)
        return base - float(np.mean((data.y - pred) ** 2))

    return Game.from_function(worth, d, data.names, tag="mse_skill")


# ---- fitted models and the interventional (SAGE-style) loss game ----

@dataclass(frozen=True, eq=False)
class LinearModel:
    coef: np.ndarray
    intercept: float
    feature_means: np.ndarray
    names: tuple[str, ...]

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.intercept + x @ self.coef


@dataclass(frozen=True, eq=False)
class ProbTableModel:
    """P(Y=1 | cell) over the product of observed feature levels.

    ``prob`` and ``counts`` have one axis per feature; ``empty`` marks cells
    with no training rows, which are smoothed to 0.5.
    """

    levels: tuple[np.ndarray, ...]
    prob: np.ndarray
    counts: np.ndarray
    names: tuple[str, ...]

    @property
    def empty(self) -> np.ndarray:
        return self.counts == 0

    def cell_index(self, x: np.ndarray) -> tuple[np.ndarray, ...]:
        out = []
        for k, lv in enumerate(self.levels):
            pos = np.searchsorted(lv, x[:, k])
            pos = np.clip(pos, 0, len(lv) - 1)
            if np.any(lv[pos] != x[:, k]):
                raise InvalidArgument(f"feature {self.names[k]} has values unseen during fitting")
            out.append(pos)
        return tuple(out)


FittedModel = Union[LinearModel, ProbTableModel]


@dataclass(frozen=True)
class LossSpec:
    kind: str = "squared_error"
    clip: float = 1e-6

    def __post_init__(self):
        if self.kind not in ("squared_error", "cross_entropy", "zero_one"):
            raise InvalidArgument(f"unknown loss {self.kind!r}")
        if not 0.0 < self.clip < 0.5:
            raise InvalidArgument("clip must lie in (0, 0.5)")

    def __call__(self, pred: np.ndarray, y) -> np.ndarray:
        if self.kind == "squared_error":
            return (y - pred) ** 2
        if self.kind == "cross_entropy":
            p = np.clip(pred, self.clip, 1.0 - self.clip)
            return -(y * np.log(p) + (1 - y) * np.log1p(-p))
        return ((pred > 0.5) != (y > 0.5)).astype(float)


SQUARED_ERROR = LossSpec("squared_error")
CROSS_ENTROPY = LossSpec("cross_entropy")


def fit_linear(data: Dataset) -> LinearModel:
    n, d = data.x.shape
    if n <= d + 1:
        raise InvalidArgument(f"need n > d+1 observations, got n={n}, d={d}")
    coef, _ = ols(_with_intercept([data.x[:, k] for k in range(d)], n), data.y)
    return LinearModel(coef[1:], float(coef[0]), data.x.mean(axis=0), data.names)


def fit_prob_table(data: Dataset) -> ProbTableModel:
    if not np.all((data.y == 0) | (data.y == 1)):
        raise InvalidArgument("probability table needs a binary response")
    levels, codes = [], []
    for k in range(data.d):
        lv, inv = np.unique(data.x[:, k], return_inverse=True)
        levels.append(lv)
        codes.append(inv)
    shape = tuple(len(lv) for lv in levels)
    flat = np.ravel_multi_index(codes, shape)
    counts = np.bincount(flat, minlength=math.prod(shape)).reshape(shape)
    ones = np.bincount(flat, weights=data.y, minlength=math.prod(shape)).reshape(shape)
    prob = np.where(counts > 0, ones / np.maximum(counts, 1), (ones + 1) / (counts + 2))
    return ProbTableModel(tuple(levels), prob, counts, data.names)


def _linear_loss_game(model: LinearModel, data: Dataset, loss: LossSpec) -> Game:
    if loss.kind != "squared_error":
        raise InvalidArgument(f"linear models are scored with squared error, not {loss.kind}")
    d = data.d
    centred = (data.x - model.feature_means) * model.coef
    base = model.intercept + float(model.feature_means @ model.coef)

    def mean_loss(S: int) -> float:
        idx = list(members(S, d))
        pred = base + centred[:, idx].sum(axis=1)
        return float(np.mean(loss(pred, data.y)))

    empty = mean_loss(0)
    return Game.from_function(lambda S: empty - mean_loss(S), d, data.names,
                              tag="interventional_linear")


def _table_loss_game(model: ProbTableModel, data: Dataset, loss: LossSpec) -> Game:
    if not np.all((data.y == 0) | (data.y == 1)):
        raise InvalidArgument("table models are scored on a binary response")
    d = data.d
    cells = model.cell_index(data.x)
    shape = model.prob.shape
    flat = np.ravel_multi_index(cells, shape)
    size = math.prod(shape)
    n_cell = np.bincount(flat, minlength=size).reshape(shape)
    n_one = np.bincount(flat, weights=data.y, minlength=size).reshape(shape)
    n_zero = n_cell - n_one
    joint = n_cell / data.n

    def mean_loss(S: int) -> float:
        drop = tuple(i for i in range(d) if not S >> i & 1)
        if drop:
            # average the model over the empirical joint of the removed features
            removed = joint.sum(axis=tuple(i for i in range(d) if S >> i & 1), keepdims=True)
            pred = (model.prob * removed).sum(axis=drop, keepdims=True)
            pred = np.broadcast_to(pred, shape)
        else:
            pred = model.prob
        total = (n_one * loss(pred, 1.0)).sum() + (n_zero * loss(pred, 0.0)).sum()
        return float(total / data.n)

    empty = mean_loss(0)
    return Game.from_function(lambda S: empty - mean_loss(S), d, data.names,
                              tag=f"interventional_table_{loss.kind}")


def interventional_loss_game(model: FittedModel, data: Dataset, loss: LossSpec) -> Game:
    """C(S) = mean loss of f_empty - mean loss of f_S under marginal imputation."""
    if tuple(model.names) != tuple(data.names):
        raise InvalidArgument("model and dataset features differ")
    if isinstance(model, LinearModel):
        return _linear_loss_game(model, data, loss)
    if isinstance(model, ProbTableModel):
        return _table_loss_game(model, data, loss)
    raise InvalidArgument(f"unsupported model type {type(model).__name__}")


def mean_abs_linear_shap(model: LinearModel, data: Dataset) -> np.ndarray:
    """Mean over rows of |coef_i (x_i - mean_i)|, the exact interventional SHAP of a linear model."""
    if not isinstance(model, LinearModel):
        raise InvalidArgument("closed-form SHAP applies to linear models only")
    return np.mean(np.abs((data.x - model.feature_means) * model.coef), axis=0)
