"""Pseudo-linear regression for LPV-MAX models.

The MAX model is linear in its sub-Markov parameters once the unknown
prediction errors in the noise regressor are replaced by the residuals of
the previous iterate. Each iteration is one ridge-regularised least-squares
solve over the process and noise parameters jointly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import FilterDivergedError, RankDeficiencyError
from .markov import SubMarkovTable, lagged_regressor
from .predictor import MaxModel, ResidualSeries, loss, residuals

log = logging.getLogger(__name__)

PE_RTOL = 1e-10


@dataclass(frozen=True)
class PlrConfig:
    lambda_proc: float = 0.1
    lambda_noise: float = 1.0
    max_iters: int = 50
    tol: float = 1e-6
    burn_in: int = 0

    def __post_init__(self):
        if self.lambda_proc < 0 or self.lambda_noise < 0:
            raise ValueError("ridge weights must be nonnegative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")

    @classmethod
    def for_snr(cls, snr_db, **kwargs):
        """Ridge weights tuned for noise-free (1, 100) or noisy (0.1, 1) data."""
        if snr_db is None or np.isinf(snr_db):
            return cls(lambda_proc=1.0, lambda_noise=100.0, **kwargs)
        return cls(lambda_proc=0.1, lambda_noise=1.0, **kwargs)


@dataclass(frozen=True, eq=False)
class Regressor:
    """Regression rows for times ``t``; ``phi_eps`` is ``None`` for FIR-only fits."""

    phi_u: np.ndarray
    phi_eps: np.ndarray | None
    t: np.ndarray

    @property
    def matrix(self):
        if self.phi_eps is None:
            return self.phi_u
        return np.hstack([self.phi_u, self.phi_eps])


@dataclass(eq=False)
class EstimationReport:
    model: MaxModel
    loss_per_iter: list
    iterations_used: int
    converged: bool
    pe_order: int
    pe_required: int
    condition_number: float
    residuals: ResidualSeries
    config: PlrConfig = field(default_factory=PlrConfig)

    @property
    def orders(self):
        return self.model.orders

    @property
    def sigma_e(self):
        """Sample covariance of the final residuals."""
        v = self.residuals.valid
        return v.T @ v / len(v)


def _process_rows(data, n_b, start):
    return np.hstack([lagged_regressor(data.p, data.u, m, start) for m in range(n_b + 1)])


def _noise_rows(p, eps, n_c, start):
    return np.hstack([lagged_regressor(p, eps, m, start) for m in range(1, n_c + 1)])


def build_regressor(data, prev_eps, orders, burn_in=0):
    """Process and noise regressors for every time with full history.

    Row blocks follow the string enumeration order, so the regression
    coefficients line up with :meth:`SubMarkovTable.to_matrix`.
    """
    n_b, n_c = orders
    start = max(n_b, n_c) + burn_in
    if data.N <= start:
        raise ValueError(f"{data.N} samples do not exceed history plus burn-in ({start})")
    phi_u = _process_rows(data, n_b, start)
    phi_eps = None
    if prev_eps is not None:
        eps = prev_eps.eps if isinstance(prev_eps, ResidualSeries) else np.asarray(prev_eps, dtype=float)
        if eps.shape != data.y.shape:
            raise ValueError(f"residuals of shape {eps.shape} do not match outputs {data.y.shape}")
        if n_c > 0:
            phi_eps = _noise_rows(data.p, eps, n_c, start)
        else:
            phi_eps = np.zeros((len(phi_u), 0))
    return Regressor(phi_u, phi_eps, np.arange(start, data.N))


def _penalty(n_proc, n_noise, lambda_proc, lambda_noise):
    return np.concatenate([np.full(n_proc, float(lambda_proc)), np.full(n_noise, float(lambda_noise))])


def _solve(gram, rhs, penalty, design=None, targets=None):
    if np.all(penalty > 0):
        factor = scipy.linalg.cho_factor(gram + np.diag(penalty))
        return scipy.linalg.cho_solve(factor, rhs)
    # some weights are zero: solve the augmented least-squares problem and check rank
    pos = penalty > 0
    aug = np.vstack([design, np.diag(np.sqrt(penalty))[pos]])
    rhs_aug = np.vstack([targets, np.zeros((pos.sum(), targets.shape[1]))])
    theta, _, rank, _ = np.linalg.lstsq(aug, rhs_aug, rcond=None)
    if rank < aug.shape[1]:
        raise RankDeficiencyError(rank, aug.shape[1])
    return theta


def ridge_solve(phi, targets, config, n_proc=None):
    """Ridge estimate, shape ``(n_cols, n_y)``.

    Minimises ``sum_t |y(t) - theta^T phi(t)|^2 + l1 |theta_proc|^2 + l2 |theta_noise|^2``
    where the first ``n_proc`` columns (default: all) are process parameters.
    """
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    targets = np.asarray(targets, dtype=float)
    if targets.ndim == 1:
        targets = targets[:, None]
    n_cols = phi.shape[1]
    n_proc = n_cols if n_proc is None else n_proc
    penalty = _penalty(n_proc, n_cols - n_proc, config.lambda_proc, config.lambda_noise)
    return _solve(phi.T @ phi, phi.T @ targets, penalty, phi, targets)


def required_excitation_order(n_u, n_p, n_b_hat):
    return n_u * sum((1 + n_p) ** i for i in range(1, n_b_hat + 2))


def _rank_and_condition(gram):
    sv = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
    top = sv.max() if sv.size else 0.0
    rank = int(np.sum(sv > top * PE_RTOL)) if top > 0 else 0
    cond = float(top / sv.min()) if sv.size and sv.min() > 0 else float("inf")
    return rank, cond


def excitation_order(data, n_b_hat):
    """Numerical rank and condition number of the lifted input's sample Gram matrix.

    The lifted input stacks ``p_eta(t) u(t - |eta| + 1)`` over every process
    string up to lag ``n_b_hat``; full rank means all process sub-Markov
    parameters are distinguishable.
    """
    phi = _process_rows(data, n_b_hat, n_b_hat)
    return _rank_and_condition(phi.T @ phi / len(phi))


def plr_fit(data, orders, config=None, init=None):
    """Estimate a MAX model by pseudo-linear regression.

    Without ``init`` the first iterate is an FIR least-squares fit with an
    identity noise filter. Later iterates rebuild the noise regressor from the
    previous residuals and refit everything. Stops when the relative parameter
    change drops below ``config.tol`` or after ``config.max_iters`` iterates.
    """
    config = config or PlrConfig()
    n_b, n_c = orders
    if n_b < 0 or n_c < 0:
        raise ValueError(f"orders must be nonnegative, got {orders}")
    start = max(n_b, n_c) + config.burn_in
    reg = build_regressor(data, None, orders, config.burn_in)
    phi_u = reg.phi_u
    Y = data.y[start:]
    n_proc = phi_u.shape[1]
    n_noise = data.n_y * sum((1 + data.n_p) ** (m + 1) for m in range(1, n_c + 1))
    uu = phi_u.T @ phi_u
    uy = phi_u.T @ Y
    pe_order, _ = _rank_and_condition(uu / len(phi_u))
    pe_required = required_excitation_order(data.n_u, data.n_p, n_b)
    if pe_order < pe_required:
        log.warning("lifted input excites order %d of %d required", pe_order, pe_required)

    def to_model(theta):
        return MaxModel.from_theta(theta.T, data.n_u, data.n_p, orders)

    def fit_residuals(model, iteration):
        try:
            return residuals(model, data, start)
        except FilterDivergedError as exc:
            raise FilterDivergedError(exc.index, iteration) from exc

    if init is None:
        penalty = _penalty(n_proc, 0, config.lambda_proc, 0)
        theta_u = _solve(uu, uy, penalty, phi_u, Y)
        theta = np.vstack([theta_u, np.zeros((n_noise, data.n_y))])
        gram = uu + np.diag(penalty)
    else:
        if init.orders != tuple(orders):
            raise ValueError(f"initial model has orders {init.orders}, expected {tuple(orders)}")
        theta = init.theta.T
        gram = None
    model = to_model(theta)
    res = fit_residuals(model, 0)
    losses = [loss(res)]
    converged = n_c == 0 and init is None

    penalty = _penalty(n_proc, n_noise, config.lambda_proc, config.lambda_noise)
    for it in range(1, config.max_iters):
        if converged:
            break
        phi_e = _noise_rows(data.p, res.eps, n_c, start) if n_c else np.zeros((len(Y), 0))
        ue = phi_u.T @ phi_e
        gram = np.block([[uu, ue], [ue.T, phi_e.T @ phi_e]])
        rhs = np.vstack([uy, phi_e.T @ Y])
        design = np.hstack([phi_u, phi_e]) if not np.all(penalty > 0) else None
        new_theta = _solve(gram, rhs, penalty, design, Y)
        model = to_model(new_theta)
        res = fit_residuals(model, it)
        losses.append(loss(res))
        change = np.linalg.norm(new_theta - theta) / max(np.linalg.norm(theta), np.finfo(float).tiny)
        theta = new_theta
        gram = gram + np.diag(penalty)
        log.debug("PLR iteration %d: V_N=%.6g, change=%.3g", it, losses[-1], change)
        if change < config.tol:
            converged = True

    _, cond = _rank_and_condition(gram) if gram is not None else (0, float("nan"))
    return EstimationReport(
        model=model,
        loss_per_iter=losses,
        iterations_used=len(losses),
        converged=converged,
        pe_order=pe_order,
        pe_required=pe_required,
        condition_number=cond,
        residuals=res,
        config=config,
    )


def random_max_model(n_u, n_y, n_p, orders, rng, scale=0.1):
    """MAX model with Gaussian sub-Markov parameters (multi-start initial guesses)."""
    n_b, n_c = orders
    proc = SubMarkovTable.zeros(n_p, n_y, n_u, n_b)
    noise = SubMarkovTable.zeros(n_p, n_y, n_y, n_c, monic=True)
    proc = SubMarkovTable.from_matrix(scale * rng.standard_normal((n_y, proc.n_params)), n_p, n_u, n_b)
    noise = SubMarkovTable.from_matrix(scale * rng.standard_normal((n_y, noise.n_params)), n_p, n_y, n_c, monic=True)
    return MaxModel(proc, noise)
