"""One-step-ahead prediction with LPV-MAX models.

The model is ``y = B(theta, p, q^-1) u + C(theta, p, q^-1) eps`` with a monic
noise filter, so the prediction error follows from the recursion

    eps(t) = y(t) - sum_{m=0}^{n_b} B_m(p, t) u(t-m) - sum_{m=1}^{n_c} C_m(p, t) eps(t-m)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FilterDivergedError
from .markov import NOISE, PROCESS, SubMarkovTable, filter_output, sub_markov_from_ss
from .model import as_signal
from .strings import scheduling_lift


@dataclass(frozen=True, eq=False)
class MaxModel:
    proc: SubMarkovTable
    noise: SubMarkovTable

    def __post_init__(self):
        if self.proc.monic:
            raise ValueError("process table must not be monic")
        if not self.noise.monic:
            raise ValueError("noise table must be monic")
        if self.proc.n_p != self.noise.n_p or self.proc.n_y != self.noise.n_y:
            raise ValueError("process and noise tables disagree on n_p or n_y")
        if self.noise.n_in != self.noise.n_y:
            raise ValueError("noise table must be square")

    @classmethod
    def from_ss(cls, model, n_b, n_c):
        """Truncated MAX representation of an LPV-SS model."""
        return cls(sub_markov_from_ss(model, PROCESS, n_b), sub_markov_from_ss(model, NOISE, n_c))

    @classmethod
    def from_theta(cls, theta, n_u, n_p, orders):
        """Inverse of :attr:`theta` for the given dimensions and orders."""
        n_b, n_c = orders
        theta = np.atleast_2d(theta)
        n_y = theta.shape[0]
        split = sum((n_p + 1) ** (m + 1) for m in range(n_b + 1)) * n_u
        proc = SubMarkovTable.from_matrix(theta[:, :split], n_p, n_u, n_b)
        noise = SubMarkovTable.from_matrix(theta[:, split:], n_p, n_y, n_c, monic=True)
        return cls(proc, noise)

    @property
    def orders(self):
        return (self.proc.order, self.noise.order)

    @property
    def n_u(self):
        return self.proc.n_in

    @property
    def n_y(self):
        return self.proc.n_y

    @property
    def n_p(self):
        return self.proc.n_p

    @property
    def valid_from(self):
        return max(self.orders)

    @property
    def theta(self):
        """Parameters in regression layout: ``(n_y, n_proc + n_noise)``."""
        return np.hstack([self.proc.to_matrix(), self.noise.to_matrix()])


@dataclass(frozen=True, eq=False)
class ResidualSeries:
    eps: np.ndarray
    valid_from: int

    @property
    def valid(self):
        return self.eps[self.valid_from:]

    @property
    def n_valid(self):
        return len(self.eps) - self.valid_from


def noise_coefficients(noise, p, m):
    """``C_m(p, t)`` for every ``t``, shape ``(N, n_y, n_y)``; zero where history is short."""
    w = scheduling_lift(p, m + 1)
    return np.einsum("ts,sij->tij", w, noise.lag_block(m))


def residuals(model, data, start=None):
    """Prediction errors of ``model`` on ``data``.

    Residuals before ``valid_from`` (default ``max(n_b, n_c)``) are zero and
    serve as the filter's initial condition.
    """
    t0 = model.valid_from if start is None else max(start, model.valid_from)
    if data.N <= t0:
        raise ValueError(f"{data.N} samples do not exceed the regressor history {t0}")
    if (data.n_u, data.n_y, data.n_p) != (model.n_u, model.n_y, model.n_p):
        raise ValueError("data and model dimensions disagree")
    r = data.y - filter_output(model.proc, data.p, data.u)
    eps = np.zeros_like(r)
    n_c = model.noise.order
    if n_c == 0:
        eps[t0:] = r[t0:]
    else:
        # stack C_1 .. C_nc so that eps(t) = r(t) - Cs(t) @ [eps(t-1); ...; eps(t-nc)]
        Cs = np.concatenate([noise_coefficients(model.noise, data.p, m) for m in range(1, n_c + 1)], axis=2)
        hist = np.zeros(n_c * model.n_y)
        ny = model.n_y
        with np.errstate(over="ignore", invalid="ignore"):
            for t in range(t0, data.N):
                cur = r[t] - Cs[t] @ hist
                eps[t] = cur
                hist[ny:] = hist[:-ny]
                hist[:ny] = cur
    finite = np.isfinite(eps).all(axis=1)
    if not finite.all():
        raise FilterDivergedError(int(np.argmin(finite)))
    return ResidualSeries(eps, t0)


def predict(model, data, start=None):
    """One-step-ahead predictions ``y - eps``; rows before ``valid_from`` are NaN."""
    res = residuals(model, data, start)
    yhat = data.y - res.eps
    yhat[:res.valid_from] = np.nan
    return yhat, res


def gamma_coefficients(model, p, t, depth):
    """Coefficients ``Gamma_0 .. Gamma_depth`` of the inverse noise filter at time ``t``.

    ``Gamma_0 = I`` and ``Gamma_i = -sum_k Gamma_{i-k}(t) C_k(t - i + k)``.
    """
    p = as_signal(p)
    if t - depth < 0 or t >= len(p):
        raise IndexError(f"depth {depth} at t={t} leaves the trajectory")
    noise = model.noise
    n_c = noise.order

    def c_at(k, s):
        w = scheduling_lift(p[s - k:s + 1], k + 1)[-1]
        return np.tensordot(w, noise.lag_block(k), axes=1)

    gammas = [np.eye(noise.n_y)]
    for i in range(1, depth + 1):
        g = np.zeros((noise.n_y, noise.n_y))
        for k in range(1, min(i, n_c) + 1):
            g -= gammas[i - k] @ c_at(k, t - i + k)
        gammas.append(g)
    return gammas


def loss(res):
    """Trace of the sample second moment of the valid residuals."""
    valid = res.valid
    if len(valid) == 0:
        raise ValueError("no valid residuals")
    return float(np.einsum("ti,ti->", valid, valid) / len(valid))


def residual_autocorr(res, max_lag):
    """Sample averages ``(1/N) sum_t eps(t-k) eps(t)^T`` for ``k = 0..max_lag``."""
    valid = res.valid
    n = len(valid)
    if max_lag >= n:
        raise ValueError(f"max_lag {max_lag} needs more than {n} valid residuals")
    return [valid[:n - k].T @ valid[k:] / n for k in range(max_lag + 1)]
