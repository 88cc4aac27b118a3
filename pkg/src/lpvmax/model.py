"""LPV state-space models in innovation form and their simulation.

    x(t+1) = A(p(t)) x(t) + B(p(t)) u(t) + K(p(t)) e(t)
    y(t)   = C(p(t)) x(t) + D(p(t)) u(t) + e(t)

Every coefficient is affine in the scheduling vector: ``A(p) = A_0 + sum_i A_i p_i``.
Signals are time-major arrays of shape ``(N, n)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import SimulationDivergedError


def _blocks(x, name):
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3:
        raise ValueError(f"{name} must be a stack of (n_p+1) matrices, got shape {x.shape}")
    return x


@dataclass(frozen=True, eq=False)
class LpvSsModel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    K: np.ndarray
    Sigma_e: np.ndarray

    def __post_init__(self):
        for name in "ABCDK":
            object.__setattr__(self, name, _blocks(getattr(self, name), name))
        sigma = np.atleast_2d(np.asarray(self.Sigma_e, dtype=float))
        object.__setattr__(self, "Sigma_e", sigma)

        n_blocks, n_x, _ = self.A.shape
        n_y = self.C.shape[1]
        n_u = self.B.shape[2]
        expected = {
            "A": (n_blocks, n_x, n_x),
            "B": (n_blocks, n_x, n_u),
            "C": (n_blocks, n_y, n_x),
            "D": (n_blocks, n_y, n_u),
            "K": (n_blocks, n_x, n_y),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        if sigma.shape != (n_y, n_y):
            raise ValueError(f"Sigma_e has shape {sigma.shape}, expected {(n_y, n_y)}")
        if not np.allclose(sigma, sigma.T):
            raise ValueError("Sigma_e must be symmetric")
        if np.linalg.eigvalsh(sigma).min() <= 0:
            raise ValueError("Sigma_e must be positive definite")

    @property
    def n_x(self):
        return self.A.shape[1]

    @property
    def n_u(self):
        return self.B.shape[2]

    @property
    def n_y(self):
        return self.C.shape[1]

    @property
    def n_p(self):
        return self.A.shape[0] - 1

    @property
    def dims(self):
        return (self.n_x, self.n_u, self.n_y, self.n_p)

    @property
    def B_tilde(self):
        """Process and noise input matrices side by side, ``[B_i K_i]``."""
        return np.concatenate([self.B, self.K], axis=2)

    def transformed(self, T):
        """Similarity transform ``x -> T x``; the input-output behaviour is unchanged."""
        T = np.asarray(T, dtype=float)
        Ti = np.linalg.inv(T)
        return LpvSsModel(
            A=T @ self.A @ Ti,
            B=T @ self.B,
            C=self.C @ Ti,
            D=self.D.copy(),
            K=T @ self.K,
            Sigma_e=self.Sigma_e.copy(),
        )

    def replace(self, **changes):
        fields = {name: getattr(self, name) for name in ("A", "B", "C", "D", "K", "Sigma_e")}
        fields.update(changes)
        return LpvSsModel(**fields)


@dataclass(frozen=True, eq=False)
class DataSet:
    u: np.ndarray
    p: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        for name in ("u", "p", "y"):
            x = np.asarray(getattr(self, name), dtype=float)
            if x.ndim == 1:
                x = x[:, None]
            object.__setattr__(self, name, x)
        lengths = {len(self.u), len(self.p), len(self.y)}
        if len(lengths) != 1:
            raise ValueError(f"u, p, y lengths differ: {len(self.u)}, {len(self.p)}, {len(self.y)}")
        if len(self.u) < 1:
            raise ValueError("empty data set")

    @property
    def N(self):
        return len(self.u)

    @property
    def n_u(self):
        return self.u.shape[1]

    @property
    def n_p(self):
        return self.p.shape[1]

    @property
    def n_y(self):
        return self.y.shape[1]

    def slice(self, start, stop=None):
        return DataSet(self.u[start:stop], self.p[start:stop], self.y[start:stop])


def as_signal(x):
    x = np.asarray(x, dtype=float)
    return x[:, None] if x.ndim == 1 else x


def extended_scheduling(p):
    p = as_signal(p)
    return np.hstack([np.ones((len(p), 1)), p])


def eval_coefficient(blocks, p_t):
    """``blocks[0] + sum_i blocks[i] * p_t[i-1]`` for one scheduling vector."""
    blocks = _blocks(blocks, "blocks")
    p_t = np.atleast_1d(np.asarray(p_t, dtype=float))
    if p_t.shape != (blocks.shape[0] - 1,):
        raise ValueError(f"scheduling vector has {p_t.size} entries, blocks expect {blocks.shape[0] - 1}")
    return blocks[0] + np.tensordot(p_t, blocks[1:], axes=1)


def eval_coefficients(blocks, p):
    """Vectorised :func:`eval_coefficient` over a trajectory, shape ``(N, rows, cols)``."""
    return np.einsum("tk,kij->tij", extended_scheduling(p), blocks)


def simulate(model, u, p, noise=None, x0=None, e=None):
    """Simulate the innovation-form model.

    ``noise`` is ``None`` (noise-free) or a ``numpy.random.Generator`` used to
    draw ``e(t) ~ N(0, Sigma_e)`` through the Cholesky factor of ``Sigma_e``.
    An explicit noise sequence can be passed as ``e`` instead. Returns
    ``(y, e)``.
    """
    u = as_signal(u)
    p = as_signal(p)
    n = len(u)
    if len(p) != n:
        raise ValueError(f"u and p lengths differ: {n} != {len(p)}")
    if u.shape[1] != model.n_u or p.shape[1] != model.n_p:
        raise ValueError(f"signal widths ({u.shape[1]}, {p.shape[1]}) do not match model "
                         f"(n_u={model.n_u}, n_p={model.n_p})")
    if e is not None:
        e = np.asarray(e, dtype=float).reshape(n, model.n_y)
    elif noise is not None:
        L = np.linalg.cholesky(model.Sigma_e)
        e = noise.standard_normal((n, model.n_y)) @ L.T
    else:
        e = np.zeros((n, model.n_y))
    x = np.zeros(model.n_x) if x0 is None else np.asarray(x0, dtype=float).reshape(model.n_x)

    A = eval_coefficients(model.A, p)
    C = eval_coefficients(model.C, p)
    drive = np.einsum("tij,tj->ti", eval_coefficients(model.B, p), u)
    drive += np.einsum("tij,tj->ti", eval_coefficients(model.K, p), e)
    y = np.einsum("tij,tj->ti", eval_coefficients(model.D, p), u) + e

    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(n):
            y[t] += C[t] @ x
            x = A[t] @ x + drive[t]
    finite = np.isfinite(y).all(axis=1)
    if not finite.all():
        raise SimulationDivergedError(int(np.argmin(finite)))
    return y, e


def vertex_spectral_radius(A):
    """Largest spectral radius of ``A(p)`` over the vertices of ``[-1, 1]^n_p``."""
    A = _blocks(A, "A")
    n_p = A.shape[0] - 1
    worst = 0.0
    for vertex in itertools.product((-1.0, 1.0), repeat=n_p):
        Ap = eval_coefficient(A, np.array(vertex))
        worst = max(worst, np.abs(np.linalg.eigvals(Ap)).max())
    return worst


def random_stable_model(dims, seed, spectral_margin=0.5, noise_gain=0.3, noise_std=1.0):
    """Random LPV model whose vertex spectral radius is ``spectral_margin``.

    ``dims`` is ``(n_x, n_u, n_y, n_p)``. The ``A`` blocks are rescaled
    jointly, which scales every vertex spectrum by the same factor. ``K`` is
    drawn at unit variance and multiplied by ``noise_gain``.
    """
    n_x, n_u, n_y, n_p = dims
    if min(dims) < 1:
        raise ValueError(f"all dimensions must be >= 1, got {dims}")
    if not 0 < spectral_margin < 1:
        raise ValueError(f"spectral_margin must be in (0, 1), got {spectral_margin}")
    rng = np.random.default_rng(seed)
    m = n_p + 1
    A = rng.standard_normal((m, n_x, n_x))
    B = rng.standard_normal((m, n_x, n_u))
    C = rng.standard_normal((m, n_y, n_x))
    D = rng.standard_normal((m, n_y, n_u))
    K = noise_gain * rng.standard_normal((m, n_x, n_y))
    rho = vertex_spectral_radius(A)
    if rho > 0:
        A *= spectral_margin / rho
    return LpvSsModel(A, B, C, D, K, noise_std**2 * np.eye(n_y))


def random_fir_model(dims, seed, scale=0.5, noise_gain=0.3, noise_std=1.0):
    """Random model with strictly upper-triangular ``A`` blocks.

    Any product of ``n_x`` such blocks vanishes, so every sub-Markov parameter
    beyond lag ``n_x`` is exactly zero: the impulse response is a finite MAX
    of order ``n_x`` for both the process and the noise path.
    """
    n_x, n_u, n_y, n_p = dims
    rng = np.random.default_rng(seed)
    m = n_p + 1
    A = scale * np.triu(rng.standard_normal((m, n_x, n_x)), k=1)
    B = rng.standard_normal((m, n_x, n_u))
    C = rng.standard_normal((m, n_y, n_x))
    D = rng.standard_normal((m, n_y, n_u))
    K = noise_gain * rng.standard_normal((m, n_x, n_y))
    return LpvSsModel(A, B, C, D, K, noise_std**2 * np.eye(n_y))


# Constant noise gain of the n_x = n_y = 2 benchmark.
BENCHMARK_K = np.array([[0.32, 0.16], [0.64, 0.24]])
