"""Sub-Markov parameters of LPV-SS models and truncated impulse responses.

A table stores one ``n_y x n_in`` matrix per index string. For the process
path the string ``(i, j, ..., k, l)`` of length ``m + 1`` holds
``C_i A_j ... A_k B_l`` (lag ``m``) and the length-1 strings hold ``D_i``.
Noise tables use ``K`` instead of ``B`` and are monic: the lag-0 coefficient
is the identity and is not stored.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import as_signal, simulate
from .strings import check_string, scheduling_lift, strings_of_length

PROCESS = "process"
NOISE = "noise"

_CHUNK = 8192


@dataclass(frozen=True, eq=False)
class SubMarkovTable:
    """Sub-Markov coefficients for lags ``first_lag..order``.

    ``blocks[k]`` has shape ``((1 + n_p)**(lag + 1), n_y, n_in)`` for
    ``lag = first_lag + k``, rows in string-enumeration order. Entries past
    ``order`` are implicitly zero.
    """

    n_p: int
    n_y: int
    n_in: int
    order: int
    monic: bool
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(np.asarray(b, dtype=float) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        expected = max(0, self.order - self.first_lag + 1)
        if len(blocks) != expected:
            raise ValueError(f"expected {expected} lag blocks, got {len(blocks)}")
        for k, b in enumerate(blocks):
            lag = self.first_lag + k
            shape = ((self.n_p + 1) ** (lag + 1), self.n_y, self.n_in)
            if b.shape != shape:
                raise ValueError(f"lag {lag} block has shape {b.shape}, expected {shape}")
            if not np.isfinite(b).all():
                raise ValueError(f"non-finite entries at lag {lag}")

    @property
    def first_lag(self):
        return 1 if self.monic else 0

    @property
    def lags(self):
        return range(self.first_lag, self.order + 1)

    @classmethod
    def zeros(cls, n_p, n_y, n_in, order, monic=False):
        first = 1 if monic else 0
        blocks = tuple(np.zeros(((n_p + 1) ** (m + 1), n_y, n_in)) for m in range(first, order + 1))
        return cls(n_p, n_y, n_in, order, monic, blocks)

    @classmethod
    def from_entries(cls, n_p, n_y, n_in, order, entries, monic=False):
        """Build from a ``{string: matrix}`` mapping; absent strings are zero."""
        table = cls.zeros(n_p, n_y, n_in, order, monic)
        blocks = [b.copy() for b in table.blocks]
        for eta, value in entries.items():
            eta = check_string(eta, n_p)
            lag = len(eta) - 1
            if lag < table.first_lag or lag > order:
                raise ValueError(f"string {eta} outside lags {table.first_lag}..{order}")
            blocks[lag - table.first_lag][_position(eta, n_p)] = value
        return cls(n_p, n_y, n_in, order, monic, tuple(blocks))

    def lag_block(self, m):
        """Coefficients of every string of length ``m + 1`` (zeros past ``order``)."""
        if self.monic and m == 0:
            out = np.zeros((self.n_p + 1, self.n_y, self.n_in))
            out[0] = np.eye(self.n_y)
            return out
        if m > self.order:
            return np.zeros(((self.n_p + 1) ** (m + 1), self.n_y, self.n_in))
        return self.blocks[m - self.first_lag]

    def __getitem__(self, eta):
        eta = check_string(eta, self.n_p)
        if len(eta) == 0:
            raise KeyError("the empty string names no sub-Markov parameter")
        return self.lag_block(len(eta) - 1)[_position(eta, self.n_p)]

    def entries(self):
        """Stored entries as an ordered ``{string: matrix}`` dict."""
        out = {}
        for m in self.lags:
            for eta, value in zip(strings_of_length(self.n_p, m + 1), self.lag_block(m)):
                out[eta] = value
        return out

    def lag_matrix(self, m):
        """Coefficients of lag ``m`` side by side, ``[g_eta1 g_eta2 ...]``."""
        b = self.lag_block(m)
        return b.transpose(1, 0, 2).reshape(self.n_y, -1)

    @property
    def n_params(self):
        """Free parameters per output row."""
        return sum((self.n_p + 1) ** (m + 1) for m in self.lags) * self.n_in

    def to_matrix(self):
        """All stored coefficients in regression layout, shape ``(n_y, n_params)``."""
        if not self.blocks:
            return np.zeros((self.n_y, 0))
        return np.hstack([self.lag_matrix(m) for m in self.lags])

    @classmethod
    def from_matrix(cls, theta, n_p, n_in, order, monic=False):
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        n_y = theta.shape[0]
        blocks, col = [], 0
        for m in range(1 if monic else 0, order + 1):
            s = (n_p + 1) ** (m + 1)
            chunk = theta[:, col:col + s * n_in]
            blocks.append(chunk.reshape(n_y, s, n_in).transpose(1, 0, 2))
            col += s * n_in
        if col != theta.shape[1]:
            raise ValueError(f"parameter matrix has {theta.shape[1]} columns, layout needs {col}")
        return cls(n_p, n_y, n_in, order, monic, tuple(blocks))

    def tail_norm(self):
        """Largest Frobenius norm among the coefficients at the truncation lag."""
        if self.order < self.first_lag:
            return 0.0
        return float(np.linalg.norm(self.lag_block(self.order), axis=(1, 2)).max())

    def truncated(self, order):
        """Same table cut (or zero-padded) to a different order."""
        blocks = tuple(self.lag_block(m) for m in range(self.first_lag, order + 1))
        return SubMarkovTable(self.n_p, self.n_y, self.n_in, order, self.monic, blocks)


def _position(eta, n_p):
    pos = 0
    for c in eta:
        pos = pos * (n_p + 1) + c
    return pos


def sub_markov_from_ss(model, which, order):
    """Sub-Markov table of ``model`` up to lag ``order``.

    ``which`` is ``"process"`` (ends in ``B``, lag 0 is ``D``) or ``"noise"``
    (ends in ``K``, monic).
    """
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    if which == PROCESS:
        last, monic = model.B, False
    elif which == NOISE:
        last, monic = model.K, True
    else:
        raise ValueError(f"which must be 'process' or 'noise', got {which!r}")

    blocks = [] if monic else [model.D.copy()]
    # chain[s] = C_i A_j ... A_k for strings of growing length
    chain = model.C
    for m in range(1, order + 1):
        blocks.append(np.einsum("sab,jbc->sjac", chain, last).reshape(-1, model.n_y, last.shape[2]))
        if m < order:
            chain = np.einsum("sab,jbc->sjac", chain, model.A).reshape(-1, model.n_y, model.n_x)
    return SubMarkovTable(model.n_p, model.n_y, last.shape[2], order, monic, tuple(blocks))


def _assignment_matrix(n_p, length):
    # row a, column c: is p~_c(t) nonzero when p(t) = unit vector on a (a = 0: p = 0)
    T = np.zeros((n_p + 1, n_p + 1))
    T[:, 0] = 1.0
    T[np.arange(1, n_p + 1), np.arange(1, n_p + 1)] = 1.0
    M = np.ones((1, 1))
    for _ in range(length):
        M = np.kron(M, T)
    return M


def oracle_lag_block(model, which, m):
    """All sub-Markov matrices of lag ``m`` obtained from impulse simulations only.

    For every elementary scheduling assignment (``p(t - k)`` zero or a unit
    vector) a unit impulse is applied at ``t = 0`` and ``y(m)`` is read off.
    The multilinear expansion then gives a square system in the string
    coefficients, one per assignment, which is solved directly.
    """
    n_p = model.n_p
    n_in = model.n_u if which == PROCESS else model.n_y
    if which == NOISE and m == 0:
        raise ValueError("the lag-0 noise coefficient is fixed to the identity")
    assignments = list(itertools.product(range(n_p + 1), repeat=m + 1))
    responses = np.empty((len(assignments), model.n_y, n_in))
    for r, assign in enumerate(assignments):
        p = np.zeros((m + 1, n_p))
        for k, a in enumerate(assign):
            if a:
                p[m - k, a - 1] = 1.0
        for j in range(n_in):
            u = np.zeros((m + 1, model.n_u))
            e = np.zeros((m + 1, model.n_y))
            if which == PROCESS:
                u[0, j] = 1.0
            else:
                e[0, j] = 1.0
            y, _ = simulate(model, u, p, e=e)
            responses[r, :, j] = y[m]
    M = _assignment_matrix(n_p, m + 1)
    if abs(np.linalg.det(M)) < 1e-12:
        raise RuntimeError("scheduling assignments do not separate the string coefficients")
    coeffs = np.linalg.solve(M, responses.reshape(len(assignments), -1))
    return coeffs.reshape(-1, model.n_y, n_in)


def impulse_oracle(model, which, eta):
    """Sub-Markov matrix for ``eta`` computed by impulse-response simulation."""
    eta = check_string(eta, model.n_p)
    if len(eta) < 1:
        raise ValueError("string must have at least one character")
    return oracle_lag_block(model, which, len(eta) - 1)[_position(eta, model.n_p)]


def oracle_table(model, which, order):
    monic = which == NOISE
    blocks = tuple(oracle_lag_block(model, which, m) for m in range(1 if monic else 0, order + 1))
    n_in = model.n_u if which == PROCESS else model.n_y
    return SubMarkovTable(model.n_p, model.n_y, n_in, order, monic, blocks)


def lagged_regressor(p, x, m, start=0, stop=None):
    """Rows ``kron(w(t), x(t - m))`` for ``start <= t < stop``.

    ``w(t)`` holds the scheduling products of all strings of length ``m + 1``.
    Rows without enough history (``t < m``) are zero.
    """
    p = as_signal(p)
    x = as_signal(x)
    n = len(x)
    stop = n if stop is None else stop
    lo = max(0, start - m)
    w = scheduling_lift(p[lo:stop], m + 1)[start - lo:]
    xs = np.zeros((stop - start, x.shape[1]))
    first = max(start, m)
    if first < stop:
        xs[first - start:] = x[first - m:stop - m]
    return (w[:, :, None] * xs[:, None, :]).reshape(stop - start, -1)


def apply_lag(coeff_matrix, p, x, m):
    """``sum_eta coeff_eta * p_eta(t) * x(t - m)`` for every ``t``, shape ``(N, n_y)``."""
    x = as_signal(x)
    n = len(x)
    out = np.zeros((n, coeff_matrix.shape[0]))
    for start in range(0, n, _CHUNK):
        stop = min(n, start + _CHUNK)
        out[start:stop] = lagged_regressor(p, x, m, start, stop) @ coeff_matrix.T
    return out


def filter_output(table, p, x):
    """Output of the (non-monic part of the) filter described by ``table`` driven by ``x``."""
    out = np.zeros((len(as_signal(x)), table.n_y))
    for m in table.lags:
        out += apply_lag(table.lag_matrix(m), p, x, m)
    return out


def fir_output(proc, noise, u, p, e):
    """Output of the truncated MAX system driven by ``u`` and ``e``.

    Rows before ``max(n_b, n_c)`` lack the full regressor history and are
    returned as NaN.
    """
    e = as_signal(e)
    n = len(e)
    start = max(proc.order, noise.order)
    if n <= start:
        raise IndexError(f"{n} samples do not cover the filter history of {start}")
    y = filter_output(proc, p, u) + filter_output(noise, p, e) + e
    y[:start] = np.nan
    return y


def count_parameters(kind, dims, orders):
    """Number of scalar parameters of the truncated MAX or ARX model.

    ``dims`` is ``(n_u, n_y, n_p)``; ``orders`` is ``(n_b, n_c)`` for
    ``kind="max"`` and ``(n_a, n_d)`` for ``kind="arx"``.
    """
    n_u, n_y, n_p = dims
    r = 1 + n_p
    if kind == "max":
        n_b, n_c = orders
        return n_y * (n_u * sum(r**i for i in range(1, n_b + 2)) + n_y * sum(r**j for j in range(2, n_c + 2)))
    if kind == "arx":
        n_a, n_d = orders
        return n_y * (n_u * sum(r ** (2 * i + 1) for i in range(n_a + 1)) + n_y * sum(r ** (2 * j) for j in range(1, n_d + 1)))
    raise ValueError(f"kind must be 'max' or 'arx', got {kind!r}")
