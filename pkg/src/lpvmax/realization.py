"""Ho-Kalman realization of LPV-SS models from sub-Markov tables.

The noise enters as an extra input, ``B~_i = [B_i K_i]``. A Hankel matrix is
filled with entries of ``C_r A... B~_c`` indexed by a row basis (a string
whose first character picks ``C``, plus an output channel) and a column basis
(a string whose last character picks ``B~``, plus a part and an input
channel). Factoring ``H = O R`` by SVD gives the extended observability and
reachability matrices, from which

    A_i = O^+ H^(i) R^+,   C_i = H_C(i) R^+,   [B_i K_i] = O^+ H_B(i),

where ``H^(i)`` inserts the character ``i`` between row and column strings.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import CoverageError, RankDeficiencyError
from .markov import NOISE, PROCESS, sub_markov_from_ss
from .model import LpvSsModel
from .strings import concat, format_string, strings_of_length

log = logging.getLogger(__name__)

RANK_RTOL = 1e-10

# Benchmark bases from the basis-reduced experiment, as
# (output channel, C index, A string) rows and (A string, B index, input channel) columns.
BENCHMARK_ROW_TRIPLES = (
    (1, 0, ()), (2, 0, ()), (1, 0, (0,)), (2, 0, (0,)),
    (1, 0, (1,)), (2, 0, (1,)), (1, 0, (2,)), (2, 0, (2,)),
)
BENCHMARK_COL_TRIPLES = (
    ((), 0, 1), ((), 0, 2), ((), 1, 1), ((0,), 0, 1), ((0,), 0, 2),
    ((1,), 0, 1), ((1,), 0, 2), ((2,), 0, 1), ((2,), 0, 2), ((1,), 1, 1),
)


@dataclass(frozen=True)
class HankelSpec:
    """Row and column bases of the Hankel matrix.

    ``rows`` holds ``(string, output_channel)`` pairs and ``cols`` holds
    ``(string, part, input_channel)`` triples with ``part`` either
    ``"process"`` or ``"noise"``. Channels are 0-based. ``n_x_target=None``
    picks the state dimension at the largest singular-value gap.
    """

    rows: tuple
    cols: tuple
    n_x_target: int | None = None

    def __post_init__(self):
        rows = tuple((tuple(s), int(ch)) for s, ch in self.rows)
        cols = tuple((tuple(s), part, int(ch)) for s, part, ch in self.cols)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        if not rows or not cols:
            raise ValueError("row and column bases must be non-empty")
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            raise ValueError("duplicate basis elements")
        if any(len(s) == 0 for s, _ in rows) or any(len(s) == 0 for s, _, _ in cols):
            raise ValueError("basis strings need at least one character")
        if any(part not in (PROCESS, NOISE) for _, part, _ in cols):
            raise ValueError("column part must be 'process' or 'noise'")
        if self.n_x_target is not None and self.n_x_target < 1:
            raise ValueError("n_x_target must be positive")

    @classmethod
    def full(cls, row_strings, col_strings, n_u, n_y, n_x_target=None, parts=(PROCESS, NOISE)):
        """Block basis: every output channel per row string, every input channel per column string."""
        rows = [(s, ch) for s in row_strings for ch in range(n_y)]
        cols = []
        for s in col_strings:
            for part in parts:
                width = n_u if part == PROCESS else n_y
                cols.extend((s, part, ch) for ch in range(width))
        return cls(tuple(rows), tuple(cols), n_x_target)

    @classmethod
    def from_triples(cls, row_triples, col_triples, n_x_target=None):
        """Scalar basis from ``(out_ch, c_idx, a_string)`` and ``(a_string, b_idx, in_ch)`` triples.

        Channels are 1-based here; all columns use the process input.
        """
        rows = tuple(((c,) + tuple(a), ch - 1) for ch, c, a in row_triples)
        cols = tuple((tuple(a) + (b,), PROCESS, ch - 1) for a, b, ch in col_triples)
        return cls(rows, cols, n_x_target)

    @property
    def row_strings(self):
        return tuple(dict.fromkeys(s for s, _ in self.rows))

    @property
    def col_strings(self):
        return tuple(dict.fromkeys(s for s, _, _ in self.cols))

    @property
    def shape(self):
        return (len(self.rows), len(self.cols))


def default_hankel_spec(n_p, n_u, n_y, orders=None, depth=2, n_x_target=None):
    """All strings of length ``1..depth`` on both sides.

    Noise columns join the factored basis only when the noise table reaches
    lag ``2 * depth`` (needed by the shifted Hankels); otherwise the state
    basis comes from the process part alone and ``K`` is read off afterwards.
    """
    strings = [s for length in range(1, depth + 1) for s in strings_of_length(n_p, length)]
    parts = (PROCESS, NOISE)
    if orders is not None:
        n_b, n_c = orders
        if n_b < 2 * depth:
            raise ValueError(f"process order {n_b} cannot fill a depth-{depth} shifted Hankel")
        if n_c < 2 * depth:
            parts = (PROCESS,)
    return HankelSpec.full(strings, strings, n_u, n_y, n_x_target, parts)


@dataclass(frozen=True, eq=False)
class RealizedModel:
    model: LpvSsModel
    singular_values: np.ndarray
    n_x: int
    rank_gap: float
    deficient: bool


def _lookup(tables, eta, part, missing, zero_fill):
    table = tables[0] if part == PROCESS else tables[1]
    if len(eta) - 1 > table.order:
        missing.add(f"{part}:{format_string(eta, table.n_p)}")
        if not zero_fill:
            return None
    return table[eta]


def _fill(tables, row_items, col_items, zero_fill, mid=None):
    """Matrix with entry ``(r, c)`` from the string ``row · mid · col``."""
    missing = set()
    cache = {}
    H = np.zeros((len(row_items), len(col_items)))
    for r, (rs, rch) in enumerate(row_items):
        for c, (cs, part, cch) in enumerate(col_items):
            key = (rs, cs, part)
            if key not in cache:
                cache[key] = _lookup(tables, concat(rs, mid, cs), part, missing, zero_fill)
            block = cache[key]
            if block is not None:
                H[r, c] = block[rch, cch]
    if missing:
        if not zero_fill:
            raise CoverageError(sorted(missing))
        log.warning("zero-filling %d Hankel strings beyond the table orders", len(missing))
    return H


def build_hankel(tables, spec, shift=None, zero_fill=True):
    """Hankel matrix of ``tables = (process, noise)`` over the bases of ``spec``.

    With ``shift=i`` every entry uses ``row · i · col`` instead of ``row · col``.
    """
    return _fill(tables, spec.rows, spec.cols, zero_fill, shift)


def _select_order(s):
    if len(s) == 1 or s[0] == 0:
        return 1
    floor = s[0] * np.finfo(float).eps * len(s)
    ratios = np.maximum(s[:-1], floor) / np.maximum(s[1:], floor)
    return int(np.argmax(ratios)) + 1


def realize(tables, spec, strict=True, zero_fill=True, sigma_e=None):
    """Realize an LPV-SS model from ``tables = (process, noise)``.

    ``D_i`` is copied from the length-1 process entries. ``Sigma_e`` is not
    identifiable from the tables and defaults to the identity. With
    ``strict=False`` a rank-deficient Hankel returns a model flagged
    ``deficient`` instead of raising.
    """
    proc, noise = tables
    n_p, n_y, n_u = proc.n_p, proc.n_y, proc.n_in
    H = build_hankel(tables, spec, zero_fill=zero_fill)
    U, s, Vt = np.linalg.svd(H, full_matrices=False)
    n_x = spec.n_x_target or _select_order(s)
    if n_x > len(s):
        raise ValueError(f"n_x={n_x} exceeds Hankel rank bound {len(s)}")
    deficient = s[0] == 0 or s[n_x - 1] <= RANK_RTOL * s[0]
    if deficient and strict:
        achieved = int(np.sum(s > RANK_RTOL * s[0])) if s[0] > 0 else 0
        raise RankDeficiencyError(achieved, n_x, s)
    rank_gap = float(s[n_x - 1] / s[n_x]) if n_x < len(s) and s[n_x] > 0 else float("inf")

    keep = s[:n_x] > (RANK_RTOL * s[0] if s[0] > 0 else 0)
    inv_sqrt = np.where(keep, 1.0 / np.sqrt(np.where(keep, s[:n_x], 1.0)), 0.0)
    O_pinv = inv_sqrt[:, None] * U[:, :n_x].T
    R_pinv = Vt[:n_x].T * inv_sqrt[None, :]

    A, B, C, K = [], [], [], []
    for i in range(n_p + 1):
        A.append(O_pinv @ build_hankel(tables, spec, shift=i, zero_fill=zero_fill) @ R_pinv)
        c_rows = [((i,), ch) for ch in range(n_y)]
        C.append(_fill(tables, c_rows, spec.cols, zero_fill) @ R_pinv)
        b_cols = [((i,), PROCESS, ch) for ch in range(n_u)]
        B.append(O_pinv @ _fill(tables, spec.rows, b_cols, zero_fill))
        k_cols = [((i,), NOISE, ch) for ch in range(n_y)]
        K.append(O_pinv @ _fill(tables, spec.rows, k_cols, zero_fill))
    D = proc.lag_block(0)
    sigma_e = np.eye(n_y) if sigma_e is None else sigma_e
    model = LpvSsModel(np.array(A), np.array(B), np.array(C), D.copy(), np.array(K), sigma_e)
    return RealizedModel(model, s, n_x, rank_gap, bool(deficient))


def similarity_check(a, b, depth, tol=1e-6):
    """Compare two models through their sub-Markov tables up to string length ``depth``.

    Returns ``(isomorphic, max_deviation)``; the tables are invariant under
    state transformations, so equal tables mean the models are isomorphic.
    """
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch: {a.dims} vs {b.dims}")
    worst = 0.0
    for which in (PROCESS, NOISE):
        ta = sub_markov_from_ss(a, which, depth - 1)
        tb = sub_markov_from_ss(b, which, depth - 1)
        for xa, xb in zip(ta.blocks, tb.blocks):
            worst = max(worst, float(np.abs(xa - xb).max()))
    return worst < tol, worst
