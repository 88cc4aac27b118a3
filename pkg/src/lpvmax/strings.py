"""Index strings naming sub-Markov parameters and their scheduling products.

A string is a tuple of characters in ``0..n_p``. Character ``j`` (1-based)
selects the scheduling channel applied at lag ``j - 1``; channel 0 is the
constant 1. ``()`` is the empty string.

Sets of strings are always enumerated by length first and then
lexicographically, so a string set has the same layout as the Kronecker
product ``[1; p(t)] ⊗ [1; p(t-1)] ⊗ ...``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

EMPTY = ()


def check_string(eta, n_p):
    eta = tuple(int(c) for c in eta)
    for c in eta:
        if not 0 <= c <= n_p:
            raise ValueError(f"character {c} outside [0, {n_p}] in {eta}")
    return eta


@dataclass(frozen=True)
class StringSet:
    n_p: int
    min_len: int
    max_len: int
    strings: tuple = field(repr=False)

    def __len__(self):
        return len(self.strings)

    def __iter__(self):
        return iter(self.strings)

    def __getitem__(self, i):
        return self.strings[i]

    def __contains__(self, eta):
        return tuple(eta) in self._positions

    @cached_property
    def _positions(self):
        return {s: i for i, s in enumerate(self.strings)}

    def index(self, eta):
        return self._positions[tuple(eta)]


def strings_of_length(n_p, length):
    return list(itertools.product(range(n_p + 1), repeat=length))


def enumerate_strings(n_p, min_len, max_len):
    """All strings over ``{0..n_p}`` with ``min_len <= len <= max_len``.

    >>> [format_string(s) for s in enumerate_strings(1, 0, 2)]
    ['e', '0', '1', '00', '01', '10', '11']
    """
    if n_p < 0:
        raise ValueError(f"n_p must be >= 0, got {n_p}")
    if min_len < 0 or max_len < min_len:
        raise ValueError(f"invalid length bounds [{min_len}, {max_len}]")
    out = []
    for length in range(min_len, max_len + 1):
        out.extend(strings_of_length(n_p, length))
    return StringSet(n_p, min_len, max_len, tuple(out))


def concat(left, mid=None, right=(), n_p=None):
    """Concatenate ``left · mid · right``; ``mid`` is an optional single character."""
    parts = tuple(left) + (() if mid is None else (mid,)) + tuple(right)
    if n_p is not None:
        return check_string(parts, n_p)
    if any(c < 0 for c in parts):
        raise ValueError(f"negative character in {parts}")
    return tuple(int(c) for c in parts)


def _extended(p):
    p = np.asarray(p, dtype=float)
    if p.ndim == 1:
        p = p[:, None]
    return np.hstack([np.ones((p.shape[0], 1)), p])


def scheduling_product(eta, p, t):
    """Product of ``p_[eta]_j(t - j + 1)`` over the characters of ``eta``.

    ``p`` is an ``(N, n_p)`` array indexed by time. Channel 0 is constant 1.
    """
    if len(eta) == 0:
        raise ValueError("scheduling product of the empty string is undefined")
    p = np.asarray(p, dtype=float)
    if p.ndim == 1:
        p = p[:, None]
    n_p = p.shape[1]
    eta = check_string(eta, n_p)
    if t - (len(eta) - 1) < 0 or t >= p.shape[0]:
        raise IndexError(f"string of length {len(eta)} at t={t} leaves the trajectory")
    value = 1.0
    for lag, c in enumerate(eta):
        if c:
            value *= p[t - lag, c - 1]
    return value


def scheduling_lift(p, length):
    """Scheduling products of every string of ``length`` at every time.

    Returns an ``(N, (1 + n_p)**length)`` array whose row ``t`` is
    ``[1; p(t)] ⊗ [1; p(t-1)] ⊗ ... ⊗ [1; p(t-length+1)]``, i.e. the
    products for ``strings_of_length(n_p, length)`` in order. Rows with
    ``t < length - 1`` lack history and are zero.
    """
    pe = _extended(p)
    n = pe.shape[0]
    if length == 0:
        return np.ones((n, 1))
    w = pe.copy()
    for lag in range(1, length):
        shifted = np.zeros_like(pe)
        if lag < n:
            shifted[lag:] = pe[:-lag]
        w = (w[:, :, None] * shifted[:, None, :]).reshape(n, -1)
    return w


def format_string(eta, n_p=None):
    """Serialize a string: digits when the alphabet fits in 0-9, dashes otherwise."""
    if len(eta) == 0:
        return "e"
    wide = (n_p is not None and n_p > 9) or any(c > 9 for c in eta)
    if wide:
        return "-".join(str(c) for c in eta)
    return "".join(str(c) for c in eta)


def parse_string(text, n_p=None):
    text = text.strip()
    if text in ("e", "ε", ""):
        return ()
    if "-" in text or (n_p is not None and n_p > 9):
        eta = tuple(int(c) for c in text.split("-"))
    else:
        eta = tuple(int(c) for c in text)
    return eta if n_p is None else check_string(eta, n_p)
