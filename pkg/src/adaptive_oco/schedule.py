"""Geometric covering intervals and the learning-rate grid.

Level ``k`` holds the intervals ``[i 2^k, (i+1) 2^k - 1]`` for ``i = 1, 2, ...``,
so level ``k`` tiles the rounds from ``2^k`` onward. Every round ``t`` lies in
exactly one interval per level ``k <= floor(log2 t)``. Intervals are generated
on the fly from the round index; no horizon is needed.
"""

from __future__ import annotations

from typing import NamedTuple

from .exceptions import InvalidArgumentError


class IntervalKey(NamedTuple):
    """Interval ``[i 2^k, (i+1) 2^k - 1]`` of level ``k``."""

    k: int
    i: int

    @property
    def r(self) -> int:
        return self.i << self.k

    @property
    def s(self) -> int:
        return ((self.i + 1) << self.k) - 1

    @property
    def length(self) -> int:
        return 1 << self.k

    def __contains__(self, t) -> bool:
        return self.r <= t <= self.s

    def __str__(self):
        return f"[{self.r},{self.s}]"


def _check_round(t):
    if int(t) != t or t < 1:
        raise InvalidArgumentError(f"round index must be a positive integer, got {t}")
    return int(t)


def intervals_starting_at(t) -> list[IntervalKey]:
    """Intervals opening at round ``t``, by increasing level."""
    t = _check_round(t)
    out = []
    k = 0
    while t % (1 << k) == 0:
        out.append(IntervalKey(k, t >> k))
        k += 1
    return out


def intervals_containing(t) -> list[IntervalKey]:
    """All intervals alive at round ``t``, by increasing level."""
    t = _check_round(t)
    return [IntervalKey(k, t >> k) for k in range(t.bit_length())]


def ceil_log2(n: int) -> int:
    """``ceil(log2 n)`` for a positive integer, computed exactly."""
    if n < 1:
        raise InvalidArgumentError(f"ceil_log2 needs n >= 1, got {n}")
    return (n - 1).bit_length()


def grid_size(n: int) -> int:
    """Number of learning rates for an interval of length ``n``: ``1 + ceil(log2(n) / 2)``."""
    return 1 + (ceil_log2(n) + 1) // 2


def learning_rate_grid(n, diameter, gradient_bound) -> list[float]:
    """Learning rates ``2^-i / (5 D G)`` for ``i = 0 .. ceil(log2(n) / 2)``.

    Listed in decreasing order; consecutive values differ by exactly a factor 2.
    """
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"interval length must be a positive integer, got {n}")
    if diameter <= 0 or gradient_bound <= 0:
        raise InvalidArgumentError("diameter and gradient bound must be positive")
    top = 1.0 / (5.0 * diameter * gradient_bound)
    return [top * 2.0**-i for i in range(grid_size(int(n)))]


def max_active_experts(t) -> int:
    """Upper bound ``(floor(log2 t) + 1)(1 + ceil(log2(t) / 2))`` on live experts of one family."""
    t = _check_round(t)
    return t.bit_length() * grid_size(t)


def partition_interval(p, q) -> tuple[list[IntervalKey], list[IntervalKey]]:
    """Split ``[p, q]`` into consecutive GC intervals with geometric decay on both sides.

    The greedy pass takes, from the current start ``x``, the longest GC interval
    beginning at ``x`` that ends by ``q``. Lengths then strictly grow (alignment
    bound), peak, and strictly shrink (end bound), with at most one repeat at
    the peak. The split point is the first interval of maximal level.

    Returns
    -------
    left : list of IntervalKey
        ``I_{-m}, ..., I_0``; each is at most half as long as its successor.
    right : list of IntervalKey
        ``I_1, ..., I_n``; from ``I_2`` on each is at most half its predecessor.
    """
    if int(p) != p or int(q) != q or p < 1:
        raise InvalidArgumentError(f"need integers 1 <= p <= q, got p={p}, q={q}")
    p, q = int(p), int(q)
    if p > q:
        raise InvalidArgumentError(f"need p <= q, got p={p}, q={q}")
    pieces = []
    x = p
    while x <= q:
        k = (x & -x).bit_length() - 1  # largest k with 2^k dividing x
        while x + (1 << k) - 1 > q:
            k -= 1
        pieces.append(IntervalKey(k, x >> k))
        x += 1 << k
    top = max(piece.k for piece in pieces)
    pivot = next(j for j, piece in enumerate(pieces) if piece.k == top)
    return pieces[: pivot + 1], pieces[pivot + 1 :]
