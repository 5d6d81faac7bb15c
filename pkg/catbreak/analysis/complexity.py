"""Closed-form confidence-query counts for each search method."""

from __future__ import annotations

import math

from catbreak.errors import CatbreakError


def fsgs_iteration_queries(n: int, m: int, t: int) -> int:
    """Queries FSGS spends in iteration ``t``: ``(N - t) * M * 2^t``."""
    return max(n - t, 0) * m * 2**t


def _require(params: dict[str, int], *names: str) -> None:
    for name in names:
        value = params.get(name)
        if value is None or value < 0 or (name != "t" and value < 1):
            raise CatbreakError("INVALID_ARG", f"{name} must be a positive integer, got {value}")


def complexity_formula(
    method: str,
    n: int | None = None,
    m: int | None = None,
    top_l: int | None = None,
    t: int | None = None,
    tau: int | None = None,
) -> int:
    """Query count for ``method`` over ``T`` iterations (``t``).

    fsgs: ``sum_{t=0}^{T} (N - t) M 2^t``; gradattack: ``T sum_{k=0}^{L} C(L, k) M^k``;
    ompgs: ``sum_{t=0}^{T} L 2^t``; feat-b: ``L M + T``; feat: ``(L M + tau) T``.
    """
    params = {"n": n, "m": m, "l": top_l, "t": t, "tau": tau}
    if method == "fsgs":
        _require(params, "n", "m", "t")
        return sum(fsgs_iteration_queries(n, m, i) for i in range(t + 1))
    if method == "gradattack":
        _require(params, "m", "l", "t")
        return t * sum(math.comb(top_l, k) * m**k for k in range(top_l + 1))
    if method == "ompgs":
        _require(params, "l", "t")
        return sum(top_l * 2**i for i in range(t + 1))
    if method == "feat-b":
        _require(params, "m", "l", "t")
        return top_l * m + t
    if method == "feat":
        _require(params, "m", "l", "t", "tau")
        return (top_l * m + tau) * t
    raise CatbreakError("INVALID_ARG", f"no closed form for method {method!r}")
