"""Stable variable names shared by every model builder.

Box variables are ``c_x_3`` / ``l_y_2``; pair variables carry the ordered
pair, e.g. ``d_x_1_2`` or ``z_y_2_1`` (box 2 precedes box 1 along y).
"""

from __future__ import annotations


def c(axis: str, box: int) -> str:
    return f"c_{axis}_{box}"


def l(axis: str, box: int) -> str:  # noqa: E743
    return f"l_{axis}_{box}"


def d(axis: str, i: int, j: int) -> str:
    if i > j:
        i, j = j, i
    return f"d_{axis}_{i}_{j}"


def prec(family: str, axis: str, p: int, q: int) -> str:
    """Precedence-style binary ``family^axis_{p,q}`` (families ``u`` and ``z``)."""
    return f"{family}_{axis}_{p}_{q}"


def code(family: str, i: int, j: int, k: int) -> str:
    """Positional code bit ``k`` (1-based) of pair ``(i, j)``: ``v``, ``w``, ``y``."""
    return f"{family}_{i}_{j}_{k}"


def copy_c(axis: str, box: int, i: int, j: int, branch: int) -> str:
    return f"cc_{axis}_{box}_{i}_{j}_{branch}"


def copy_l(axis: str, box: int, i: int, j: int, branch: int) -> str:
    return f"lc_{axis}_{box}_{i}_{j}_{branch}"
