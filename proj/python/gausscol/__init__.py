"""Legendre-Gauss orthogonal collocation for unconstrained Mayer-form optimal control."""

from ._core import (
    ProblemError,
    builtin_names,
    check_p1,
    check_p2,
    diff_matrices,
    flip_deviation,
    gauss_rule,
    legendre_eval,
    solve,
    sweep,
)

__all__ = [
    "ProblemError",
    "builtin_names",
    "check_p1",
    "check_p2",
    "diff_matrices",
    "flip_deviation",
    "gauss_rule",
    "legendre_eval",
    "solve",
    "sweep",
]
