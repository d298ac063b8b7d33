"""Coupling parameters of the exponentiated-field metric.

gamma in (0, 2] is the coupling constant, d_gamma > 2 the caller-supplied
fractal dimension of the target metric.  The grid weights use the distance
exponent xi = gamma / d_gamma; q = 2/gamma + gamma/2 is the coordinate-change
constant kept for statistical checks.
"""

from dataclasses import dataclass

from .errors import ParameterError

__all__ = ["LqgParams", "make_params"]


@dataclass(frozen=True)
class LqgParams:
    gamma: float
    d_gamma: float
    xi: float
    q: float


def make_params(gamma: float, d_gamma: float) -> LqgParams:
    """Validate (gamma, d_gamma) and derive xi and q.

    Raises ParameterError unless gamma in (0, 2] and d_gamma > 2.
    """
    if not (0.0 < gamma <= 2.0):
        raise ParameterError(f"gamma must lie in (0, 2], got {gamma}")
    if not d_gamma > 2.0:
        raise ParameterError(f"d_gamma must exceed 2, got {d_gamma}")
    return LqgParams(
        gamma=float(gamma),
        d_gamma=float(d_gamma),
        xi=float(gamma) / float(d_gamma),
        q=2.0 / float(gamma) + float(gamma) / 2.0,
    )
