"""Lagrange multiplier weights for the correction integral.

For a linear part ``u' + alpha*u`` the multiplier is
``lambda(s, t) = -exp(alpha*(s - t))``, which satisfies
``1 + lambda(t, t) = 0`` and ``d lambda/ds = alpha * lambda``.  Together with
a zero initial value this kills the boundary term of the integrated-by-parts
correction, leaving only the integrand

    H(s, t) = dlambda/ds(s, t) * u(s) + lambda(s, t) * f(s, u(s)).

Custom multipliers are supported for experimentation; the caller must supply
the s-derivative analytically so that quadrature remains the only
discretization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

__all__ = [
    "Multiplier",
    "exp_multiplier",
    "custom_multiplier",
    "lambda_eval",
    "dlambda_ds_eval",
    "g_term",
    "h_integrand",
    "EXP_ARG_LIMIT",
]

# exp overflows to inf a little past 709; fail loudly before that so a stiff
# misconfiguration does not silently poison the iteration.
EXP_ARG_LIMIT = 700.0


@dataclass(frozen=True)
class Multiplier:
    kind: str  # "exponential" or "custom"
    alpha: Optional[float] = None
    lam: Optional[Callable[[float, float], float]] = None
    dlam: Optional[Callable[[float, float], float]] = None


def exp_multiplier(alpha: float) -> Multiplier:
    """Multiplier ``lambda(s,t) = -exp(alpha*(s-t))`` for ``u' + alpha*u``."""
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise ValueError(f"alpha must be finite, got {alpha!r}")
    return Multiplier(kind="exponential", alpha=alpha)


def custom_multiplier(
    lam: Callable[[float, float], float], dlam_ds: Callable[[float, float], float]
) -> Multiplier:
    """Wrap user-supplied ``lambda(s,t)`` and its analytic s-derivative."""
    return Multiplier(kind="custom", lam=lam, dlam=dlam_ds)


def lambda_eval(m: Multiplier, s: float, t: float) -> float:
    """Evaluate ``lambda(s, t)``; exactly -1 on the diagonal for the
    exponential kind."""
    if m.kind == "exponential":
        arg = m.alpha * (s - t)
        if abs(arg) > EXP_ARG_LIMIT:
            raise OverflowError(
                f"exp argument alpha*(s-t) = {arg} exceeds +-{EXP_ARG_LIMIT}"
            )
        return -math.exp(arg)
    return float(m.lam(s, t))


def dlambda_ds_eval(m: Multiplier, s: float, t: float) -> float:
    """Evaluate ``d lambda / ds``; equals ``alpha * lambda`` for the
    exponential kind."""
    if m.kind == "exponential":
        return m.alpha * lambda_eval(m, s, t)
    return float(m.dlam(s, t))


def g_term(m: Multiplier, u_at_t: float, u_at_a: float, t: float, a: float) -> float:
    """Boundary term ``(1 + lambda(t,t)) * u(t) - lambda(a,t) * u(a)``.

    For the exponential kind with ``u(a) = 0`` this is exactly 0.
    """
    return (1.0 + lambda_eval(m, t, t)) * u_at_t - lambda_eval(m, a, t) * u_at_a


def h_integrand(m: Multiplier, rhs_value: float, u_value: float, s: float, t: float) -> float:
    """Integrand ``dlambda/ds(s,t) * u + lambda(s,t) * f`` where
    ``rhs_value = f(s, u(s))``."""
    return dlambda_ds_eval(m, s, t) * u_value + lambda_eval(m, s, t) * rhs_value
