from __future__ import annotations

import math
from typing import Callable

from .errors import SolverError

FuncDeriv = Callable[[float], "tuple[float, float]"]


def expand_bracket(f: Callable[[float], float], lo: float, hi: float,
                   lo_limit: float = -math.inf, hi_limit: float = math.inf,
                   max_doublings: int = 200) -> tuple[float, float]:
    """Widen ``[lo, hi]`` until an increasing ``f`` changes sign on it."""
    step = hi - lo
    for _ in range(max_doublings):
        flo, fhi = f(lo), f(hi)
        if flo <= 0 <= fhi:
            return lo, hi
        if flo > 0:
            hi = lo
            lo = max(lo - step, lo_limit)
        else:
            lo = hi
            hi = min(hi + step, hi_limit)
        step *= 2.0
    raise SolverError("could not bracket the root", (lo, hi), max_doublings)


def newton_bisect(fd: FuncDeriv, lo: float, hi: float, tol: float,
                  x0: float | None = None, max_iter: int = 200,
                  xtol: float = 0.0) -> tuple[float, float, int]:
    """Root of an increasing function on a sign-changing bracket.

    ``fd(x)`` returns ``(f(x), f'(x))``. A Newton step is taken when it stays
    strictly inside the current bracket, otherwise the bracket is bisected.
    Stops once ``|f| < tol``. Returns ``(root, residual, iterations)``.
    """
    x = 0.5 * (lo + hi) if x0 is None or not lo <= x0 <= hi else x0
    best = (math.inf, x)
    for it in range(1, max_iter + 1):
        fx, dfx = fd(x)
        if abs(fx) < best[0]:
            best = (abs(fx), x)
        if abs(fx) < tol:
            return x, fx, it
        if fx > 0:
            hi = x
        else:
            lo = x
        if hi - lo <= xtol or hi - lo <= 4 * math.ulp(max(abs(lo), abs(hi), 1e-300)):
            # bracket collapsed to machine precision; the residual floor is here
            if best[0] < math.sqrt(tol):
                return best[1], best[0], it
            break
        step_ok = dfx > 0 and math.isfinite(dfx)
        x_new = x - fx / dfx if step_ok else math.nan
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        x = x_new
    raise SolverError(f"no convergence to |f| < {tol:g}, best |f| = {best[0]:.3g}",
                      (lo, hi), max_iter)
