"""Adaptive Simpson quadrature.

Deterministic recursive bisection with an absolute tolerance, used for every
generic (non-closed-form) integral in the library. Smooth log-concave
integrands converge quickly; the depth cap guards against pathological
callables.
"""

from __future__ import annotations

from typing import Callable


def _simpson(f: Callable[[float], float], a: float, fa: float, b: float,
             fb: float) -> tuple[float, float, float]:
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-12, max_depth: int = 48) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    ``a`` and ``b`` must be finite; clamp infinite endpoints before calling.
    """
    if not (a < b):
        if a == b:
            return 0.0
        raise ValueError(f"invalid interval [{a}, {b}]")
    fa, fb = f(a), f(b)
    m, fm, whole = _simpson(f, a, fa, b, fb)

    def recurse(a: float, fa: float, b: float, fb: float, m: float, fm: float,
                whole: float, tol: float, depth: int) -> float:
        lm, flm, left = _simpson(f, a, fa, m, fm)
        rm, frm, right = _simpson(f, m, fm, b, fb)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        half = 0.5 * tol
        return (recurse(a, fa, m, fm, lm, flm, left, half, depth + 1)
                + recurse(m, fm, b, fb, rm, frm, right, half, depth + 1))

    return recurse(a, fa, b, fb, m, fm, whole, tol, 0)
