"""Orthant-wise limited-memory quasi-Newton minimization.

Minimizes  f(x) + l1*||x||_1  for smooth f, keeping iterates inside the
orthant chosen at each step so coordinates can land exactly on zero.
With l1 = 0 this reduces to plain L-BFGS with a backtracking line search.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class OptimResult:
    x: np.ndarray
    value: float              # full objective including the L1 term
    n_iter: int
    converged: bool
    history: list[float] = field(default_factory=list)


def _pseudo_gradient(x: np.ndarray, grad: np.ndarray, l1: float) -> np.ndarray:
    if l1 == 0.0:
        return grad.copy()
    pg = np.zeros_like(grad)
    nonzero = x != 0.0
    pg[nonzero] = grad[nonzero] + l1 * np.sign(x[nonzero])
    at_zero = ~nonzero
    right = grad + l1
    left = grad - l1
    pg[at_zero & (right < 0)] = right[at_zero & (right < 0)]
    pg[at_zero & (left > 0)] = left[at_zero & (left > 0)]
    return pg


def minimize_owlqn(fun, x0: np.ndarray, l1: float = 0.0, max_iter: int = 300,
                   ftol: float = 1e-6, memory: int = 10,
                   track_history: bool = False) -> OptimResult:
    """fun(x) must return (smooth value, smooth gradient)."""
    x = np.asarray(x0, dtype=float).copy()
    f, g = fun(x)
    full = f + l1 * np.abs(x).sum()
    history = [full] if track_history else []

    s_list: list[np.ndarray] = []
    y_list: list[np.ndarray] = []
    rho_list: list[float] = []
    converged = False
    it = 0

    for it in range(1, max_iter + 1):
        pg = _pseudo_gradient(x, g, l1)
        pg_norm = np.linalg.norm(pg)
        if pg_norm < 1e-10:
            converged = True
            break

        # Two-loop recursion on the pseudo-gradient.
        d = -pg
        alphas = []
        for s, y, rho in zip(reversed(s_list), reversed(y_list), reversed(rho_list)):
            a = rho * (s @ d)
            alphas.append(a)
            d -= a * y
        if y_list:
            y_last = y_list[-1]
            d *= (s_list[-1] @ y_last) / (y_last @ y_last)
        for (s, y, rho), a in zip(zip(s_list, y_list, rho_list), reversed(alphas)):
            d += (a - rho * (y @ d)) * s

        if l1 > 0.0:
            # Constrain the direction to the descent orthant of -pg.
            d[d * pg > 0.0] = 0.0
            orthant = np.where(x != 0.0, np.sign(x), -np.sign(pg))
        if (d @ pg) >= 0.0:   # not a descent direction; restart from steepest
            d = -pg
            s_list, y_list, rho_list = [], [], []

        step = 1.0 if s_list else min(1.0, 1.0 / pg_norm)
        accepted = False
        for _ in range(50):
            x_new = x + step * d
            if l1 > 0.0:
                x_new[x_new * orthant < 0.0] = 0.0
            f_new, g_new = fun(x_new)
            full_new = f_new + l1 * np.abs(x_new).sum()
            if full_new <= full + 1e-4 * (pg @ (x_new - x)):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break

        s = x_new - x
        y = g_new - g
        sy = s @ y
        if sy > 1e-10:
            s_list.append(s)
            y_list.append(y)
            rho_list.append(1.0 / sy)
            if len(s_list) > memory:
                s_list.pop(0)
                y_list.pop(0)
                rho_list.pop(0)

        x, f, g = x_new, f_new, g_new
        prev_full, full = full, full_new
        if track_history:
            history.append(full)
        if abs(prev_full - full) / max(abs(prev_full), abs(full), 1.0) < ftol:
            converged = True
            break

    return OptimResult(x=x, value=full, n_iter=it, converged=converged, history=history)
