"""Scalar optimal control problems with endpoint cost and endpoint constraint.

    minimize    E(x(-1), x(1))
    subject to  x' = f(x, u),   e(x(-1), x(1)) = 0

Problem authors supply f, E, e with analytic first and second partial
derivatives.  All dynamics callables must accept numpy arrays and broadcast.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, fields

import numpy as np

Fn2 = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class AnalyticSolution:
    x: Callable[[np.ndarray], np.ndarray]
    u: Callable[[np.ndarray], np.ndarray]
    lam: Callable[[np.ndarray], np.ndarray]
    xdot: Callable[[np.ndarray], np.ndarray]
    lamdot: Callable[[np.ndarray], np.ndarray]
    xa: float
    xb: float
    lam_a: float
    lam_b: float
    nu: float


@dataclass(frozen=True)
class OcpProblem:
    name: str
    f: Fn2
    f_x: Fn2
    f_u: Fn2
    f_xx: Fn2
    f_xu: Fn2
    f_uu: Fn2
    E: Fn2
    E_a: Fn2
    E_b: Fn2
    E_aa: Fn2
    E_ab: Fn2
    E_bb: Fn2
    e: Fn2
    e_a: Fn2
    e_b: Fn2
    e_aa: Fn2
    e_ab: Fn2
    e_bb: Fn2
    analytic: AnalyticSolution | None = None
    # box sampled by check_derivatives: (x range, u range, xa range, xb range)
    sample_box: tuple[tuple[float, float], ...] = ((-1.0, 2.0), (-1.0, 1.0), (-1.0, 2.0), (-1.0, 2.0))


@dataclass(frozen=True)
class HamiltonianEval:
    """Node-wise values of H = lam * f(x, u) and its derivatives."""

    H: np.ndarray
    H_x: np.ndarray
    H_u: np.ndarray
    H_lam: np.ndarray
    H_xx: np.ndarray
    H_xu: np.ndarray
    H_uu: np.ndarray
    H_lamx: np.ndarray
    H_lamu: np.ndarray


@dataclass(frozen=True)
class EndpointEval:
    """Endpoint Lagrangian Ebar = E + nu * e and its derivatives."""

    Ebar: float
    Ebar_a: float
    Ebar_b: float
    Ebar_nu: float
    Ebar_aa: float
    Ebar_ab: float
    Ebar_bb: float
    Ebar_anu: float
    Ebar_bnu: float
    Ebar_nunu: float = 0.0


def _arr(v, shape) -> np.ndarray:
    return np.broadcast_to(np.asarray(v, dtype=float), shape).astype(float)


def hamiltonian_eval(problem: OcpProblem, lam, x, u) -> HamiltonianEval:
    lam, x, u = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (lam, x, u)))
    shape = lam.shape
    f = _arr(problem.f(x, u), shape)
    fx = _arr(problem.f_x(x, u), shape)
    fu = _arr(problem.f_u(x, u), shape)
    return HamiltonianEval(
        H=lam * f,
        H_x=lam * fx,
        H_u=lam * fu,
        H_lam=f,
        H_xx=lam * _arr(problem.f_xx(x, u), shape),
        H_xu=lam * _arr(problem.f_xu(x, u), shape),
        H_uu=lam * _arr(problem.f_uu(x, u), shape),
        H_lamx=fx,
        H_lamu=fu,
    )


def endpoint_eval(problem: OcpProblem, nu: float, xa: float, xb: float) -> EndpointEval:
    p = problem
    return EndpointEval(
        Ebar=float(p.E(xa, xb) + nu * p.e(xa, xb)),
        Ebar_a=float(p.E_a(xa, xb) + nu * p.e_a(xa, xb)),
        Ebar_b=float(p.E_b(xa, xb) + nu * p.e_b(xa, xb)),
        Ebar_nu=float(p.e(xa, xb)),
        Ebar_aa=float(p.E_aa(xa, xb) + nu * p.e_aa(xa, xb)),
        Ebar_ab=float(p.E_ab(xa, xb) + nu * p.e_ab(xa, xb)),
        Ebar_bb=float(p.E_bb(xa, xb) + nu * p.e_bb(xa, xb)),
        Ebar_anu=float(p.e_a(xa, xb)),
        Ebar_bnu=float(p.e_b(xa, xb)),
    )


# ---------------------------------------------------------------------------
# finite-difference check of authored derivatives
# ---------------------------------------------------------------------------

# (derivative, function, argument index) where the argument index selects the
# variable the central difference is taken in (0 -> first arg, 1 -> second).
_DERIVATIVE_TABLE = (
    ("f_x", "f", 0),
    ("f_u", "f", 1),
    ("f_xx", "f_x", 0),
    ("f_xu", "f_x", 1),
    ("f_uu", "f_u", 1),
    ("E_a", "E", 0),
    ("E_b", "E", 1),
    ("E_aa", "E_a", 0),
    ("E_ab", "E_a", 1),
    ("E_bb", "E_b", 1),
    ("e_a", "e", 0),
    ("e_b", "e", 1),
    ("e_aa", "e_a", 0),
    ("e_ab", "e_a", 1),
    ("e_bb", "e_b", 1),
)


def check_derivatives(problem: OcpProblem, sample_box=None, n_points: int = 25, seed: int = 0) -> dict[str, float]:
    """Max relative central-difference error of every authored derivative.

    Errors are |analytic - fd| / max(1, |fd|) so derivatives that vanish are
    compared absolutely.  ``sample_box`` is ((x_lo, x_hi), (u_lo, u_hi),
    (xa_lo, xa_hi), (xb_lo, xb_hi)); defaults to the problem's own box.
    """
    if n_points < 10:
        raise ValueError("need at least 10 sample points")
    box = problem.sample_box if sample_box is None else sample_box
    rng = np.random.default_rng(seed)
    pts = [rng.uniform(lo, hi, n_points) for lo, hi in box]
    xu = (pts[0], pts[1])
    ab = (pts[2], pts[3])
    eps = np.finfo(float).eps ** (1.0 / 3.0)

    report = {}
    for name, base, arg in _DERIVATIVE_TABLE:
        args = xu if name.startswith("f") else ab
        F = getattr(problem, base)
        D = getattr(problem, name)
        worst = 0.0
        for k in range(n_points):
            z = [float(args[0][k]), float(args[1][k])]
            h = eps * max(1.0, abs(z[arg]))
            zp, zm = list(z), list(z)
            zp[arg] += h
            zm[arg] -= h
            fd = (float(F(*zp)) - float(F(*zm))) / (zp[arg] - zm[arg])
            err = abs(float(D(*z)) - fd) / max(1.0, abs(fd))
            worst = max(worst, err)
        report[name] = worst
    return report


# ---------------------------------------------------------------------------
# built-in test problems
# ---------------------------------------------------------------------------


def _const(c: float) -> Fn2:
    return lambda a, b: np.zeros(np.broadcast(np.asarray(a), np.asarray(b)).shape) + c


_zero = _const(0.0)
_one = _const(1.0)


def _tp1() -> OcpProblem:
    # x' = -x + u^2, minimize x(1), x(-1) = 1
    sol = AnalyticSolution(
        x=lambda t: np.exp(-(np.asarray(t) + 1.0)),
        u=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        lam=lambda t: np.exp(np.asarray(t) - 1.0),
        xdot=lambda t: -np.exp(-(np.asarray(t) + 1.0)),
        lamdot=lambda t: np.exp(np.asarray(t) - 1.0),
        xa=1.0,
        xb=math.exp(-2.0),
        lam_a=math.exp(-2.0),
        lam_b=1.0,
        nu=-math.exp(-2.0),
    )
    return OcpProblem(
        name="tp1",
        f=lambda x, u: -x + u**2,
        f_x=lambda x, u: -np.ones_like(x + u),
        f_u=lambda x, u: 2.0 * u + 0.0 * x,
        f_xx=_zero,
        f_xu=_zero,
        f_uu=_const(2.0),
        E=lambda a, b: b + 0.0 * a,
        E_a=_zero,
        E_b=_one,
        E_aa=_zero,
        E_ab=_zero,
        E_bb=_zero,
        e=lambda a, b: a - 1.0 + 0.0 * b,
        e_a=_one,
        e_b=_zero,
        e_aa=_zero,
        e_ab=_zero,
        e_bb=_zero,
        analytic=sol,
    )


def _tp2() -> OcpProblem:
    # x' = -x^3 + u^2, minimize x(1), x(-1) = 1
    s = lambda t: 3.0 + 2.0 * np.asarray(t, dtype=float)  # noqa: E731
    sol = AnalyticSolution(
        x=lambda t: s(t) ** -0.5,
        u=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        lam=lambda t: (s(t) / 5.0) ** 1.5,
        xdot=lambda t: -(s(t) ** -1.5),
        lamdot=lambda t: 3.0 * s(t) ** 0.5 / 5.0**1.5,
        xa=1.0,
        xb=5.0**-0.5,
        lam_a=5.0**-1.5,
        lam_b=1.0,
        nu=-(5.0**-1.5),
    )
    return OcpProblem(
        name="tp2",
        f=lambda x, u: -(x**3) + u**2,
        f_x=lambda x, u: -3.0 * x**2 + 0.0 * u,
        f_u=lambda x, u: 2.0 * u + 0.0 * x,
        f_xx=lambda x, u: -6.0 * x + 0.0 * u,
        f_xu=_zero,
        f_uu=_const(2.0),
        E=lambda a, b: b + 0.0 * a,
        E_a=_zero,
        E_b=_one,
        E_aa=_zero,
        E_ab=_zero,
        E_bb=_zero,
        e=lambda a, b: a - 1.0 + 0.0 * b,
        e_a=_one,
        e_b=_zero,
        e_aa=_zero,
        e_ab=_zero,
        e_bb=_zero,
        analytic=sol,
        sample_box=((0.2, 2.0), (-1.0, 1.0), (-1.0, 2.0), (-1.0, 2.0)),
    )


def _tp3() -> OcpProblem:
    # x' = -x + x u + u^2/2, minimize x(1) + x(1)^2/2, x(-1)^2 = 1.
    # H_u = 0 gives u = -x, so f_xu = 1 couples state and control along the
    # extremal.  Verified by self-convergence in N, not against a formula.
    return OcpProblem(
        name="tp3",
        f=lambda x, u: -x + x * u + 0.5 * u**2,
        f_x=lambda x, u: -1.0 + u + 0.0 * x,
        f_u=lambda x, u: x + u,
        f_xx=_zero,
        f_xu=_one,
        f_uu=_one,
        E=lambda a, b: b + 0.5 * b**2 + 0.0 * a,
        E_a=_zero,
        E_b=lambda a, b: 1.0 + b + 0.0 * a,
        E_aa=_zero,
        E_ab=_zero,
        E_bb=_one,
        e=lambda a, b: a**2 - 1.0 + 0.0 * b,
        e_a=lambda a, b: 2.0 * a + 0.0 * b,
        e_b=_zero,
        e_aa=_const(2.0),
        e_ab=_zero,
        e_bb=_zero,
    )


def zero_problem() -> OcpProblem:
    """f = E = e = 0: only the discretization skeleton survives in the Hessian."""
    return OcpProblem(
        name="zero",
        **{f.name: _zero for f in fields(OcpProblem) if f.name not in ("name", "analytic", "sample_box")},
    )


_BUILTINS: dict[str, Callable[[], OcpProblem]] = {"tp1": _tp1, "tp2": _tp2, "tp3": _tp3}


def builtin_problem(name: str) -> OcpProblem:
    try:
        return _BUILTINS[name.lower()]()
    except KeyError:
        raise LookupError(f"unknown problem {name!r}; choose from {sorted(_BUILTINS)}") from None


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)
