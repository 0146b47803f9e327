"""Damped Newton iteration on F(chi) = 0."""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .birkhoff import BirkhoffOperators, build_operators
from .grid import Grid
from .kkt import DecisionVector, KktMatrix, assemble, matvec, residual, system_size, to_dense
from .model import OcpProblem, hamiltonian_eval

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """Linear solve failed inside the Newton loop."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message if iteration is None else f"iteration {iteration}: {message}")
        self.iteration = iteration


class KrylovError(SolverError):
    def __init__(self, message: str, achieved: float):
        super().__init__(message)
        self.achieved = achieved


class LinearPath(str, enum.Enum):
    DENSE_LU = "dense_lu"
    STRUCTURED_KRYLOV = "krylov"


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 50
    tol: float = 1e-10
    linear_path: LinearPath = LinearPath.DENSE_LU
    armijo_c: float = 1e-4
    armijo_shrink: float = 0.5
    min_step: float = 1e-12
    krylov_tol: float = 1e-12
    krylov_restart: int = 50
    fast_matvec: bool = False

    def __post_init__(self):
        object.__setattr__(self, "linear_path", LinearPath(self.linear_path))
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not 0.0 < self.armijo_shrink < 1.0:
            raise ValueError("armijo_shrink must lie in (0, 1)")
        if self.max_iter < 0 or self.tol <= 0:
            raise ValueError("max_iter must be >= 0 and tol > 0")


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    residual_history: list[float]
    chi_star: DecisionVector
    tau: np.ndarray
    step_lengths: list[float] = field(default_factory=list)
    message: str = ""

    @property
    def x(self) -> np.ndarray:
        return self.chi_star.X

    @property
    def u(self) -> np.ndarray:
        return self.chi_star.U

    @property
    def lam(self) -> np.ndarray:
        return self.chi_star.Lam

    @property
    def v(self) -> np.ndarray:
        return self.chi_star.V

    @property
    def omega(self) -> np.ndarray:
        return self.chi_star.Omega

    def extracted(self) -> dict:
        c = self.chi_star
        return {
            "tau": self.tau.tolist(),
            "x": c.X.tolist(),
            "u": c.U.tolist(),
            "lam": c.Lam.tolist(),
            "v": c.V.tolist(),
            "omega": c.Omega.tolist(),
            "xa": c.xa,
            "xb": c.xb,
            "lam_a": c.lam_a,
            "lam_b": c.lam_b,
            "nu": c.nu,
        }

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "residual_history": list(self.residual_history),
            "step_lengths": list(self.step_lengths),
            "message": self.message,
            "chi_star": self.chi_star.data.tolist(),
            "extracted": self.extracted(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SolveReport":
        tau = np.asarray(d["extracted"]["tau"], dtype=float)
        return cls(
            converged=bool(d["converged"]),
            iterations=int(d["iterations"]),
            residual_history=[float(r) for r in d["residual_history"]],
            chi_star=DecisionVector(np.asarray(d["chi_star"], dtype=float), tau.size),
            tau=tau,
            step_lengths=[float(a) for a in d.get("step_lengths", [])],
            message=d.get("message", ""),
        )


def initial_guess(problem: OcpProblem, grid: Grid) -> DecisionVector:
    """X = Lam = 1, V = Omega = U = 0, xa = xb = lam_b = lam_a = 1, nu = 0."""
    n = grid.n_nodes
    return DecisionVector.from_parts(
        X=np.ones(n),
        Lam=np.ones(n),
        V=np.zeros(n),
        Omega=np.zeros(n),
        U=np.zeros(n),
        xa=1.0,
        lam_b=1.0,
        xb=1.0,
        nu=0.0,
        lam_a=1.0,
    )


def analytic_guess(problem: OcpProblem, grid: Grid) -> DecisionVector:
    """Decision vector sampled from the problem's closed-form solution."""
    sol = problem.analytic
    if sol is None:
        raise ValueError(f"problem {problem.name!r} has no analytic solution")
    t = grid.nodes
    return DecisionVector.from_parts(
        X=sol.x(t),
        Lam=sol.lam(t),
        V=sol.xdot(t),
        Omega=sol.lamdot(t),
        U=sol.u(t),
        xa=sol.xa,
        lam_b=sol.lam_b,
        xb=sol.xb,
        nu=sol.nu,
        lam_a=sol.lam_a,
    )


def krylov_linear_solve(K: KktMatrix, rhs, tol: float = 1e-12, restart: int = 50, maxiter: int | None = None) -> np.ndarray:
    """Solve A xi = rhs by restarted GMRES using only ``matvec``."""
    rhs = np.asarray(rhs, dtype=float)
    n = K.n
    if rhs.shape != (n,):
        raise ValueError(f"rhs must have length {n}")
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return np.zeros(n)
    op = scipy.sparse.linalg.LinearOperator((n, n), matvec=lambda v: matvec(K, v), dtype=float)
    restart = min(restart, n)
    if maxiter is None:
        maxiter = max(20, 4 * n // restart)
    xi, info = scipy.sparse.linalg.gmres(op, rhs, rtol=tol, atol=0.0, restart=restart, maxiter=maxiter)
    achieved = np.linalg.norm(matvec(K, xi) - rhs) / bnorm
    if info != 0 and achieved > tol:
        raise KrylovError(f"GMRES did not converge: relative residual {achieved:.3e} > {tol:.1e}", achieved)
    return xi


def _direction(K: KktMatrix, F: np.ndarray, opts: SolverOptions, k: int) -> np.ndarray:
    if opts.linear_path is LinearPath.DENSE_LU:
        A = to_dense(K)
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
        diag = np.abs(np.diag(lu))
        if diag.min() <= np.finfo(float).eps * diag.max() * A.shape[0]:
            raise SolverError("Jacobian is numerically singular", k)
        return scipy.linalg.lu_solve((lu, piv), -F)
    try:
        return krylov_linear_solve(K, -F, tol=opts.krylov_tol, restart=opts.krylov_restart)
    except KrylovError as exc:
        raise SolverError(str(exc), k) from exc


def newton_solve(
    problem: OcpProblem,
    grid: Grid,
    chi0: DecisionVector | None = None,
    opts: SolverOptions | None = None,
    ops: BirkhoffOperators | None = None,
) -> SolveReport:
    """Newton's method with Armijo backtracking on 0.5 ||F||^2."""
    opts = SolverOptions() if opts is None else opts
    ops = build_operators(grid) if ops is None else ops
    chi = (initial_guess(problem, grid) if chi0 is None else chi0).copy()
    if len(chi) != system_size(grid.n_nodes):
        raise ValueError("initial guess does not match the grid")

    F = residual(chi, problem, ops)
    history = [float(np.max(np.abs(F)))]
    steps: list[float] = []
    converged = history[-1] <= opts.tol
    message = "converged" if converged else ""
    k = 0
    while not converged and k < opts.max_iter:
        K = assemble(chi, problem, ops, fast=opts.fast_matvec)
        d = _direction(K, F, opts, k)
        merit = 0.5 * F @ F
        slope = -2.0 * merit  # directional derivative of the merit along an exact Newton step
        alpha = 1.0
        while True:
            trial = DecisionVector(chi.data + alpha * d, chi.n_nodes)
            Ft = residual(trial, problem, ops)
            mt = 0.5 * Ft @ Ft
            if np.isfinite(mt) and mt <= merit + opts.armijo_c * alpha * slope:
                break
            alpha *= opts.armijo_shrink
            if alpha < opts.min_step:
                break
        k += 1
        if alpha < opts.min_step:
            message = f"line search stalled at iteration {k}"
            log.info(message)
            break
        chi, F = trial, Ft
        steps.append(alpha)
        history.append(float(np.max(np.abs(F))))
        log.debug("newton %d: |F|=%.3e alpha=%.3g", k, history[-1], alpha)
        converged = history[-1] <= opts.tol
    if converged and not message:
        message = "converged"
    elif not message:
        message = f"reached max_iter={opts.max_iter}"
    return SolveReport(
        converged=converged,
        iterations=len(steps),
        residual_history=history,
        chi_star=chi,
        tau=np.array(grid.nodes),
        step_lengths=steps,
        message=message,
    )


@dataclass(frozen=True)
class SolutionErrors:
    hamiltonian_variation: float
    state_err: float | None = None
    costate_err: float | None = None
    control_err: float | None = None
    endpoint_errs: dict | None = None

    def to_dict(self) -> dict:
        return {
            "state_err": self.state_err,
            "costate_err": self.costate_err,
            "control_err": self.control_err,
            "endpoint_errs": self.endpoint_errs,
            "hamiltonian_variation": self.hamiltonian_variation,
        }


def verify_solution(report: SolveReport, problem: OcpProblem) -> SolutionErrors:
    c = report.chi_star
    H = hamiltonian_eval(problem, c.Lam, c.X, c.U).H
    hvar = float(np.max(H) - np.min(H))
    sol = problem.analytic
    if sol is None:
        return SolutionErrors(hamiltonian_variation=hvar)
    t = report.tau
    return SolutionErrors(
        hamiltonian_variation=hvar,
        state_err=float(np.max(np.abs(c.X - sol.x(t)))),
        costate_err=float(np.max(np.abs(c.Lam - sol.lam(t)))),
        control_err=float(np.max(np.abs(c.U - sol.u(t)))),
        endpoint_errs={
            "xa": abs(c.xa - sol.xa),
            "xb": abs(c.xb - sol.xb),
            "lam_a": abs(c.lam_a - sol.lam_a),
            "lam_b": abs(c.lam_b - sol.lam_b),
            "nu": abs(c.nu - sol.nu),
        },
    )
