"""Birkhoff integration matrices B^a, B^b on a Lobatto grid.

Column j of B^a holds the values at the nodes of the antiderivative of the
Lagrange cardinal polynomial l_j that vanishes at tau = -1; B^b is the
antiderivative vanishing at tau = +1.  These are the unique polynomials whose
derivative at node i is delta_ij and which vanish at the respective anchor.

The matrices are built in modal space: l_j is expanded in the Chebyshev or
Legendre basis (an exact discrete transform on the Lobatto grid), the
coefficients are antidifferentiated with the three-term recurrence, and the
result is evaluated back at the nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .grid import Grid, GridFamily


class UnsupportedGridError(ValueError):
    """The requested operation is only available for a different grid family."""


# ---------------------------------------------------------------------------
# modal bases
# ---------------------------------------------------------------------------


def chebyshev_vandermonde(x: np.ndarray, degree: int) -> np.ndarray:
    """V[i, k] = T_k(x_i) for k = 0..degree."""
    theta = np.arccos(np.clip(x, -1.0, 1.0))
    return np.cos(np.outer(theta, np.arange(degree + 1)))


def legendre_vandermonde(x: np.ndarray, degree: int) -> np.ndarray:
    """V[i, k] = P_k(x_i) for k = 0..degree."""
    V = np.empty((x.size, degree + 1))
    V[:, 0] = 1.0
    if degree >= 1:
        V[:, 1] = x
    for k in range(2, degree + 1):
        V[:, k] = ((2 * k - 1) * x * V[:, k - 1] - (k - 1) * V[:, k - 2]) / k
    return V


def cardinal_coefficients(g: Grid) -> np.ndarray:
    """Modal coefficients of the cardinal polynomials.

    Returns C of shape (N+1, N+1) with l_j = sum_k C[k, j] phi_k, where phi_k
    is T_k on a Chebyshev grid and P_k on a Legendre grid.
    """
    N = g.N
    if g.family is GridFamily.CHEBYSHEV_LOBATTO:
        c = np.ones(N + 1)
        c[0] = c[N] = 2.0
        T = chebyshev_vandermonde(g.nodes, N)  # T[j, k] = T_k(tau_j)
        return (2.0 / N) * T.T / np.outer(c, c)
    P = legendre_vandermonde(g.nodes, N)
    # discrete norms of P_k under the LGL rule; the top mode is 2/N, not 2/(2N+1)
    gamma = 2.0 / (2.0 * np.arange(N + 1) + 1.0)
    gamma[N] = 2.0 / N
    return (P * g.weights[:, None]).T / gamma[:, None]


def chebyshev_antiderivative(c: np.ndarray) -> np.ndarray:
    """Coefficients (degree + 1) of an antiderivative of sum_k c_k T_k.

    Works on the leading axis, so a matrix of column-wise coefficient sets is
    handled in one pass.  The constant term is left at zero.
    """
    n = c.shape[0]
    cp = np.zeros((n + 2,) + c.shape[1:])
    cp[:n] = c
    out = np.zeros((n + 1,) + c.shape[1:])
    out[1] = cp[0] - 0.5 * cp[2]
    k = np.arange(2, n + 1).reshape((-1,) + (1,) * (c.ndim - 1))
    out[2:] = (cp[1:n] - cp[3 : n + 2]) / (2.0 * k)
    return out


def legendre_antiderivative(c: np.ndarray) -> np.ndarray:
    """Coefficients (degree + 1) of an antiderivative of sum_k c_k P_k."""
    n = c.shape[0]
    cp = np.zeros((n + 2,) + c.shape[1:])
    cp[:n] = c
    out = np.zeros((n + 1,) + c.shape[1:])
    k = np.arange(1, n + 1).reshape((-1,) + (1,) * (c.ndim - 1))
    out[1:] = cp[0:n] / (2.0 * k - 1.0) - cp[2 : n + 2] / (2.0 * k + 3.0)
    return out


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BirkhoffOperators:
    grid: Grid
    Ba: np.ndarray
    Bb: np.ndarray

    def __post_init__(self):
        self.Ba.setflags(write=False)
        self.Bb.setflags(write=False)

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    @property
    def n_nodes(self) -> int:
        return self.grid.n_nodes


def build_operators(g: Grid) -> BirkhoffOperators:
    N = g.N
    C = cardinal_coefficients(g)
    if g.family is GridFamily.CHEBYSHEV_LOBATTO:
        Cint = chebyshev_antiderivative(C)
        V = chebyshev_vandermonde(g.nodes, N + 1)
    else:
        Cint = legendre_antiderivative(C)
        V = legendre_vandermonde(g.nodes, N + 1)
    alt = (-1.0) ** np.arange(N + 2)  # phi_k(-1); phi_k(+1) = 1 for both families
    vals = V @ Cint
    Ba = vals - (alt @ Cint)[None, :]
    Bb = vals - Cint.sum(axis=0)[None, :]
    # anchors hold exactly by construction of the interpolation conditions
    Ba[0, :] = 0.0
    Bb[N, :] = 0.0
    return BirkhoffOperators(grid=g, Ba=Ba, Bb=Bb)


def _require_chebyshev(ops: BirkhoffOperators) -> None:
    if ops.grid.family is not GridFamily.CHEBYSHEV_LOBATTO:
        raise UnsupportedGridError("the fast Birkhoff product needs a Chebyshev-Lobatto grid")


def _fast_antiderivative_values(N: int, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values at CGL nodes of an antiderivative of the interpolant of v.

    Returns (values, coefficients) where the coefficients are those of the
    antiderivative (degree N+1) in the Chebyshev basis.
    """
    # Nodes run from -1 to 1, so T_k(tau_i) = (-1)^k cos(pi k i / N).
    sign = (-1.0) ** np.arange(N + 1)
    y = scipy.fft.dct(v, type=1)
    c = sign * y / N
    c[0] *= 0.5
    c[N] *= 0.5
    C = chebyshev_antiderivative(c)
    d = sign * C[: N + 1]
    d[1:N] *= 0.5
    vals = scipy.fft.dct(d, type=1)
    # T_{N+1}(tau_i) = (-1)^(N+1) cos(pi (N+1) i / N) = (-1)^(N+1+i) cos(pi i / N)
    i = np.arange(N + 1)
    vals += C[N + 1] * (-1.0) ** (N + 1 + i) * np.cos(np.pi * i / N)
    return vals, C


def apply_Ba_fast(ops: BirkhoffOperators, v: np.ndarray) -> np.ndarray:
    """B^a v in O(N log N) through discrete cosine transforms."""
    _require_chebyshev(ops)
    N = ops.grid.N
    v = np.asarray(v, dtype=float)
    if v.shape != (N + 1,):
        raise ValueError(f"expected vector of length {N + 1}, got shape {v.shape}")
    vals, C = _fast_antiderivative_values(N, v)
    at_minus_one = np.dot((-1.0) ** np.arange(N + 2), C)
    out = vals - at_minus_one
    out[0] = 0.0
    return out


def apply_Bb_fast(ops: BirkhoffOperators, v: np.ndarray) -> np.ndarray:
    """B^b v in O(N log N); same pipeline anchored at tau = +1."""
    _require_chebyshev(ops)
    N = ops.grid.N
    v = np.asarray(v, dtype=float)
    if v.shape != (N + 1,):
        raise ValueError(f"expected vector of length {N + 1}, got shape {v.shape}")
    vals, C = _fast_antiderivative_values(N, v)
    out = vals - C.sum()
    out[N] = 0.0
    return out


def lemma1_residual(ops: BirkhoffOperators) -> float:
    """max |W B^b + (B^a)^T W| with W = diag(weights)."""
    w = ops.weights
    R = w[:, None] * ops.Bb + ops.Ba.T * w[None, :]
    return float(np.max(np.abs(R)))


def row_abs_sums(B: np.ndarray) -> np.ndarray:
    return np.abs(B).sum(axis=1)


def column_abs_sums(B: np.ndarray) -> np.ndarray:
    return np.abs(B).sum(axis=0)
