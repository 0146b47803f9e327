"""Lobatto grids on [-1, 1] and their quadrature weights.

Two families are supported: Chebyshev-Gauss-Lobatto (Clenshaw-Curtis
weights) and Legendre-Gauss-Lobatto.  Both include the endpoints, which the
Birkhoff discretization identifies with the boundary values x^a and x^b.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class GridError(ValueError):
    """Raised for invalid grid specifications."""


class GridFamily(str, enum.Enum):
    CHEBYSHEV_LOBATTO = "cgl"
    LEGENDRE_LOBATTO = "lgl"

    @classmethod
    def parse(cls, value: "GridFamily | str") -> "GridFamily":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {
            "cgl": cls.CHEBYSHEV_LOBATTO,
            "chebyshev": cls.CHEBYSHEV_LOBATTO,
            "chebyshevlobatto": cls.CHEBYSHEV_LOBATTO,
            "lgl": cls.LEGENDRE_LOBATTO,
            "legendre": cls.LEGENDRE_LOBATTO,
            "legendrelobatto": cls.LEGENDRE_LOBATTO,
        }
        try:
            return aliases[key.replace("_", "").replace("-", "")]
        except KeyError:
            raise GridError(f"unknown grid family {value!r}") from None


@dataclass(frozen=True)
class GridSpec:
    family: GridFamily
    N: int

    def __post_init__(self):
        object.__setattr__(self, "family", GridFamily.parse(self.family))
        if int(self.N) != self.N or self.N < 2:
            raise GridError(f"polynomial degree N must be an integer >= 2, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))


@dataclass(frozen=True, eq=False)
class Grid:
    """Nodes tau_0 < ... < tau_N with tau_0 = -1, tau_N = 1, and weights."""

    spec: GridSpec
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def N(self) -> int:
        return self.spec.N

    @property
    def n_nodes(self) -> int:
        return self.spec.N + 1

    @property
    def family(self) -> GridFamily:
        return self.spec.family


def chebyshev_lobatto(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Chebyshev-Lobatto nodes -cos(i*pi/N) and Clenshaw-Curtis weights."""
    theta = np.pi * np.arange(N + 1) / N
    nodes = -np.cos(theta)
    # Exact nodes at the symmetry points; cos() leaves ~1e-17 residue.
    nodes[0], nodes[-1] = -1.0, 1.0
    if N % 2 == 0:
        nodes[N // 2] = 0.0
    nodes = 0.5 * (nodes - nodes[::-1])

    # Clenshaw-Curtis via the cosine sum (Trefethen, Spectral Methods in MATLAB).
    w = np.zeros(N + 1)
    interior = theta[1:-1]
    v = np.ones(N - 1)
    if N % 2 == 0:
        w[0] = w[N] = 1.0 / (N * N - 1)
        for k in range(1, N // 2):
            v -= 2.0 * np.cos(2 * k * interior) / (4 * k * k - 1)
        v -= np.cos(N * interior) / (N * N - 1)
    else:
        w[0] = w[N] = 1.0 / (N * N)
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * interior) / (4 * k * k - 1)
    w[1:-1] = 2.0 * v / N
    w = 0.5 * (w + w[::-1])
    return nodes, w


def legendre_eval(N: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return P_N(x) and P_{N-1}(x) by the three-term recurrence."""
    p_prev = np.ones_like(x)
    p = np.array(x, dtype=float, copy=True)
    for k in range(2, N + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    return p, p_prev


def legendre_lobatto(N: int, tol: float = 1e-15, max_iter: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Legendre-Lobatto nodes and weights.

    Newton iteration on (1 - x^2) P_N'(x) started from the Chebyshev-Lobatto
    points.  The update uses the identity
    (1 - x^2) P_N' = N (P_{N-1} - x P_N), whose derivative at a root is
    -N(N+1) P_N, so one Newton step is x -= (x P_N - P_{N-1}) / ((N+1) P_N).
    """
    x = np.cos(np.pi * np.arange(N + 1) / N)
    for _ in range(max_iter):
        p, p_prev = legendre_eval(N, x)
        dx = (x * p - p_prev) / ((N + 1) * p)
        x = x - dx
        if np.max(np.abs(dx)) <= tol:
            break
    else:
        # Roundoff can keep |dx| hovering at a few ulps; accept that.
        if np.max(np.abs(dx)) > 64 * np.finfo(float).eps:
            raise RuntimeError(f"Legendre-Lobatto Newton iteration did not converge for N={N}")
    x = np.sort(x)
    x[0], x[-1] = -1.0, 1.0
    x = 0.5 * (x - x[::-1])
    p, _ = legendre_eval(N, x)
    w = 2.0 / (N * (N + 1) * p * p)
    w = 0.5 * (w + w[::-1])
    return x, w


def make_grid(spec: GridSpec) -> Grid:
    if spec.family is GridFamily.CHEBYSHEV_LOBATTO:
        nodes, weights = chebyshev_lobatto(spec.N)
    else:
        nodes, weights = legendre_lobatto(spec.N)
    return Grid(spec=spec, nodes=nodes, weights=weights)


def grid(family: GridFamily | str, N: int) -> Grid:
    """Shorthand for ``make_grid(GridSpec(family, N))``."""
    return make_grid(GridSpec(GridFamily.parse(family), N))


def quadrature_exactness_degree(g: Grid, d_max: int) -> np.ndarray:
    """Absolute quadrature errors for the monomials tau^0 .. tau^d_max."""
    if d_max < 0:
        raise ValueError("d_max must be >= 0")
    k = np.arange(d_max + 1)
    exact = np.where(k % 2 == 0, 2.0 / (k + 1), 0.0)
    approx = np.array([np.dot(g.weights, g.nodes**j) for j in k])
    return np.abs(approx - exact)
