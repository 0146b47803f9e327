"""First-order system F(chi) = 0 and its structured Jacobian (the Birkhoff Hessian).

Unknowns are stacked as

    chi = [X | Lam | V | Omega | U | xa | lam_b | xb | nu | lam_a]

(five node vectors of length Nn = N + 1 followed by five scalars) and the
residual blocks F1..F10 follow the same block order, so the identity blocks
of the Jacobian land on the diagonal.

The Jacobian is stored as the constant discretization skeleton (held by the
shared ``BirkhoffOperators``) plus five node-wise Hamiltonian diagonals and a
5x5 endpoint block.  Only the latter two change between Newton iterates.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse

from .birkhoff import BirkhoffOperators, apply_Ba_fast, apply_Bb_fast
from .grid import GridFamily
from .model import OcpProblem, endpoint_eval, hamiltonian_eval

DEFAULT_DENSE_CAP = 5 * 513 + 5

SEGMENTS = ("X", "Lam", "V", "Omega", "U")
SCALARS = ("xa", "lam_b", "xb", "nu", "lam_a")


class DimensionError(ValueError):
    """Vector or matrix dimensions do not match the grid."""


class DenseCapError(ValueError):
    """Materializing the requested matrix would exceed the configured size cap."""


def system_size(n_nodes: int) -> int:
    return 5 * n_nodes + 5


def offsets(n_nodes: int) -> dict[str, int]:
    """Start index of every segment of the flat layout."""
    off = {name: k * n_nodes for k, name in enumerate(SEGMENTS)}
    off.update({name: 5 * n_nodes + k for k, name in enumerate(SCALARS)})
    return off


class DecisionVector:
    """Flat decision vector with named views into its segments."""

    __slots__ = ("data", "n_nodes")

    def __init__(self, data, n_nodes: int):
        data = np.asarray(data, dtype=float)
        if data.shape != (system_size(n_nodes),):
            raise DimensionError(f"expected length {system_size(n_nodes)} for Nn={n_nodes}, got shape {data.shape}")
        self.data = data
        self.n_nodes = n_nodes

    @classmethod
    def from_parts(cls, X, Lam, V, Omega, U, xa, lam_b, xb, nu, lam_a) -> "DecisionVector":
        X = np.asarray(X, dtype=float)
        n = X.size
        parts = [X, Lam, V, Omega, U]
        for name, p in zip(SEGMENTS, parts):
            if np.shape(p) != (n,):
                raise DimensionError(f"segment {name} has shape {np.shape(p)}, expected ({n},)")
        data = np.concatenate([np.asarray(p, dtype=float) for p in parts] + [np.array([xa, lam_b, xb, nu, lam_a], dtype=float)])
        return cls(data, n)

    def _seg(self, k: int) -> np.ndarray:
        n = self.n_nodes
        return self.data[k * n : (k + 1) * n]

    X = property(lambda self: self._seg(0))
    Lam = property(lambda self: self._seg(1))
    V = property(lambda self: self._seg(2))
    Omega = property(lambda self: self._seg(3))
    U = property(lambda self: self._seg(4))
    xa = property(lambda self: float(self.data[5 * self.n_nodes]))
    lam_b = property(lambda self: float(self.data[5 * self.n_nodes + 1]))
    xb = property(lambda self: float(self.data[5 * self.n_nodes + 2]))
    nu = property(lambda self: float(self.data[5 * self.n_nodes + 3]))
    lam_a = property(lambda self: float(self.data[5 * self.n_nodes + 4]))

    def copy(self) -> "DecisionVector":
        return DecisionVector(self.data.copy(), self.n_nodes)

    def __len__(self) -> int:
        return self.data.size

    def __repr__(self) -> str:
        return f"DecisionVector(n_nodes={self.n_nodes}, xa={self.xa:.6g}, xb={self.xb:.6g}, lam_a={self.lam_a:.6g})"


def _as_chi(chi, n_nodes: int) -> DecisionVector:
    if isinstance(chi, DecisionVector):
        if chi.n_nodes != n_nodes:
            raise DimensionError(f"decision vector has Nn={chi.n_nodes}, operators have Nn={n_nodes}")
        return chi
    return DecisionVector(chi, n_nodes)


# ---------------------------------------------------------------------------
# residual
# ---------------------------------------------------------------------------


def residual(chi, problem: OcpProblem, ops: BirkhoffOperators) -> np.ndarray:
    """Stacked residual [F1, ..., F10]."""
    n = ops.n_nodes
    c = _as_chi(chi, n)
    w = ops.weights
    h = hamiltonian_eval(problem, c.Lam, c.X, c.U)
    ep = endpoint_eval(problem, c.nu, c.xa, c.xb)
    one = np.ones(n)
    F = np.empty(system_size(n))
    F[0:n] = c.X - c.xa * one - ops.Ba @ c.V
    F[n : 2 * n] = c.Lam - c.lam_b * one - ops.Bb @ c.Omega
    F[2 * n : 3 * n] = c.V - h.H_lam
    F[3 * n : 4 * n] = c.Omega + h.H_x
    F[4 * n : 5 * n] = h.H_u
    F[5 * n + 0] = c.xa - c.xb + w @ c.V
    F[5 * n + 1] = -c.lam_a + c.lam_b - w @ c.Omega
    F[5 * n + 2] = -c.lam_b + ep.Ebar_b
    F[5 * n + 3] = ep.Ebar_nu
    F[5 * n + 4] = c.lam_a + ep.Ebar_a
    return F


# ---------------------------------------------------------------------------
# structured Jacobian
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HamiltonianDiagonals:
    """Node-wise second derivatives of H; H_xu = H_ux is stored once."""

    lamx: np.ndarray
    lamu: np.ndarray
    xx: np.ndarray
    xu: np.ndarray
    uu: np.ndarray

    def as_tuple(self) -> tuple[np.ndarray, ...]:
        return (self.lamx, self.lamu, self.xx, self.xu, self.uu)


@dataclass(frozen=True, eq=False)
class KktMatrix:
    ops: BirkhoffOperators
    hdiag: HamiltonianDiagonals
    endpoint: np.ndarray  # 5x5, rows F6..F10, columns (xa, lam_b, xb, nu, lam_a)
    fast: bool = False
    dense_cap: int = DEFAULT_DENSE_CAP

    @property
    def n_nodes(self) -> int:
        return self.ops.n_nodes

    @property
    def n(self) -> int:
        return system_size(self.ops.n_nodes)


def endpoint_block(problem: OcpProblem, nu: float, xa: float, xb: float) -> np.ndarray:
    ep = endpoint_eval(problem, nu, xa, xb)
    return np.array(
        [
            [1.0, 0.0, -1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, -1.0],
            [ep.Ebar_ab, -1.0, ep.Ebar_bb, ep.Ebar_bnu, 0.0],
            [ep.Ebar_anu, 0.0, ep.Ebar_bnu, 0.0, 0.0],
            [ep.Ebar_aa, 0.0, ep.Ebar_ab, ep.Ebar_anu, 1.0],
        ]
    )


def assemble(chi, problem: OcpProblem, ops: BirkhoffOperators, fast: bool = False, dense_cap: int = DEFAULT_DENSE_CAP) -> KktMatrix:
    """Jacobian of ``residual`` at ``chi`` in structured form."""
    c = _as_chi(chi, ops.n_nodes)
    h = hamiltonian_eval(problem, c.Lam, c.X, c.U)
    hd = HamiltonianDiagonals(lamx=h.H_lamx, lamu=h.H_lamu, xx=h.H_xx, xu=h.H_xu, uu=h.H_uu)
    if fast and ops.grid.family is not GridFamily.CHEBYSHEV_LOBATTO:
        fast = False
    return KktMatrix(ops=ops, hdiag=hd, endpoint=endpoint_block(problem, c.nu, c.xa, c.xb), fast=fast, dense_cap=dense_cap)


def to_dense(K: KktMatrix, cap: int | None = None) -> np.ndarray:
    cap = K.dense_cap if cap is None else cap
    n, N = K.n_nodes, K.n
    if N > cap:
        raise DenseCapError(f"dense materialization of n={N} exceeds cap {cap}")
    A = np.zeros((N, N))
    I = np.eye(n)
    d = K.hdiag
    s = 5 * n
    sl = [slice(k * n, (k + 1) * n) for k in range(5)]
    # F1
    A[sl[0], sl[0]] = I
    A[sl[0], sl[2]] = -K.ops.Ba
    A[sl[0], s + 0] = -1.0
    # F2
    A[sl[1], sl[1]] = I
    A[sl[1], sl[3]] = -K.ops.Bb
    A[sl[1], s + 1] = -1.0
    # F3
    A[sl[2], sl[0]] = -np.diag(d.lamx)
    A[sl[2], sl[2]] = I
    A[sl[2], sl[4]] = -np.diag(d.lamu)
    # F4
    A[sl[3], sl[0]] = np.diag(d.xx)
    A[sl[3], sl[1]] = np.diag(d.lamx)
    A[sl[3], sl[3]] = I
    A[sl[3], sl[4]] = np.diag(d.xu)
    # F5
    A[sl[4], sl[0]] = np.diag(d.xu)
    A[sl[4], sl[1]] = np.diag(d.lamu)
    A[sl[4], sl[4]] = np.diag(d.uu)
    # F6..F10
    A[s + 0, sl[2]] = K.ops.weights
    A[s + 1, sl[3]] = -K.ops.weights
    A[s:, s:] = K.endpoint
    return A


def matvec(K: KktMatrix, v) -> np.ndarray:
    """A v without materializing A."""
    v = np.asarray(v, dtype=float)
    n, N = K.n_nodes, K.n
    if v.shape != (N,):
        raise DimensionError(f"expected vector of length {N}, got shape {v.shape}")
    X, Lam, V, Om, U = (v[k * n : (k + 1) * n] for k in range(5))
    sc = v[5 * n :]
    d = K.hdiag
    if K.fast:
        BaV, BbO = apply_Ba_fast(K.ops, V), apply_Bb_fast(K.ops, Om)
    else:
        BaV, BbO = K.ops.Ba @ V, K.ops.Bb @ Om
    out = np.empty(N)
    out[0:n] = X - BaV - sc[0]
    out[n : 2 * n] = Lam - BbO - sc[1]
    out[2 * n : 3 * n] = V - d.lamx * X - d.lamu * U
    out[3 * n : 4 * n] = d.xx * X + d.lamx * Lam + Om + d.xu * U
    out[4 * n : 5 * n] = d.xu * X + d.lamu * Lam + d.uu * U
    out[5 * n :] = K.endpoint @ sc
    out[5 * n + 0] += K.ops.weights @ V
    out[5 * n + 1] -= K.ops.weights @ Om
    return out


# ---------------------------------------------------------------------------
# data-independent / data-dependent split
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitKkt:
    A0_rows: np.ndarray
    Adata_rows: np.ndarray
    permutation: np.ndarray  # row order: stacked[k] = A[permutation[k]]


def split_permutation(n_nodes: int) -> np.ndarray:
    n = n_nodes
    s = 5 * n
    top = np.concatenate([np.arange(0, 2 * n), [s, s + 1]])
    bottom = np.concatenate([np.arange(2 * n, 5 * n), [s + 2, s + 3, s + 4]])
    return np.concatenate([top, bottom])


def permute_split(K: KktMatrix) -> SplitKkt:
    A = to_dense(K)
    p = split_permutation(K.n_nodes)
    m = 2 * K.n_nodes + 2
    PA = A[p]
    return SplitKkt(A0_rows=PA[:m], Adata_rows=PA[m:], permutation=p)


def unpermute(split: SplitKkt) -> np.ndarray:
    stacked = np.vstack([split.A0_rows, split.Adata_rows])
    A = np.empty_like(stacked)
    A[split.permutation] = stacked
    return A


# ---------------------------------------------------------------------------
# symmetric alternative built from the weighted Lagrangian
# ---------------------------------------------------------------------------


def assemble_alt(chi, problem: OcpProblem, ops: BirkhoffOperators) -> np.ndarray:
    """Symmetric (5Nn+4)-square Hessian in primal-dual form.

    Primal block (Xt, Vt, Ut, xa, xb) with Xt = W X etc., dual block
    (Lam, Omega, nu, lam_b).  The costate lam_a does not appear.  Hamiltonian
    blocks are evaluated at the same (X, U, Lam) as ``assemble``.
    """
    n = ops.n_nodes
    c = _as_chi(chi, n)
    w = ops.weights
    if np.any(w <= 0):
        raise ValueError("quadrature weights must be positive")
    winv = 1.0 / w
    h = hamiltonian_eval(problem, c.Lam, c.X, c.U)
    ep = endpoint_eval(problem, c.nu, c.xa, c.xb)
    I = np.eye(n)
    one = np.ones(n)
    m = 5 * n + 4
    A = np.zeros((m, m))
    Xt, Vt, Ut = (slice(k * n, (k + 1) * n) for k in range(3))
    xa, xb = 3 * n, 3 * n + 1
    Lm, Om = slice(3 * n + 2, 4 * n + 2), slice(4 * n + 2, 5 * n + 2)
    nu, lb = 5 * n + 2, 5 * n + 3

    # primal rows
    A[Xt, Xt] = np.diag(winv * h.H_xx)
    A[Xt, Ut] = np.diag(winv * h.H_xu)
    A[Xt, Lm] = np.diag(h.H_lamx)
    A[Xt, Om] = I
    A[Vt, Lm] = -I
    A[Vt, Om] = ops.Bb
    A[Vt, lb] = one
    A[Ut, Xt] = np.diag(winv * h.H_xu)
    A[Ut, Ut] = np.diag(winv * h.H_uu)
    A[Ut, Lm] = np.diag(h.H_lamu)
    A[xa, xa], A[xa, xb] = ep.Ebar_aa, ep.Ebar_ab
    A[xa, Om] = -w
    A[xa, nu], A[xa, lb] = ep.Ebar_anu, 1.0
    A[xb, xa], A[xb, xb] = ep.Ebar_ab, ep.Ebar_bb
    A[xb, nu], A[xb, lb] = ep.Ebar_bnu, -1.0
    # dual rows
    A[Lm, Xt] = np.diag(h.H_lamx)
    A[Lm, Vt] = -I
    A[Lm, Ut] = np.diag(h.H_lamu)
    A[Om, Xt] = I
    A[Om, Vt] = ops.Bb.T
    A[Om, xa] = -w
    A[nu, xa], A[nu, xb] = ep.Ebar_anu, ep.Ebar_bnu
    A[lb, Vt] = one
    A[lb, xa], A[lb, xb] = 1.0, -1.0
    return A


# ---------------------------------------------------------------------------
# storage accounting and export
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NnzReport:
    hamiltonian_values: int
    total_pattern: int
    bytes: int


def hamiltonian_storage(N_x: int, N_u: int, n_nodes: int) -> int:
    """Stored Hamiltonian-derivative values for N_x states and N_u controls."""
    return (2 * N_x * N_x + 2 * N_x * N_u + N_u * N_u) * n_nodes


def nnz_report(K: KktMatrix, N_x: int = 1, N_u: int = 1, n_nodes: int | None = None) -> NnzReport:
    if N_x < 1 or N_u < 1:
        raise ValueError("N_x and N_u must be >= 1")
    nn = K.n_nodes if n_nodes is None else n_nodes
    values = hamiltonian_storage(N_x, N_u, nn)
    return NnzReport(hamiltonian_values=values, total_pattern=structural_nnz(K), bytes=8 * values)


def structural_nnz(K: KktMatrix) -> int:
    """Structural positions of A: the dense B^a/B^b blocks, the identity
    diagonals, the -b columns and w rows, the eight Hamiltonian diagonals and
    the full 5x5 endpoint block."""
    n = K.n_nodes
    return 2 * n * n + 4 * n + 4 * n + 8 * n + 25


def write_matrix_market(path, M, comment: str = "") -> None:
    """Write M in coordinate format, atomically (temp file + rename)."""
    coo = scipy.sparse.coo_matrix(np.asarray(M))
    buf = io.BytesIO()
    scipy.io.mmwrite(buf, coo, comment=comment, symmetry="general")
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(buf.getvalue())
    os.replace(tmp, path)


def read_matrix_market(path) -> np.ndarray:
    return np.asarray(scipy.io.mmread(path).toarray())
