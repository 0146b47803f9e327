"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.  Relative
``--out`` paths are resolved against ``$BIRKHOFF_OUTPUT_DIR`` when it is set.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import bench as bench_mod
from .birkhoff import build_operators, lemma1_residual
from .complexity import TABLE1_SIZES, memory_estimate, table1_row
from .grid import GridError, GridFamily, GridSpec, make_grid, quadrature_exactness_degree
from .kkt import DEFAULT_DENSE_CAP, DenseCapError, assemble, assemble_alt, nnz_report, permute_split, to_dense, write_matrix_market
from .model import builtin_problem
from .output import atomic_write, to_csv, to_json
from .solver import SolverError, SolverOptions, initial_guess, newton_solve, verify_solution
from .spectral import DEFAULT_SPECTRUM_CAP, SpectrumCapError, birkhoff_abs_sums, spectral_radius_sweep, verify_theorem1

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2
OUTPUT_DIR_ENV = "BIRKHOFF_OUTPUT_DIR"
SUBCOMMANDS = ("grid", "basis", "assemble", "spectrum", "solve", "bench", "memory", "table1")

log = logging.getLogger("birkhoff_hessian")


class ValidationError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    problem: str = "tp1"
    family: str = "cgl"
    N: int = 16
    format: str = "json"
    out: str | None = None
    fast: bool = False
    seed: int = 0
    # subcommand extras
    matrix: str = "A"
    linear_path: str = "dense_lu"
    sweep: str | None = None
    ladder: str = "128,256,512,1024,2048"
    repeats: int = 5
    nx: int = 6
    nu: int = 3
    nn: int = 1_000_000
    flops: float = 1e12


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--problem", default="tp1")
    common.add_argument("--family", default="cgl", help="cgl or lgl")
    common.add_argument("-N", type=int, default=16, dest="N", help="polynomial degree")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="output path (stdout when omitted)")
    common.add_argument("--fast", action="store_true", help="Chebyshev fast Birkhoff products")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="birkhoff-hessian", description="Birkhoff-discretized optimal control: KKT assembly, spectra, solves.")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    sub.add_parser("grid", parents=[common], help="grid nodes and weights")
    sub.add_parser("basis", parents=[common], help="Birkhoff matrices and their identities")
    a = sub.add_parser("assemble", parents=[common], help="Hessian at the initial guess (Matrix Market with --out)")
    a.add_argument("--matrix", choices=("A", "alt", "A0", "Adata"), default="A")
    s = sub.add_parser("spectrum", parents=[common], help="Gershgorin/eigenvalue report at the solution")
    s.add_argument("--sweep", default=None, help="comma-separated N list for a spectral-radius sweep")
    so = sub.add_parser("solve", parents=[common], help="Newton solve")
    so.add_argument("--linear-path", choices=("dense_lu", "krylov"), default="dense_lu", dest="linear_path")
    b = sub.add_parser("bench", parents=[common], help="time dense/fast products and dense LU")
    b.add_argument("--ladder", default="128,256,512,1024,2048")
    b.add_argument("--repeats", type=int, default=5)
    m = sub.add_parser("memory", parents=[common], help="Hamiltonian storage estimate")
    m.add_argument("--nx", type=int, default=6)
    m.add_argument("--nu", type=int, default=3)
    m.add_argument("--nn", type=int, default=1_000_000)
    t = sub.add_parser("table1", parents=[common], help="space/time complexity table")
    t.add_argument("--flops", type=float, default=1e12)
    return p


def parse_args(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    if ns.verbose:
        logging.basicConfig(level=logging.DEBUG)
    fields = {k: v for k, v in vars(ns).items() if k in RunConfig.__dataclass_fields__}
    return RunConfig(**fields)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _grid(cfg: RunConfig):
    try:
        return make_grid(GridSpec(GridFamily.parse(cfg.family), cfg.N))
    except GridError as exc:
        raise ValidationError(str(exc)) from exc


def _problem(cfg: RunConfig):
    try:
        return builtin_problem(cfg.problem)
    except LookupError as exc:
        raise ValidationError(str(exc)) from exc


def _check_dense(cfg: RunConfig, cap: int = DEFAULT_DENSE_CAP):
    n = 5 * (cfg.N + 1) + 5
    if n > cap:
        raise ValidationError(f"N={cfg.N} gives n={n}, above the dense cap {cap}")


def cmd_grid(cfg: RunConfig):
    g = _grid(cfg)
    deg = 2 * g.N - 1 if g.family is GridFamily.LEGENDRE_LOBATTO else g.N
    doc = {
        "family": g.family.value,
        "N": g.N,
        "nodes": g.nodes,
        "weights": g.weights,
        "max_quadrature_error": float(quadrature_exactness_degree(g, deg).max()),
        "exact_degree": deg,
    }
    rows = [{"i": i, "tau": t, "w": w} for i, (t, w) in enumerate(zip(g.nodes, g.weights))]
    return doc, rows


def cmd_basis(cfg: RunConfig):
    _check_dense(cfg)
    g = _grid(cfg)
    ops = build_operators(g)
    doc = {
        "family": g.family.value,
        "N": g.N,
        "weights": g.weights,
        "Ba": ops.Ba,
        "Bb": ops.Bb,
        "lemma1_residual": lemma1_residual(ops),
        "abs_sums": birkhoff_abs_sums(ops),
    }
    n = g.n_nodes
    rows = [
        {"matrix": name, "i": i, "j": j, "value": float(M[i, j])}
        for name, M in (("Ba", ops.Ba), ("Bb", ops.Bb))
        for i in range(n)
        for j in range(n)
    ]
    return doc, rows


def cmd_assemble(cfg: RunConfig):
    _check_dense(cfg)
    g = _grid(cfg)
    P = _problem(cfg)
    ops = build_operators(g)
    chi = initial_guess(P, g)
    K = assemble(chi, P, ops, fast=cfg.fast)
    if cfg.matrix == "A":
        M = to_dense(K)
    elif cfg.matrix == "alt":
        M = assemble_alt(chi, P, ops)
    else:
        split = permute_split(K)
        M = split.A0_rows if cfg.matrix == "A0" else split.Adata_rows
    rep = nnz_report(K)
    doc = {
        "problem": P.name,
        "family": g.family.value,
        "N": g.N,
        "matrix": cfg.matrix,
        "shape": list(M.shape),
        "n": K.n,
        "nnz": int(np.count_nonzero(M)),
        "hamiltonian_values": rep.hamiltonian_values,
        "hamiltonian_bytes": rep.bytes,
        "asymmetry_inf": float(np.max(np.abs(M - M.T))) if M.shape[0] == M.shape[1] else None,
    }
    return doc, [doc], M


def cmd_solve(cfg: RunConfig):
    _check_dense(cfg)
    g = _grid(cfg)
    P = _problem(cfg)
    opts = SolverOptions(linear_path=cfg.linear_path, fast_matvec=cfg.fast)
    try:
        rep = newton_solve(P, g, opts=opts)
    except SolverError as exc:
        raise NumericalFailure(str(exc)) from exc
    errs = verify_solution(rep, P)
    doc = {"problem": P.name, "family": g.family.value, "N": g.N, **rep.to_dict(), "errors": errs.to_dict()}
    ex = rep.extracted()
    rows = [
        {"tau": ex["tau"][i], "x": ex["x"][i], "u": ex["u"][i], "lam": ex["lam"][i], "v": ex["v"][i], "omega": ex["omega"][i]}
        for i in range(len(ex["tau"]))
    ]
    if not rep.converged:
        raise NumericalFailure(f"Newton did not converge: {rep.message}", doc)
    return doc, rows


def cmd_spectrum(cfg: RunConfig):
    P = _problem(cfg)
    if cfg.sweep:
        try:
            Ns = [int(s) for s in cfg.sweep.split(",") if s.strip()]
        except ValueError as exc:
            raise ValidationError(f"bad --sweep list {cfg.sweep!r}") from exc
        try:
            table = spectral_radius_sweep(P, GridFamily.parse(cfg.family), Ns)
        except SolverError as exc:
            raise NumericalFailure(str(exc)) from exc
        rows = [asdict(r) for r in table]
        return {"problem": P.name, "family": cfg.family, "sweep": rows}, rows
    if 5 * (cfg.N + 1) + 5 > DEFAULT_SPECTRUM_CAP:
        raise ValidationError(f"N={cfg.N} above the dense spectrum cap")
    g = _grid(cfg)
    try:
        sol = newton_solve(P, g)
    except SolverError as exc:
        raise NumericalFailure(str(exc)) from exc
    if not sol.converged:
        raise NumericalFailure(f"Newton did not converge: {sol.message}")
    ops = build_operators(g)
    rep = verify_theorem1(assemble(sol.chi_star, P, ops))
    doc = {"problem": P.name, "family": g.family.value, "N": g.N, **rep.to_dict(), "abs_sums": birkhoff_abs_sums(ops)}
    rows = [{"real": z.real, "imag": z.imag} for z in rep.eigenvalues]
    return doc, rows


def cmd_bench(cfg: RunConfig):
    try:
        Ns = [int(s) for s in cfg.ladder.split(",") if s.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad --ladder list {cfg.ladder!r}") from exc
    rows = [asdict(r) for r in bench_mod.bench(Ns, repeats=cfg.repeats, seed=cfg.seed)]
    return {"rows": rows}, rows


def cmd_memory(cfg: RunConfig):
    try:
        b = memory_estimate(cfg.nx, cfg.nu, cfg.nn)
    except (ValueError, OverflowError) as exc:
        raise ValidationError(str(exc)) from exc
    doc = {"N_x": cfg.nx, "N_u": cfg.nu, "N_n": cfg.nn, "bytes": b, "GB": b / 1e9, "values": b // 8}
    return doc, [doc]


def cmd_table1(cfg: RunConfig):
    rows = [table1_row(n, flops=cfg.flops).to_dict() for n in TABLE1_SIZES]
    return {"flops": cfg.flops, "rows": rows}, rows


COMMANDS = {
    "grid": cmd_grid,
    "basis": cmd_basis,
    "assemble": cmd_assemble,
    "spectrum": cmd_spectrum,
    "solve": cmd_solve,
    "bench": cmd_bench,
    "memory": cmd_memory,
    "table1": cmd_table1,
}


def _resolve(out: str) -> str:
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(out):
        return os.path.join(base, out)
    return out


def _emit(cfg: RunConfig, doc, rows, stdout) -> None:
    text = to_json(doc) + "\n" if cfg.format == "json" else to_csv(rows)
    if cfg.out:
        atomic_write(_resolve(cfg.out), text)
    else:
        stdout.write(text)


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    if cfg.subcommand not in COMMANDS:
        stderr.write(f"error: unknown subcommand {cfg.subcommand!r}\n")
        return EXIT_INVALID
    try:
        result = COMMANDS[cfg.subcommand](cfg)
        if cfg.subcommand == "assemble" and cfg.out and cfg.out.endswith(".mtx"):
            doc, _, M = result
            write_matrix_market(_resolve(cfg.out), M, comment=f"{cfg.matrix} {doc['problem']} {doc['family']} N={doc['N']}")
            stdout.write(to_json(doc) + "\n")
            return EXIT_OK
        doc, rows = result[0], result[1]
        _emit(cfg, doc, rows, stdout)
        return EXIT_OK
    except (ValidationError, DenseCapError, SpectrumCapError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except NumericalFailure as exc:
        if len(exc.args) > 1 and cfg.out is None:
            stdout.write(to_json(exc.args[1]) + "\n")
        stderr.write(f"numerical failure: {exc.args[0]}\n")
        return EXIT_NUMERICAL
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


def main(argv=None) -> int:
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
