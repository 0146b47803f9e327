import numpy as np
import pytest

from birkhoff_hessian.kkt import residual

_ACCEPTANCE_LINES: list[str] = []


def fd_jacobian(chi: np.ndarray, problem, ops, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the residual, column by column."""
    chi = np.asarray(chi, dtype=float)
    n = chi.size
    J = np.empty((n, n))
    for j in range(n):
        step = h * max(1.0, abs(chi[j]))
        e = np.zeros(n)
        e[j] = step
        J[:, j] = (residual(chi + e, problem, ops) - residual(chi - e, problem, ops)) / (2 * step)
    return J


def random_point(n_nodes: int, rng: np.random.Generator, positive_x: bool = False) -> np.ndarray:
    chi = rng.uniform(-1.0, 1.0, 5 * n_nodes + 5)
    if positive_x:
        chi[:n_nodes] = rng.uniform(0.3, 1.5, n_nodes)
    return chi


@pytest.fixture
def acceptance_report():
    """Record one PASS/FAIL line per criterion; printed in the terminal summary."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
