"""Storage and operation-count estimates for the Hessian and the linear solve."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

INT64_MAX = 2**63 - 1


def memory_estimate(N_x: int, N_u: int, N_n: int, bytes_per_value: int = 8) -> int:
    """Bytes needed for the node-wise Hamiltonian blocks.

    (2 N_x^2 + 2 N_x N_u + N_u^2) values per node, N_n nodes.
    """
    for name, val, lo in (("N_x", N_x, 1), ("N_u", N_u, 0), ("N_n", N_n, 1), ("bytes_per_value", bytes_per_value, 1)):
        if int(val) != val or val < lo:
            raise ValueError(f"{name} must be an integer >= {lo}, got {val!r}")
    per_node = 2 * N_x * N_x + 2 * N_x * N_u + N_u * N_u
    total = per_node * int(N_n) * int(bytes_per_value)
    if total > INT64_MAX:
        raise OverflowError(f"memory estimate {total} exceeds 64-bit range")
    return total


@dataclass(frozen=True)
class Table1Row:
    n: int
    mem_n_GB: float
    mem_n2_GB: float
    t_n: float
    t_nlogn: float
    t_n2: float
    t_n3: float

    def to_dict(self) -> dict:
        return asdict(self)


def table1_row(n: int, flops: float = 1e12, bytes_per_value: int = 8) -> Table1Row:
    """Memory in GB for n and n^2 reals, and seconds for n^k work at ``flops``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    n = int(n)
    return Table1Row(
        n=n,
        mem_n_GB=bytes_per_value * n / 1e9,
        mem_n2_GB=bytes_per_value * float(n) ** 2 / 1e9,
        t_n=n / flops,
        t_nlogn=n * math.log(n) / flops,
        t_n2=float(n) ** 2 / flops,
        t_n3=float(n) ** 3 / flops,
    )


TABLE1_SIZES = (1_000, 10_000, 100_000, 1_000_000)


def round_sig(x: float, sig: int = 1) -> float:
    if x == 0:
        return 0.0
    return round(x, sig - 1 - int(math.floor(math.log10(abs(x)))))
