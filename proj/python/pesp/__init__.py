"""Probing-enhanced stochastic programs: exact and sampled search over probe sets."""

import json

from ._core import (
    Error,
    Instance,
    InvalidArgument,
    f_exact,
    greedy_pool,
    internal_ub,
    na_mip_mps,
    probe_cost,
    run_cli,
    solve_exact,
    stat_lb,
)


def cli(*args):
    """Runs a CLI command and returns (exit code, parsed JSON summary or None)."""
    code, out, _ = run_cli([str(a) for a in args])
    return code, (json.loads(out) if out.strip() else None)


__all__ = [
    "Error",
    "Instance",
    "InvalidArgument",
    "cli",
    "f_exact",
    "greedy_pool",
    "internal_ub",
    "na_mip_mps",
    "probe_cost",
    "run_cli",
    "solve_exact",
    "stat_lb",
]
