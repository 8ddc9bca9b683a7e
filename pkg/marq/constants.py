"""Shared constants for marq."""

from dataclasses import dataclass


@dataclass
class ColumnDefinition:
    """Definition of a table/CSV column."""

    key: str
    label: str
    width: int = 0  # 0 means auto-width


# One row per iteration record; order is the CSV column order.
TRACE_COLUMNS: list[ColumnDefinition] = [
    ColumnDefinition("level", "Level", 5),
    ColumnDefinition("iterate_index", "k", 5),
    ColumnDefinition("parent_iteration", "Parent", 6),
    ColumnDefinition("model_kind", "Model", 7),
    ColumnDefinition("rho", "rho", 10),
    ColumnDefinition("lambda", "lambda", 10),
    ColumnDefinition("step_norm", "||s||", 10),
    ColumnDefinition("f_value", "f", 14),
    ColumnDefinition("grad_norm", "||grad f||", 10),
    ColumnDefinition("successful", "OK", 3),
    ColumnDefinition("flops_this_iter", "Flops", 10),
    ColumnDefinition("recursive_flops", "Flops below", 10),
    ColumnDefinition("pred", "pred", 10),
    ColumnDefinition("ared", "ared", 10),
    ColumnDefinition("coarse_step_norm", "||s_H||", 10),
    ColumnDefinition("restricted_grad_norm", "||R grad f||", 10),
]

# One row per (seed, method) run in a reproduction.
RUN_COLUMNS: list[ColumnDefinition] = [
    ColumnDefinition("seed", "Seed", 6),
    ColumnDefinition("method", "Method", 6),
    ColumnDefinition("status", "Status", 14),
    ColumnDefinition("it_T", "it_T", 5),
    ColumnDefinition("it_f", "it_f", 5),
    ColumnDefinition("rmse", "RMSE", 10),
    ColumnDefinition("total_flops", "Flops", 12),
    ColumnDefinition("wall_time", "Time [s]", 9),
]

# Process exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAIL = 2

# exp() overflows float64 just above 709.78
EXP_OVERFLOW_LIMIT = 700.0

# Largest problem dimension the grid-search subproblem oracle accepts
ORACLE_MAX_DIM = 3

# Method labels
METHOD_ARQ = "arq"
METHOD_MARQ = "marq"
