"""Human formatting of counts and scalars."""

import math


def format_flops(flops: float | None) -> str:
    """
    Format a flop count with an SI suffix.

    Args:
        flops: Number of floating point operations

    Returns:
        Formatted string such as ``1.23e9`` rendered as ``1.23 G``
    """
    if flops is None:
        return "-"
    for threshold, suffix in ((1e12, "T"), (1e9, "G"), (1e6, "M"), (1e3, "k")):
        if abs(flops) >= threshold:
            return f"{flops / threshold:.2f} {suffix}"
    return f"{flops:.0f}"


def format_scalar(value: float | None, digits: int = 3) -> str:
    """Scientific notation, with '-' for missing or non-finite values."""
    if value is None or not math.isfinite(value):
        return "-"
    return f"{value:.{digits}e}"


def format_mean(value: float | None, digits: int = 1) -> str:
    if value is None:
        return "-"
    return f"{value:.{digits}f}"


def format_save(save_min: float | None, save_avg: float | None, save_max: float | None) -> str:
    """min-avg-max triple, or FAIL when no pair converged."""
    if save_avg is None:
        return "FAIL"
    return f"{save_min:.1f}-{save_avg:.1f}-{save_max:.1f}"
