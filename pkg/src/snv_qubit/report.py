"""Render fit results as text and key=value reports."""

import math
import os


def generate_report(result, title=None, fmt="text"):
    """Format a FitResult.

    Args:
        result: FitResult from fitting.least_squares or a models helper
        title: heading for the text report (default: the model name)
        fmt: 'text' or 'kv'

    Returns:
        Formatted report string.
    """
    if fmt == "kv":
        return _generate_kv(result)
    return _generate_text(result, title or result.model_name)


def _fmt(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return format(value, ".10g")


def _generate_kv(result):
    """Machine-readable report, one ``key=value`` per line."""
    lines = [
        f"model={result.model_name}",
        f"converged={'true' if result.converged else 'false'}",
        f"iterations={result.iterations}",
        f"reduced_chi2={_fmt(result.reduced_chi2)}",
        f"degenerate={'true' if result.degenerate else 'false'}",
    ]
    for name in result.param_names:
        lines.append(f"{name}={_fmt(result[name])}")
        lines.append(f"{name}_err={_fmt(result.error(name))}")
    for name, (value, error) in result.derived.items():
        lines.append(f"{name}={_fmt(value)}")
        lines.append(f"{name}_err={_fmt(error)}")
    return "\n".join(lines) + "\n"


def _generate_text(result, title):
    """Human-readable report with value(error) columns."""
    if result.converged:
        status = "converged"
    elif result.stalled:
        status = "NOT converged (damping limit)"
    else:
        status = "NOT converged (iteration cap)"
    lines = [
        f"Fit: {title}",
        f"  {status} after {result.iterations} iterations, "
        f"reduced chi2 = {_fmt(result.reduced_chi2)}",
    ]
    if result.degenerate:
        lines.append("  WARNING: degenerate fit, some parameters are unidentifiable")
    lines.append("")
    width = max(len(n) for n in list(result.param_names) + list(result.derived)) + 2
    for name in result.param_names:
        lines.append(f"  {name:<{width}} {_fmt(result[name]):>16} +- {_fmt(result.error(name))}")
    if result.derived:
        lines.append("")
        for name, (value, error) in result.derived.items():
            lines.append(f"  {name:<{width}} {_fmt(value):>16} +- {_fmt(error)}")
    return "\n".join(lines) + "\n"


def write_report(result, directory, stem, title=None):
    """Write ``<stem>.fit.txt`` and ``<stem>.fit.kv``; return the file names."""
    names = []
    for fmt, suffix in (("text", "fit.txt"), ("kv", "fit.kv")):
        name = f"{stem}.{suffix}"
        with open(os.path.join(directory, name), "w") as f:
            f.write(generate_report(result, title, fmt))
        names.append(name)
    return names
