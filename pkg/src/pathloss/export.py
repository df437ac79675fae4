"""Plain-text curve and scatter files for external plotting tools.

Format: ``#``-prefixed comment lines, a ``#`` column-name line, then
whitespace-separated numeric rows.
"""

import numpy as np

from .errors import ValidationError
from .models import predict


def curve_points(params, d_min, d_max, step):
    """Distances from ``d_min`` in ``step`` increments, always ending at ``d_max``."""
    if not (np.isfinite(d_min) and np.isfinite(d_max)) or d_max < d_min:
        raise ValidationError("distance range must satisfy d_min <= d_max")
    if not step > 0:
        raise ValidationError("step must be positive")
    count = int((d_max - d_min) // step) + 1
    d = d_min + step * np.arange(count)
    d = np.append(d[d < d_max - 1e-9 * step], d_max)
    return d, np.atleast_1d(predict(params, d))


def format_columns(header, columns, comments=()):
    lines = [f"# {c}" for c in comments]
    lines.append("# " + " ".join(header))
    for row in zip(*columns):
        lines.append(" ".join(f"{v:.10g}" for v in row))
    return "\n".join(lines) + "\n"


def parse_columns(text):
    """Inverse of :func:`format_columns`; returns a 2-D float array."""
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.startswith("#")]
    return np.array(rows, dtype=float).reshape(len(rows), -1)
