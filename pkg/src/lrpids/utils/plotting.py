"""
lrpids Plotting Module.

File-only vector plots of command results (matplotlib, Agg backend, SVG).
Text stays text in the SVG and element ids are salted with the config digest,
so identical configs give identical files.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..core.errors import EmptyDataError, InvalidInputError  # noqa: E402
from ..engine.diagnostics import LifshitzFit  # noqa: E402
from ..engine.ids import ConvergenceRow  # noqa: E402
from ..engine.spectra import StepFunction  # noqa: E402

logger = logging.getLogger("lrpids")

PlotStyle = Literal["ids-curve", "convergence", "loglog-lifshitz"]
PLOT_STYLES = ("ids-curve", "convergence", "loglog-lifshitz")


@dataclass
class PlotInfo:
    """What was drawn: the file, the number of data points and the annotation text."""
    path: Path
    points: int
    annotation: Optional[str] = None


def _step_plot(ax, curve: StepFunction) -> int:
    if curve.breakpoints.size == 0:
        raise EmptyDataError("cannot plot an empty IDS curve")
    b, c = curve.breakpoints, curve.cumulative
    span = float(b[-1] - b[0]) or 1.0
    x = np.concatenate([[b[0] - 0.05 * span], b, [b[-1] + 0.05 * span]])
    y = np.concatenate([[0.0], c, [c[-1]]])
    ax.step(x, y, where="post", color="#1f77b4", lw=1.2)
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel(r"$F(\lambda)$")
    ax.set_ylim(-0.02, 1.02)
    return int(b.size)


def _convergence_plot(ax, rows: Sequence[ConvergenceRow]) -> int:
    if not rows:
        raise EmptyDataError("cannot plot an empty convergence table")
    points = [(r.n, r.sup_distance) for r in rows if math.isfinite(r.sup_distance)]
    ns = [r.n for r in rows]
    ax.plot(ns, [r.error_bound for r in rows], "s--", color="#7f7f7f", lw=1.0, label="error bound")
    if points:
        x, y = zip(*points)
        ax.plot(x, y, "o-", color="#d62728", lw=1.2, label="sup distance to previous n")
    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.legend(frameon=False)
    return len(points)


def _lifshitz_plot(ax, fit: LifshitzFit) -> Optional[str]:
    usable = fit.usable
    if not np.any(usable):
        raise EmptyDataError("no usable Lifshitz points to plot")
    x, y = fit.log_E[usable], fit.loglog_G[usable]
    ax.plot(x, y, "o", color="#2ca02c", label="data")
    grid = np.linspace(x.min(), x.max(), 2)
    ax.plot(grid, fit.intercept + fit.slope * grid, "-", color="black", lw=1.0, label="least squares")
    annotation = f"slope = {fit.slope:.3f}"
    ax.text(0.05, 0.92, annotation, transform=ax.transAxes)
    ax.set_xlabel(r"$\log E$")
    ax.set_ylabel(r"$\log(-\log G(E))$")
    ax.legend(frameon=False, loc="lower left")
    return annotation


def emit_plot(
    data: Union[StepFunction, Sequence[ConvergenceRow], LifshitzFit],
    style: PlotStyle,
    path: Union[str, Path],
    config_digest: str = "",
    title: Optional[str] = None,
) -> PlotInfo:
    """
    Writes a self-contained SVG plot.

    Args:
        data: StepFunction for "ids-curve", convergence rows for
            "convergence", a LifshitzFit for "loglog-lifshitz".
        style: Plot style.
        path: Target .svg file.
        config_digest: Embedded in the SVG metadata and used as id salt.
        title: Optional axes title.

    Returns:
        PlotInfo: The file, the plotted point count and any annotation.

    Raises:
        EmptyDataError: If there is nothing to draw.
    """
    if style not in PLOT_STYLES:
        raise InvalidInputError(f"unknown plot style {style!r}; expected one of {', '.join(PLOT_STYLES)}")
    path = Path(path)
    rc = {"svg.fonttype": "none", "svg.hashsalt": config_digest or "lrpids"}
    with plt.rc_context(rc):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        try:
            annotation = None
            if style == "ids-curve":
                points = _step_plot(ax, data)
            elif style == "convergence":
                points = _convergence_plot(ax, list(data))
            else:
                points = int(np.count_nonzero(data.usable)) if np.any(data.usable) else 0
                annotation = _lifshitz_plot(ax, data)
            if title:
                ax.set_title(title)
            fig.tight_layout()
            fig.savefig(
                path,
                format="svg",
                metadata={"Date": None, "Description": f"config_digest={config_digest}"},
            )
        finally:
            plt.close(fig)
    logger.debug(f"Wrote {style} plot {path} ({points} points)")
    return PlotInfo(path=path, points=points, annotation=annotation)
