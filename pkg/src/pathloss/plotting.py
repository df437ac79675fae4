"""Scatter-plus-fit figures and plain-text curve files for fitted surveys.

Figures are rendered off-screen (Agg) and saved to disk; nothing is shown
interactively.
"""

import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .data import POLARIZATION_ORDER, SCENARIO_ORDER  # noqa: E402
from .models import predict  # noqa: E402

LOG = logging.getLogger(__name__)

SCENARIO_STYLE = {
    "LOS": dict(color="tab:blue", marker="o"),
    "NLOS": dict(color="tab:red", marker="^"),
}


def fit_figure(model_id, datasets, reports, path, title=None):
    """One panel per polarization, LOS and NLOS surveys overlaid with their fitted lines.

    ``datasets`` and ``reports`` are dicts keyed by ``(Polarization, Scenario)``.
    Cells without a report are drawn as bare scatter.
    """
    pols = [p for p in POLARIZATION_ORDER if any((p, s) in datasets for s in SCENARIO_ORDER)]
    if not pols:
        raise ValueError("nothing to plot")
    fig, axes = plt.subplots(len(pols), 1, figsize=(6.4, 2.8 * len(pols)), squeeze=False, sharex=True)
    for ax, pol in zip(axes[:, 0], pols):
        for scen in SCENARIO_ORDER:
            ds = datasets.get((pol, scen))
            if ds is None:
                continue
            style = SCENARIO_STYLE[scen.value]
            ax.semilogx(ds.distance_m, ds.path_loss_db, linestyle="none", marker=style["marker"],
                        markersize=3, alpha=0.5, color=style["color"], label=f"{scen.value} data")
            rep = reports.get((pol, scen))
            if rep is None:
                continue
            d = np.geomspace(ds.distance_m.min(), ds.distance_m.max(), 200)
            label = f"{scen.value} {model_id}"
            if model_id == "FI":
                label += f" (alpha={rep.params.alpha_db:.2f}, beta={rep.params.beta:.2f}"
            else:
                label += f" (n={rep.params.n:.2f}"
            label += f", sigma={rep.sigma_db:.2f} dB)"
            ax.semilogx(d, predict(rep.params, d), color=style["color"], linewidth=1.5, label=label)
        ax.set_ylabel("Path loss [dB]")
        ax.set_title(f"{model_id} {pol.label}", fontsize=10)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=7, loc="lower right")
    axes[-1, 0].set_xlabel("TX-RX distance [m]")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    LOG.debug("wrote %s", path)
    return path
