"""Optional PNG rendering of the plot tables.

The CSV tables written by :meth:`hemtkit.report.PlotData.write_csv` are the
primary plot output; this module draws the same tables with matplotlib for a
quick look. matplotlib is imported only when a figure is requested.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ValidationError

_LABELS = {
    "vgs_V": "$V_{GS}$ (V)", "vds_V": "$V_{DS}$ (V)", "gm_S": "$g_m$ (S)",
    "log10_id_A": "log$_{10}$ $I_D$ (A)", "id_A": "$I_D$ (A)", "q_C_cm2": "Q (C/cm$^2$)",
    "mu_cm2_Vs": r"$\mu_e$ (cm$^2$/V$\cdot$s)", "z_nm": "z (nm)", "ec_eV": "$E_c$ (eV)",
    "n_cm3": "n (cm$^{-3}$)",
}


def _pyplot():
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:     # pragma: no cover - depends on the environment
        raise ValidationError("--figures needs matplotlib installed") from exc
    return plt


def render(plot, directory) -> Path:
    """Draw one :class:`~hemtkit.report.PlotData` table to ``<name>.png``.

    Three-column tables whose first column is a bias are drawn as one line
    per bias; the band-diagram table draws E_c against depth.
    """
    plt = _pyplot()
    data = np.array([[np.nan if v is None else v for v in row] for row in plot.rows],
                    dtype=float).reshape(-1, len(plot.header))
    fig, ax = plt.subplots(figsize=(5.0, 3.6), dpi=120)
    h = plot.header
    if h[0] in ("vds_V", "vgs_V") and len(h) == 3:
        for bias in np.unique(data[:, 0]):
            sel = data[:, 0] == bias
            ax.plot(data[sel, 1], data[sel, 2], lw=1.0, label=f"{bias:g} V")
        ax.set_xlabel(_LABELS.get(h[1], h[1]))
        ax.set_ylabel(_LABELS.get(h[2], h[2]))
        if len(np.unique(data[:, 0])) <= 12:
            ax.legend(fontsize=6, title=_LABELS.get(h[0], h[0]), title_fontsize=6)
    else:
        ax.plot(data[:, 0], data[:, 1], lw=1.0)
        ax.set_xlabel(_LABELS.get(h[0], h[0]))
        ax.set_ylabel(_LABELS.get(h[1], h[1]))
    ax.set_title(plot.name, fontsize=9)
    fig.tight_layout()
    path = Path(directory) / f"{plot.name}.png"
    # no software/date metadata, so reruns produce identical files
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def render_all(plots, directory):
    Path(directory).mkdir(parents=True, exist_ok=True)
    return [render(p, directory) for p in plots]
