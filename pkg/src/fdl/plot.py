"""Static SVG figure of a spectrum table (beta against dimension estimate)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_spectrum(table, out):
    """Write ``out`` as a standalone SVG and return the plotted series.

    Nonempty bins are drawn as markers; the dashed reference is 1 - beta p
    on [0, 1/p] in lp mode and the constant 1 on [0, 1] in ct mode.
    Output bytes depend only on the table (fixed hash salt, no date).
    """
    if not table.bins:
        raise ValueError("table has no bins")
    mode = table.mode
    full = [b for b in table.bins if b.count > 0]
    bx = np.array([b.beta_center for b in full])
    by = np.array([b.dim for b in full])
    rx = np.array([0.0, mode.beta_max])
    ry = mode.reference(rx)

    with plt.rc_context({"svg.hashsalt": "fdl-spectrum", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        ax.plot(rx, ry, "--", color="0.4", lw=1.2, gid="reference",
                label="1 - %gβ" % mode.p if mode.kind == "lp" else "1")
        ax.plot(bx, by, "o", color="C0", ms=5, gid="spectrum-markers", label="box-count")
        ax.set_xlim(-0.02, mode.beta_max + 0.02)
        ax.set_ylim(-0.05, 1.1)
        ax.set_xlabel("β")
        ax.set_ylabel("dimension estimate")
        ax.set_title(f"{mode.label()}  M={table.M}  N={table.N}", fontsize=9)
        ax.legend(loc="lower left", fontsize=8, frameon=False)
        fig.tight_layout()
        fig.savefig(Path(out), format="svg", metadata={"Date": None})
        plt.close(fig)
    return {"markers": (bx, by), "reference": (rx, ry)}
