"""Figures rendered next to the CSV output of a run.

The CSV files are the canonical result; these plots are a convenience and
are only produced on request.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_gauge(series, path):
    data = series.as_array()
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
    ax1.plot(data[:, 0], data[:, 2], lw=1)
    ax1.set_ylabel("discharge [m$^3$/s]")
    ax2.plot(data[:, 0], data[:, 1], lw=1)
    ax2.set_ylabel("piezometric head [m]")
    ax2.set_xlabel("t [s]")
    ax1.set_title(f"gauge at x = {series.x:g} m")
    return _save(fig, path)


def plot_snapshots(snapshots, geometry, path):
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(geometry.x, geometry.invert, "k-", lw=0.8)
    ax.plot(geometry.x, geometry.invert + 2 * geometry.R, "k-", lw=0.8)
    for t, snap in sorted(snapshots.items()):
        ax.plot(snap["x"], snap["piezo"], lw=1, label=f"t = {t:g} s")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("piezometric head [m]")
    ax.legend(fontsize="small")
    return _save(fig, path)


def plot_symmetry(rows, path):
    fig, ax = plt.subplots(figsize=(7, 3))
    t = [r[0] for r in rows]
    dev = [r[1] for r in rows]
    ax.plot(t, dev, lw=1)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("max |A_i - A_mirror| [m$^2$]")
    return _save(fig, path)


def render(result, geometry, out_dir):
    """Write every figure of a run under ``out_dir/figures``; returns paths."""
    fig_dir = out_dir / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    paths = [plot_gauge(g, fig_dir / f"gauge_{g.x:g}.png") for g in result.gauges]
    if result.snapshots:
        paths.append(plot_snapshots(result.snapshots, geometry, fig_dir / "snapshots.png"))
    if result.symmetry:
        paths.append(plot_symmetry(result.symmetry, fig_dir / "symmetry.png"))
    return paths
