"""Optional PNG renderings of the CSV outputs (``--figures``)."""

import os

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_field(path, field, candidates=()):
    """log10 |discriminant| over the scan plane with candidates marked."""
    plt = _pyplot()
    u, v = field.plane.grid
    mag = np.log10(np.abs(field.values) + 1e-300)
    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(u, v, mag.T, shading="auto", cmap="viridis", vmin=np.percentile(mag, 1))
    fig.colorbar(mesh, ax=ax, label="log10 |disc|")
    i, j = field.plane.plane.indices
    for c in candidates:
        marker = "r*" if c.kind == "junction" else "w."
        ax.plot(c.location[i], c.location[j], marker, ms=10 if c.kind == "junction" else 3)
    ax.set_xlabel(field.plane.axes[0])
    ax.set_ylabel(field.plane.axes[1])
    _save(fig, path)
    return path


def plot_loci(path, trace, title=None):
    """Eigenvalue loci in the complex plane, one colour per sheet."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 5))
    for k in range(trace.n):
        s = trace.sheets[:, k]
        line, = ax.plot(s.real, s.imag, lw=1.2, label=f"sheet {k + 1}")
        ax.plot(s.real[0], s.imag[0], "o", color=line.get_color())
        ax.plot(s.real[-1], s.imag[-1], "x", color=line.get_color())
    ax.set_xlabel("Re lambda")
    ax.set_ylabel("Im lambda")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)
    return path


def plot_propagation(path, rec):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for k in range(rec.states.shape[1]):
        ax.semilogy(rec.xs, np.abs(rec.states[:, k]) + 1e-300, label=f"|E{k + 1}|")
    ax.set_xlabel("x")
    ax.legend(fontsize=8)
    _save(fig, path)
    return path


def _save(fig, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    tmp = path + ".tmp.png"
    fig.savefig(tmp, dpi=120, bbox_inches="tight")
    os.replace(tmp, path)
    fig.clf()
    import matplotlib.pyplot as plt
    plt.close(fig)
