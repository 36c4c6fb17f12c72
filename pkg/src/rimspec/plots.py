"""Minimal SVG emitters for quick inspection (plumbing, not a UI)."""

from __future__ import annotations


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_spectrum_1d(spec, path, oracle=None) -> str:
    """Line plot of a 1-D spectrum (± std error band, optional oracle curve)."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.2))
    w = spec.axes[0]
    ax.plot(w, spec.values, lw=1.2, label="estimate")
    ax.fill_between(
        w,
        spec.values - spec.std_errors,
        spec.values + spec.std_errors,
        alpha=0.25,
        lw=0,
    )
    if oracle is not None:
        ax.plot(w, oracle, "k--", lw=1.0, label="oracle")
        ax.legend(frameon=False)
    ax.set_xlabel("omega (rad/us)")
    ax.set_ylabel("S")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return str(path)


def plot_tensor_1d(tensor, path, oracle=None) -> str:
    """Error-bar plot of a 1-lag-axis correlation tensor."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.2))
    lags = tensor.axes[0]
    ax.errorbar(lags, tensor.values, yerr=3 * tensor.std_errors, fmt="o", ms=3,
                lw=1, capsize=2, label="estimate ± 3σ")
    if oracle is not None:
        ax.plot(lags, oracle, "k--", lw=1.0, label="oracle")
    ax.legend(frameon=False)
    ax.set_xlabel("lag (us)")
    ax.set_ylabel("C")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return str(path)


def plot_heatmap(x, y, values, path, xlabel="", ylabel="") -> str:
    """2-D heatmap (e.g. bispectrum or two-lag cumulant slice)."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4.4, 3.6))
    mesh = ax.pcolormesh(x, y, values.T, shading="auto")
    fig.colorbar(mesh, ax=ax)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return str(path)
