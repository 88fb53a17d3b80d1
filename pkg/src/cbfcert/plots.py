"""Figure rendering for verification runs.

Produces the three standard panels: barrier heatmap with its zero level set,
exact invariance-condition heatmap, and the refined mesh colored by verdict.
Two-dimensional systems are drawn over the whole state box; higher-dimensional
ones are sliced through a fixed point along two chosen axes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import PolyCollection

from .dynamics import DynamicsModel
from .network import NetworkDef, analytic_gradient, forward
from .safesets import SafeSetDef

STATUS_COLORS = {
    "certified": "#2e8b57",
    "counterexample": "#c62828",
    "inconclusive": "#e6a23c",
}


def default_slice_dims(dim: int) -> tuple[int, int]:
    """Axes drawn for sliced figures: position-like coordinates first."""
    return (0, 2) if dim >= 4 else (0, 1)


def _grid_points(safe: SafeSetDef, dims: tuple[int, int], fixed: np.ndarray,
                 resolution: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xs = np.linspace(safe.state_lo[dims[0]], safe.state_hi[dims[0]], resolution)
    ys = np.linspace(safe.state_lo[dims[1]], safe.state_hi[dims[1]], resolution)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.tile(fixed, (gx.size, 1))
    pts[:, dims[0]] = gx.ravel()
    pts[:, dims[1]] = gy.ravel()
    return gx, gy, pts


def _invariance_values(net: NetworkDef, model: DynamicsModel, alpha: float,
                       pts: np.ndarray) -> np.ndarray:
    values = forward(net, pts)[:, 0]
    grads = analytic_gradient(net, pts)
    fx = model.eval_f(pts)
    expr = np.einsum("bn,bn->b", grads, fx)
    if model.control_dim:
        w = np.einsum("bn,bnm->bm", grads, model.eval_g(pts))
        expr += np.maximum(w * model.control_lo, w * model.control_hi).sum(axis=1)
    return expr + alpha * values


def _mesh_polys(per_simplex: list[dict], dims: tuple[int, int],
                fixed: np.ndarray, dim: int) -> tuple[list, list]:
    polys, colors = [], []
    other = [k for k in range(dim) if k not in dims]
    for rec in per_simplex:
        if rec["status"] not in STATUS_COLORS:
            continue
        verts = np.asarray(rec["vertices"], dtype=float)
        if other:
            lo, hi = verts.min(axis=0), verts.max(axis=0)
            if any(not lo[k] <= fixed[k] <= hi[k] for k in other):
                continue
        polys.append(verts[:, list(dims)])
        colors.append(STATUS_COLORS[rec["status"]])
    return polys, colors


def render_verification_figure(
    report: dict,
    net: NetworkDef,
    model: DynamicsModel,
    safe: SafeSetDef,
    alpha: float,
    out_path,
    slice_dims: tuple[int, int] | None = None,
    slice_point: np.ndarray | None = None,
    resolution: int = 160,
) -> None:
    """Write the tri-panel figure (barrier, invariance condition, mesh)."""
    dim = safe.dim
    dims = slice_dims if slice_dims is not None else default_slice_dims(dim)
    if len(dims) != 2 or not all(0 <= k < dim for k in dims) or dims[0] == dims[1]:
        raise ValueError(f"slice dims {dims} invalid for a {dim}-d state space")
    fixed = np.asarray(slice_point, dtype=float) if slice_point is not None \
        else 0.5 * (safe.state_lo + safe.state_hi)
    if fixed.shape != (dim,):
        raise ValueError("slice point must have one coordinate per state dimension")

    gx, gy, pts = _grid_points(safe, dims, fixed, resolution)
    barrier = forward(net, pts)[:, 0].reshape(gx.shape)
    invariance = _invariance_values(net, model, alpha, pts).reshape(gx.shape)

    fig, axes = plt.subplots(1, 3, figsize=(15, 4.6))
    titles = ("barrier value", "invariance condition", "refined mesh")
    for ax, title in zip(axes, titles):
        ax.set_title(title)
        ax.set_xlabel(f"x[{dims[0]}]")
        ax.set_ylabel(f"x[{dims[1]}]")
        ax.set_xlim(safe.state_lo[dims[0]], safe.state_hi[dims[0]])
        ax.set_ylim(safe.state_lo[dims[1]], safe.state_hi[dims[1]])

    for ax, field in ((axes[0], barrier), (axes[1], invariance)):
        scale = max(abs(float(field.min())), abs(float(field.max())), 1e-12)
        im = ax.pcolormesh(gx, gy, field, cmap="RdBu", vmin=-scale, vmax=scale,
                           shading="auto")
        ax.contour(gx, gy, barrier, levels=[0.0], colors="black", linewidths=1.2)
        fig.colorbar(im, ax=ax)

    polys, colors = _mesh_polys(report.get("per_simplex", []), dims, fixed, dim)
    if polys:
        axes[2].add_collection(PolyCollection(
            polys, facecolors=colors, edgecolors="white", linewidths=0.2, alpha=0.85,
        ))
    handles = [plt.Line2D([], [], marker="s", linestyle="", color=c, label=s)
               for s, c in STATUS_COLORS.items()]
    axes[2].legend(handles=handles, loc="upper right", fontsize=8)

    if dim > 2:
        others = ", ".join(f"x[{k}]={fixed[k]:.3g}" for k in range(dim)
                           if k not in dims)
        fig.suptitle(f"slice at {others}")
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
