"""Adaptive verification driver: work queue, batched decisions, refinement.

A coordinator owns the frontier of undecided simplices, hands them to
stateless workers in volume-ordered batches, and merges the per-simplex
verdicts back in a fixed order, so the report is identical for any worker
count. Inconclusive simplices are bisected along their longest edge until
certified, refuted by an exactly re-validated counterexample, or out of
depth/volume budget.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .condition import (CERTIFIED, COUNTEREXAMPLE, ConditionSurrogate, Decision,
                        ExactEvaluator, build_surrogate, decide_simplex)
from .dynamics import DynamicsModel
from .mesh import Simplex, bisect_longest_edge, classify_safe, triangulate_box
from .network import NetworkDef
from .safesets import INSIDE, SafeSetDef
from .value_bounds import propagate_value_bounds

STATUS_VALID = "valid"
STATUS_INVALID = "invalid"
STATUS_INCONCLUSIVE = "inconclusive"

EXIT_CODES = {STATUS_VALID: 0, STATUS_INVALID: 1, STATUS_INCONCLUSIVE: 2}

# Leaf statuses in mesh exports.
LEAF_CERTIFIED = "certified"
LEAF_COUNTEREXAMPLE = "counterexample"
LEAF_INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class VerifierConfig:
    eta: float = 0.5
    alpha: float = 1.0
    max_depth: int = 60
    volume_floor: float | None = None  # None: 1e-12 x initial cell volume
    batch_size: int = 64
    worker_count: int = 1
    epsilon_strict: float = 0.0
    epsilon_fp: float = 0.0
    initial_grid: tuple[int, ...] | None = None
    exhaustive: bool = False

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if self.max_depth < 0 or self.batch_size < 1 or self.worker_count < 1:
            raise ValueError("max_depth, batch_size, worker_count out of range")
        if self.epsilon_strict < 0.0 or self.epsilon_fp < 0.0:
            raise ValueError("epsilon margins must be non-negative")
        if self.volume_floor is not None and self.volume_floor < 0.0:
            raise ValueError("volume_floor must be non-negative")
        if self.initial_grid is not None:
            grid = tuple(int(g) for g in self.initial_grid)
            if any(g < 1 for g in grid):
                raise ValueError("initial_grid entries must be positive")
            object.__setattr__(self, "initial_grid", grid)


@dataclass
class VerdictReport:
    status: str
    counterexamples: list[dict]
    regions_total: int
    regions_certified: int
    certified_fraction: float
    wall_time: float
    per_simplex: list[dict]
    stats: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "counterexamples": self.counterexamples,
            "regions_total": self.regions_total,
            "regions_certified": self.regions_certified,
            "certified_fraction": self.certified_fraction,
            "wall_time": self.wall_time,
            "stats": self.stats,
            "metadata": self.metadata,
            "per_simplex": self.per_simplex,
        }


def _leaf_record(s: Simplex, safe_class: str, status: str) -> dict:
    return {
        "id": s.id,
        "parent_id": s.parent_id,
        "depth": s.depth,
        "vertices": s.vertices.tolist(),
        "safe_class": safe_class,
        "status": status,
    }


def _process_simplex(
    s: Simplex,
    net: NetworkDef,
    model: DynamicsModel,
    safe: SafeSetDef,
    cfg: VerifierConfig,
    exact: ExactEvaluator,
) -> tuple[str, Decision]:
    """Classify one simplex and decide it; pure apart from reading shared inputs."""
    safe_class = classify_safe(s, safe)
    value_data = propagate_value_bounds(net, s)
    surrogate = build_surrogate(
        net, model, s, cfg.eta, cfg.alpha, cfg.epsilon_fp,
        value_data=value_data, with_invariance=safe_class == INSIDE,
    )
    decision = decide_simplex(surrogate, s, safe_class, exact, cfg.epsilon_strict)
    return safe_class, decision


def verify_batch(
    simplices: list[Simplex],
    net: NetworkDef,
    model: DynamicsModel,
    safe: SafeSetDef,
    cfg: VerifierConfig,
    exact: ExactEvaluator | None = None,
    pool: ThreadPoolExecutor | None = None,
) -> list[tuple[str, Decision]]:
    """Decide a batch of simplices; results match the one-at-a-time order."""
    if exact is None:
        exact = ExactEvaluator(net, model, safe, cfg.alpha)
    if not simplices:
        return []
    if pool is not None:
        return list(pool.map(
            lambda s: _process_simplex(s, net, model, safe, cfg, exact), simplices
        ))
    return [_process_simplex(s, net, model, safe, cfg, exact) for s in simplices]


def verify(
    net: NetworkDef,
    model: DynamicsModel,
    safe: SafeSetDef,
    cfg: VerifierConfig | None = None,
    metadata: dict | None = None,
) -> VerdictReport:
    """Verify a candidate barrier network against a system and safe set.

    Returns a deterministic report: statuses depend only on the inputs and
    config, never on worker scheduling. ``status == "valid"`` means every
    final simplex was certified; ``"invalid"`` carries exactly re-validated
    counterexamples; otherwise the refinement budget ran out somewhere.
    """
    cfg = cfg or VerifierConfig()
    if net.output_dim != 1:
        raise ValueError("candidate barrier networks must have scalar output")
    if net.input_dim != model.state_dim or model.state_dim != safe.dim:
        raise ValueError(
            f"dimension mismatch: network {net.input_dim}, model {model.state_dim}, "
            f"safe set {safe.dim}"
        )

    start = time.perf_counter()
    frontier = triangulate_box(safe.state_lo, safe.state_hi, cfg.initial_grid)
    next_id = len(frontier)
    box_volume = float(np.prod(safe.state_hi - safe.state_lo))
    cells = int(np.prod(cfg.initial_grid)) if cfg.initial_grid else 1
    floor = cfg.volume_floor if cfg.volume_floor is not None \
        else 1e-12 * box_volume / cells

    exact = ExactEvaluator(net, model, safe, cfg.alpha)
    pool = ThreadPoolExecutor(cfg.worker_count) if cfg.worker_count > 1 else None

    leaves: list[dict] = []
    counterexamples: list[dict] = []
    regions_total = 0
    regions_certified = 0
    volume_by_status = {LEAF_CERTIFIED: 0.0, LEAF_COUNTEREXAMPLE: 0.0,
                        LEAF_INCONCLUSIVE: 0.0}
    stop = False

    try:
        while frontier and not stop:
            frontier.sort(key=lambda s: (-s.volume, s.id))
            batch = frontier[:cfg.batch_size]
            frontier = frontier[cfg.batch_size:]
            results = verify_batch(batch, net, model, safe, cfg, exact, pool)
            for s, (safe_class, decision) in zip(batch, results):
                regions_total += 1
                if decision.status == CERTIFIED:
                    regions_certified += 1
                    volume_by_status[LEAF_CERTIFIED] += s.volume
                    leaves.append(_leaf_record(s, safe_class, LEAF_CERTIFIED))
                elif decision.status == COUNTEREXAMPLE:
                    volume_by_status[LEAF_COUNTEREXAMPLE] += s.volume
                    leaves.append(_leaf_record(s, safe_class, LEAF_COUNTEREXAMPLE))
                    counterexamples.append(decision.evidence)
                    if not cfg.exhaustive:
                        stop = True
                else:
                    can_split = (s.depth < cfg.max_depth
                                 and s.volume / 2.0 > floor)
                    if can_split:
                        child_a, child_b = bisect_longest_edge(s, next_id, next_id + 1)
                        next_id += 2
                        frontier.extend((child_a, child_b))
                    else:
                        volume_by_status[LEAF_INCONCLUSIVE] += s.volume
                        leaves.append(_leaf_record(s, safe_class, LEAF_INCONCLUSIVE))
        # Anything still pending was never examined; it remains inconclusive.
        for s in frontier:
            volume_by_status[LEAF_INCONCLUSIVE] += s.volume
            leaves.append(_leaf_record(s, classify_safe(s, safe), LEAF_INCONCLUSIVE))
    finally:
        if pool is not None:
            pool.shutdown()

    if counterexamples:
        status = STATUS_INVALID
    elif volume_by_status[LEAF_INCONCLUSIVE] == 0.0 and all(
            leaf["status"] == LEAF_CERTIFIED for leaf in leaves):
        status = STATUS_VALID
    else:
        status = STATUS_INCONCLUSIVE

    fraction = 1.0 if status == STATUS_VALID else \
        volume_by_status[LEAF_CERTIFIED] / box_volume
    leaves.sort(key=lambda rec: rec["id"])
    report = VerdictReport(
        status=status,
        counterexamples=counterexamples,
        regions_total=regions_total,
        regions_certified=regions_certified,
        certified_fraction=fraction,
        wall_time=time.perf_counter() - start,
        per_simplex=leaves,
        stats={
            "volume_certified": volume_by_status[LEAF_CERTIFIED],
            "volume_counterexample": volume_by_status[LEAF_COUNTEREXAMPLE],
            "volume_inconclusive": volume_by_status[LEAF_INCONCLUSIVE],
            "volume_state_box": box_volume,
            "inconclusive_fraction": volume_by_status[LEAF_INCONCLUSIVE] / box_volume,
            "volume_floor": floor,
        },
        metadata=dict(metadata or {}),
    )
    return report


def write_report(report: VerdictReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=1)
        fh.write("\n")


def load_report(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_mesh_csv(per_simplex: list[dict], path) -> None:
    """Flatten leaf records to CSV: one row per simplex, vertices spread wide."""
    if not per_simplex:
        raise ValueError("no simplex records to export")
    n_verts = len(per_simplex[0]["vertices"])
    dim = len(per_simplex[0]["vertices"][0])
    header = ["id", "parent_id", "depth", "safe_class", "status"]
    header += [f"v{i}_x{j}" for i in range(n_verts) for j in range(dim)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for rec in per_simplex:
            row = [rec["id"], rec["parent_id"] if rec["parent_id"] is not None else "",
                   rec["depth"], rec["safe_class"], rec["status"]]
            row += [repr(x) for verts in rec["vertices"] for x in verts]
            writer.writerow(row)


def default_worker_count() -> int:
    """Worker default honoring the CBF_VERIFY_WORKERS environment variable."""
    env = os.environ.get("CBF_VERIFY_WORKERS", "")
    try:
        count = int(env)
    except ValueError:
        return 1
    return max(count, 1)
