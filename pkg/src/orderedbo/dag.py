"""Partial ordering over objectives and the sample-gating transform.

A PropertyDag records parent->child edges between objective indices.  A
child objective only counts when every ancestor passed, so posterior
samples are gated: wherever an ancestor's binary draw is 0, the child's
binary draw is forced to 0 and its value sample is replaced by an exact
0.0.  Gating is a pure array transform; fitted surrogates are untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["CycleError", "PropertyDag", "build_dag", "gated_betas", "resample"]


class CycleError(ValueError):
    """The edge list contains a directed cycle."""


@dataclass(frozen=True)
class PropertyDag:
    """Validated DAG over objective indices 0..K-1.

    predecessors[k] is the full ancestor closure, not just direct
    parents; levels[k] is the longest-path depth from any root.
    """

    n_objectives: int
    edges: tuple[tuple[int, int], ...]
    predecessors: tuple[frozenset, ...]
    levels: tuple[int, ...]
    topological_order: tuple[int, ...]

    @property
    def is_empty(self) -> bool:
        return not self.edges


def build_dag(n_objectives: int, edges) -> PropertyDag:
    """Validate an edge list and precompute closures, levels, topo order.

    Raises IndexError for an edge endpoint outside [0, n_objectives) and
    CycleError (naming one offending edge) when the graph is cyclic.
    """
    if n_objectives < 1:
        raise ValueError("need at least one objective")
    edge_list = []
    seen = set()
    for parent, child in edges:
        parent, child = int(parent), int(child)
        for node in (parent, child):
            if not 0 <= node < n_objectives:
                raise IndexError(
                    f"edge ({parent}, {child}) references objective {node}, "
                    f"valid range is 0..{n_objectives - 1}")
        if parent == child:
            raise CycleError(f"self-loop edge ({parent}, {child})")
        if (parent, child) not in seen:
            seen.add((parent, child))
            edge_list.append((parent, child))
    edge_list.sort()

    parents = {k: set() for k in range(n_objectives)}
    children = {k: set() for k in range(n_objectives)}
    for parent, child in edge_list:
        parents[child].add(parent)
        children[parent].add(child)

    # Kahn's algorithm with sorted ready set for a deterministic order
    in_deg = {k: len(parents[k]) for k in range(n_objectives)}
    ready = sorted(k for k in range(n_objectives) if in_deg[k] == 0)
    order = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        for child in sorted(children[node]):
            in_deg[child] -= 1
            if in_deg[child] == 0:
                ready.append(child)
        ready.sort()
    if len(order) < n_objectives:
        stuck = {k for k in range(n_objectives) if in_deg[k] > 0}
        parent, child = next((p, c) for p, c in edge_list
                             if p in stuck and c in stuck)
        raise CycleError(f"cycle detected through edge ({parent}, {child})")

    closures = [set() for _ in range(n_objectives)]
    levels = [0] * n_objectives
    for node in order:
        for parent in parents[node]:
            closures[node] |= closures[parent] | {parent}
        if parents[node]:
            levels[node] = 1 + max(levels[p] for p in parents[node])

    return PropertyDag(
        n_objectives=n_objectives,
        edges=tuple(edge_list),
        predecessors=tuple(frozenset(c) for c in closures),
        levels=tuple(levels),
        topological_order=tuple(order),
    )


def gated_betas(dag: PropertyDag, beta: np.ndarray) -> np.ndarray:
    """Force each binary sample to 0 wherever any ancestor's sample is 0.

    beta has objectives on the last axis; any number of leading axes.
    """
    beta = np.asarray(beta, dtype=float)
    if beta.shape[-1] != dag.n_objectives:
        raise ValueError(
            f"last axis is {beta.shape[-1]}, dag has {dag.n_objectives} "
            "objectives")
    out = beta.copy()
    for k in dag.topological_order:
        pred = dag.predecessors[k]
        if pred:
            ok = np.all(beta[..., sorted(pred)] > 0.5, axis=-1)
            out[..., k] = np.where(ok, beta[..., k], 0.0)
    return out


def resample(dag: PropertyDag, draw) -> np.ndarray:
    """Apply the ordering to a joint posterior draw, returning value samples.

    ``draw`` carries ``beta`` (binary, shape (..., K)) and ``rho`` (real,
    same shape).  A coordinate keeps its rho value only when its own beta
    is 1 and every ancestor's beta is 1; otherwise it becomes exactly 0.0.
    """
    beta = np.asarray(draw.beta, dtype=float)
    rho = np.asarray(draw.rho, dtype=float)
    if beta.shape != rho.shape:
        raise ValueError(f"beta shape {beta.shape} != rho shape {rho.shape}")
    if beta.shape[-1] != dag.n_objectives:
        raise ValueError(
            f"last axis is {beta.shape[-1]}, dag has {dag.n_objectives} "
            "objectives")
    keep = beta > 0.5
    for k in range(dag.n_objectives):
        pred = dag.predecessors[k]
        if pred:
            keep[..., k] &= np.all(beta[..., sorted(pred)] > 0.5, axis=-1)
    return np.where(keep, rho, 0.0)
