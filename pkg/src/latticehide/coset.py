"""Nested lattice pairs and coset enumeration.

A nested code is a fine lattice, a coarse sublattice G_c = G_f J for an
integer subsampling matrix J, and the ordered list of |det J| coset
representatives that carry the message alphabet.  The self-similar case
J = alpha*I is the fast path used throughout the experiments; general J is
supported up to a payload cap.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import lattices
from .lattices import Lattice, from_name, geometry, nearest_points, integer_coordinates

__all__ = [
    "NestedCode",
    "build_self_similar",
    "build_general",
    "rep_to_index",
    "indices_of_fine_points",
    "parse_code_spec",
    "GENERAL_PAYLOAD_CAP",
]

GENERAL_PAYLOAD_CAP = 4096


@dataclass(frozen=True, eq=False)
class NestedCode:
    """Fine/coarse lattice pair with its coset representatives.

    representatives[i] is d_i reduced into the coarse Voronoi region;
    d_0 = 0.  alpha is set for self-similar codes (J = alpha*I) and enables
    the O(N) index map through integer coordinates mod alpha.
    """

    fine: Lattice
    coarse: Lattice
    subsampling: np.ndarray
    representatives: np.ndarray
    payload: int
    rate: float
    alpha: Optional[int] = None
    spec: str = ""

    @property
    def dimension(self) -> int:
        return self.fine.dimension

    @property
    def fine_geometry(self):
        return geometry(self.fine)

    @property
    def coarse_geometry(self):
        return geometry(self.coarse)


def _mixed_radix_weights(alpha: int, n: int) -> np.ndarray:
    # last coordinate fastest
    return alpha ** np.arange(n - 1, -1, -1, dtype=np.int64)


def build_self_similar(fine: Lattice, alpha: int, spec: str = "") -> NestedCode:
    """Nested code with coarse lattice alpha * fine; rate log2(alpha)."""
    if int(alpha) != alpha or alpha < 2:
        raise ValueError(f"alpha must be an integer >= 2, got {alpha}")
    alpha = int(alpha)
    n = fine.dimension
    coarse = fine.scaled(alpha)
    payload = alpha ** n
    grid = np.stack(
        np.meshgrid(*[np.arange(alpha)] * n, indexing="ij"), axis=-1
    ).reshape(-1, n)
    raw = grid @ fine.generator.T
    reps = raw - nearest_points(coarse, raw)
    return NestedCode(
        fine=fine,
        coarse=coarse,
        subsampling=alpha * np.eye(n, dtype=np.int64),
        representatives=reps,
        payload=payload,
        rate=float(np.log2(alpha)),
        alpha=alpha,
        spec=spec or f"{fine.kind}:{alpha}",
    )


def build_general(fine: Lattice, J, payload_cap: int = GENERAL_PAYLOAD_CAP,
                  spec: str = "") -> NestedCode:
    """Nested code for an arbitrary nonsingular integer subsampling matrix."""
    J = np.asarray(J)
    if J.ndim != 2 or J.shape[0] != J.shape[1] or J.shape[0] != fine.dimension:
        raise ValueError("J must be a square matrix matching the lattice dimension")
    if not np.all(J == np.rint(J)):
        raise ValueError("J must have integer entries")
    J = np.rint(J).astype(np.int64)
    payload = int(round(abs(np.linalg.det(J.astype(float)))))
    if payload == 0:
        raise ValueError("J is singular")
    if payload < 2:
        raise ValueError("payload |det J| must be >= 2")
    if payload > payload_cap:
        raise ValueError(f"payload {payload} exceeds the cap {payload_cap}")
    n = fine.dimension
    coarse = Lattice("generic", fine.basis @ J, fine.scale)

    # Scan a bounding box of the fundamental parallelepiped J [0,1)^N.
    corners = J @ np.array(list(np.ndindex(*(2,) * n))).T
    lo = np.floor(corners.min(axis=1)).astype(int) - 1
    hi = np.ceil(corners.max(axis=1)).astype(int) + 1
    grid = np.stack(
        np.meshgrid(*[np.arange(l, h + 1) for l, h in zip(lo, hi)], indexing="ij"),
        axis=-1,
    ).reshape(-1, n)
    raw = grid @ fine.generator.T
    reduced = raw - nearest_points(coarse, raw)

    dmin = geometry(fine).min_distance
    reps = []
    for v in reduced:
        if not any(np.linalg.norm(v - r) < 0.5 * dmin for r in reps):
            reps.append(v)
        if len(reps) == payload:
            break
    if len(reps) != payload:
        raise RuntimeError(
            f"expected {payload} cosets, found {len(reps)}; bounding box too small"
        )
    reps = np.array(reps)
    order = np.lexsort(reps.T[::-1])
    reps = reps[order]
    # move the zero coset first
    zero = int(np.argmin((reps ** 2).sum(axis=1)))
    reps = np.vstack([reps[zero], np.delete(reps, zero, axis=0)])
    return NestedCode(
        fine=fine,
        coarse=coarse,
        subsampling=J,
        representatives=reps,
        payload=payload,
        rate=float(np.log2(payload)) / n,
        alpha=None,
        spec=spec,
    )


def _check_fine_membership(code: NestedCode, points: np.ndarray) -> np.ndarray:
    z = (points / code.fine.scale) @ code.fine._basis_inv.T
    zr = np.rint(z)
    tol = 1e-9 * geometry(code.fine).min_distance
    err = np.abs((zr - z) @ code.fine.generator.T).max(axis=-1)
    if np.any(err > tol):
        bad = int(np.argmax(err > tol))
        raise ValueError(f"input {bad} is not a point of the fine lattice")
    return zr.astype(np.int64)


def indices_of_fine_points(code: NestedCode, points) -> np.ndarray:
    """Coset indices of a batch of fine lattice points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    z = _check_fine_membership(code, points)
    if code.alpha is not None:
        w = _mixed_radix_weights(code.alpha, code.dimension)
        return (np.mod(z, code.alpha) @ w).astype(np.int64)
    reduced = points - nearest_points(code.coarse, points)
    d2 = ((reduced[:, None, :] - code.representatives[None, :, :]) ** 2).sum(axis=-1)
    idx = np.argmin(d2, axis=1)
    tol = (1e-6 * geometry(code.fine).min_distance) ** 2
    miss = d2[np.arange(len(points)), idx] > tol
    for k in np.flatnonzero(miss):
        idx[k] = _index_by_membership(code, points[k])
    return idx.astype(np.int64)


def _index_by_membership(code: NestedCode, point: np.ndarray) -> int:
    # Robust fallback: i such that point - d_i is a coarse lattice point.
    tol = 1e-6 * geometry(code.fine).min_distance
    for i, d in enumerate(code.representatives):
        shifted = point - d
        q = nearest_points(code.coarse, shifted)
        if np.linalg.norm(shifted - q) < tol:
            return i
    raise ValueError("point does not belong to any coset")


def rep_to_index(code: NestedCode, lattice_point) -> int:
    """Index i of the coset Lambda_c + d_i containing a fine lattice point."""
    p = np.asarray(lattice_point, dtype=float)
    if p.ndim != 1:
        raise ValueError("rep_to_index expects a single vector")
    return int(indices_of_fine_points(code, p[None, :])[0])


def parse_code_spec(spec: str, unit_volume: bool = False,
                    payload_cap: int = GENERAL_PAYLOAD_CAP) -> NestedCode:
    """Build a code from a config string: "<lattice>:<alpha>" or
    "<lattice>:J=<matrix-file>", e.g. "E8:2" or "Z:4".
    """
    if ":" not in spec:
        raise ValueError(f"bad code spec {spec!r}: expected <lattice>:<alpha>")
    if spec.startswith("generic:"):
        # generic:<file>:<alpha-or-J>
        head, _, tail = spec.rpartition(":")
        lattice_name, rest = head, tail
    else:
        lattice_name, _, rest = spec.partition(":")
    fine = from_name(lattice_name)
    if unit_volume:
        fine = fine.unit_volume()
    if rest.startswith("J="):
        path = rest[2:]
        rows = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rows.append([int(t) for t in line.replace(",", " ").split()])
        return build_general(fine, np.array(rows), payload_cap, spec=spec)
    try:
        alpha = int(rest)
    except ValueError:
        raise ValueError(f"bad code spec {spec!r}: alpha must be an integer")
    return build_self_similar(fine, alpha, spec=spec)
