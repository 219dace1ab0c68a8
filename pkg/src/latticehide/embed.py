"""QIM and MD-QIM embedding plus the shared closest-coset decoder.

QIM quantizes the host block to the nearest point of the message-indexed
coset.  MD-QIM computes the same target but then either leaves the host
untouched (Type I: the target is already within the fine packing radius) or
moves it only to just inside the packing-sphere boundary (Type II), which
still decodes to the same coset.

Batch entry points (embed_blocks / decode_blocks) are vectorized and carry
the simulation workloads; embed_stream / extract_stream wrap them into
per-block records for file-sized jobs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .coset import NestedCode, indices_of_fine_points
from .lattices import LatticePoint, integer_coordinates, nearest_points

__all__ = [
    "KIND_QIM",
    "KIND_TYPE1",
    "KIND_TYPE2",
    "EmbedOutcome",
    "DecodeOutcome",
    "EmbedBatch",
    "default_epsilon",
    "qim_embed",
    "mdqim_embed",
    "decode",
    "embed_blocks",
    "decode_blocks",
    "embed_stream",
    "extract_stream",
]

KIND_QIM = "QIM"
KIND_TYPE1 = "MDQIM-TypeI"
KIND_TYPE2 = "MDQIM-TypeII"


@dataclass(frozen=True)
class EmbedOutcome:
    """One block's embedding record."""

    host: np.ndarray
    embedded: np.ndarray
    target: LatticePoint
    difference: np.ndarray
    kind: str
    epsilon: float
    distortion: float


@dataclass(frozen=True)
class DecodeOutcome:
    index: int
    fine_point: LatticePoint
    distance: float


@dataclass(frozen=True)
class EmbedBatch:
    """Vectorized embedding result over a stack of blocks."""

    embedded: np.ndarray
    targets: np.ndarray
    difference: np.ndarray
    distortion: np.ndarray
    type2: Optional[np.ndarray]
    method: str
    epsilon: float


def default_epsilon(code: NestedCode) -> float:
    """Safety margin keeping Type II points strictly inside the fine cell."""
    return 1e-6 * code.fine_geometry.min_distance


def _check_indices(code: NestedCode, indices: np.ndarray) -> np.ndarray:
    indices = np.asarray(indices)
    if indices.size and (indices.min() < 0 or indices.max() >= code.payload):
        bad = int(np.argmax((indices < 0) | (indices >= code.payload)))
        raise ValueError(
            f"block {bad}: index {int(indices[bad])} out of range [0, {code.payload})"
        )
    return indices.astype(np.int64)


def _check_hosts(code: NestedCode, hosts) -> np.ndarray:
    hosts = np.asarray(hosts, dtype=float)
    if hosts.ndim == 1 and code.dimension == 1:
        hosts = hosts[:, None]
    if hosts.ndim != 2 or hosts.shape[1] != code.dimension:
        raise ValueError(
            f"hosts must have shape (blocks, {code.dimension}), got {hosts.shape}"
        )
    if not np.all(np.isfinite(hosts)):
        bad = int(np.argmax(~np.isfinite(hosts).all(axis=1)))
        raise ValueError(f"block {bad}: non-finite host sample")
    return hosts


def embed_blocks(code: NestedCode, hosts, indices, method: str = "qim",
                 epsilon: Optional[float] = None) -> EmbedBatch:
    """Embed a stack of host blocks; one coarse nearest-point call total."""
    method = method.lower()
    if method not in ("qim", "mdqim"):
        raise ValueError(f"unknown method {method!r}")
    S = _check_hosts(code, hosts)
    idx = _check_indices(code, indices)
    if len(S) != len(idx):
        raise ValueError(f"{len(S)} hosts but {len(idx)} symbols")
    D = code.representatives[idx]
    X = nearest_points(code.coarse, S - D) + D
    P = X - S
    if method == "qim":
        dist = np.linalg.norm(P, axis=1)
        return EmbedBatch(embedded=X, targets=X, difference=P,
                          distortion=dist, type2=None, method="qim", epsilon=0.0)
    r = code.fine_geometry.packing_radius
    eps = default_epsilon(code) if epsilon is None else float(epsilon)
    if not (0.0 < eps < r):
        raise ValueError(f"epsilon must be in (0, {r}), got {eps}")
    pn = np.linalg.norm(P, axis=1)
    type2 = pn >= r
    safe = np.where(pn > 0.0, pn, 1.0)
    shifted = X - P * ((r - eps) / safe)[:, None]
    W = np.where(type2[:, None], shifted, S)
    dist = np.where(type2, pn - (r - eps), 0.0)
    return EmbedBatch(embedded=W, targets=X, difference=P,
                      distortion=dist, type2=type2, method="mdqim", epsilon=eps)


def decode_blocks(code: NestedCode, observed) -> np.ndarray:
    """Closest-coset decoding of a stack of blocks, as coset indices."""
    Y = _check_hosts(code, observed)
    C = nearest_points(code.fine, Y)
    if code.alpha is not None:
        Z = integer_coordinates(code.fine, C)
        from .coset import _mixed_radix_weights
        w = _mixed_radix_weights(code.alpha, code.dimension)
        return (np.mod(Z, code.alpha) @ w).astype(np.int64)
    return indices_of_fine_points(code, C)


def _outcome(code, s, w, x, p, kind, eps):
    return EmbedOutcome(
        host=s,
        embedded=w,
        target=LatticePoint(coords=x, integer_coords=integer_coordinates(code.fine, x)),
        difference=p,
        kind=kind,
        epsilon=eps,
        distortion=float(np.linalg.norm(s - w)),
    )


def qim_embed(code: NestedCode, s, i: int) -> EmbedOutcome:
    """Quantize s to the nearest point of the coset indexed by i."""
    batch = embed_blocks(code, np.atleast_2d(np.asarray(s, dtype=float)), [i], "qim")
    return _outcome(code, np.asarray(s, dtype=float).reshape(-1),
                    batch.embedded[0], batch.targets[0], batch.difference[0],
                    KIND_QIM, 0.0)


def mdqim_embed(code: NestedCode, s, i: int, epsilon: Optional[float] = None) -> EmbedOutcome:
    """Minimum-distortion embedding of index i into host block s."""
    batch = embed_blocks(code, np.atleast_2d(np.asarray(s, dtype=float)), [i],
                         "mdqim", epsilon)
    kind = KIND_TYPE2 if batch.type2[0] else KIND_TYPE1
    return _outcome(code, np.asarray(s, dtype=float).reshape(-1),
                    batch.embedded[0], batch.targets[0], batch.difference[0],
                    kind, batch.epsilon)


def decode(code: NestedCode, y) -> DecodeOutcome:
    """Estimate the embedded index from a single observed block."""
    y = np.asarray(y, dtype=float).reshape(-1)
    Y = y[None, :]
    _check_hosts(code, Y)
    c = nearest_points(code.fine, y)
    idx = int(decode_blocks(code, Y)[0])
    return DecodeOutcome(
        index=idx,
        fine_point=LatticePoint(coords=c, integer_coords=integer_coordinates(code.fine, c)),
        distance=float(np.linalg.norm(y - c)),
    )


def embed_stream(code: NestedCode, hosts: Sequence, symbols: Sequence[int],
                 method: str = "qim", epsilon: Optional[float] = None) -> list:
    """Element-wise embedding of a sequence of blocks; order preserving."""
    hosts = [np.asarray(h, dtype=float).reshape(-1) for h in hosts]
    if len(hosts) != len(symbols):
        raise ValueError(f"{len(hosts)} hosts but {len(symbols)} symbols")
    if not hosts:
        return []
    batch = embed_blocks(code, np.stack(hosts), symbols, method, epsilon)
    outcomes = []
    for k, s in enumerate(hosts):
        if batch.method == "qim":
            kind = KIND_QIM
        else:
            kind = KIND_TYPE2 if batch.type2[k] else KIND_TYPE1
        outcomes.append(_outcome(code, s, batch.embedded[k], batch.targets[k],
                                 batch.difference[k], kind, batch.epsilon))
    return outcomes


def extract_stream(code: NestedCode, observed: Sequence) -> list:
    """Element-wise decoding of a sequence of blocks to coset indices."""
    observed = [np.asarray(y, dtype=float).reshape(-1) for y in observed]
    if not observed:
        return []
    return [int(i) for i in decode_blocks(code, np.stack(observed))]
