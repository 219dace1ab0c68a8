"""Lattice definitions, geometry, and exact nearest-point decoders.

Supported kinds: the integer lattice Z^N, the hexagonal lattice A2, the
checkerboard lattice D4, the Gosset lattice E8, and arbitrary small generic
lattices (N <= 8) decoded by exhaustive enumeration.  The fast decoders for
the named kinds are the classic exact algorithms (componentwise rounding,
round-all/flip-worst parity repair, best-of-two-branches for E8, Babai
rounding plus a 3x3 offset search for A2); the exhaustive decoder doubles as
an independent test oracle.

Convention: a lattice is {G z : z integer}, with G the *column* basis times
a positive scalar scale.  All decoders are pure functions and accept both a
single vector and a batch of row vectors.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Lattice",
    "LatticePoint",
    "LatticeGeometry",
    "integer_lattice",
    "hexagonal_a2",
    "checkerboard_d4",
    "gosset_e8",
    "from_generator",
    "from_name",
    "nearest_point",
    "nearest_points",
    "nearest_point_exhaustive",
    "exhaustive_nearest_points",
    "integer_coordinates",
    "geometry",
    "estimate_second_moment_mc",
]

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)

# Canonical column bases for the named kinds.
_A2_BASIS = np.array([
    [0.0, SQRT3 / 2.0],
    [1.0, 0.5],
])
# Columns (1,-1,0,0), (0,1,-1,0), (0,0,1,-1), (0,0,1,1); |det| = 2.
_D4_BASIS = np.array([
    [1.0, 0.0, 0.0, 0.0],
    [-1.0, 1.0, 0.0, 0.0],
    [0.0, -1.0, 1.0, 1.0],
    [0.0, 0.0, -1.0, 1.0],
])
# A dually-minimal E8 basis: all eight columns are minimal vectors (norm
# sqrt(2)) and, since E8 is self-dual, so are the rows of the inverse.
# |det| = 1.  This conditioning keeps the Babai-rounding solution within
# one unit of the true integer coordinates, which the box-search oracle
# relies on for small radius hints.
_E8_BASIS = np.array([
    [1.0, -0.5, 0.5, -0.5, 0.0, 0.0, 0.0, 0.5],
    [0.0, -0.5, -0.5, -0.5, 0.0, 0.0, 0.0, 0.5],
    [0.0, 0.5, 0.5, -0.5, 0.0, 0.0, 0.0, 0.5],
    [0.0, -0.5, 0.5, 0.5, -1.0, 0.0, 0.0, 0.5],
    [0.0, -0.5, -0.5, -0.5, 1.0, -1.0, 0.0, 0.5],
    [1.0, 0.5, 0.5, 0.5, 0.0, 1.0, -1.0, 0.5],
    [0.0, -0.5, 0.5, -0.5, 0.0, 0.0, 1.0, 0.5],
    [0.0, -0.5, 0.5, -0.5, 0.0, 0.0, 0.0, 0.5],
])

# Normalized second moments (dimensionless, scale invariant).
_SECOND_MOMENT = {
    "Z": 1.0 / 12.0,
    "A2": 5.0 / (36.0 * SQRT3),
    "D4": 13.0 / (120.0 * SQRT2),
    "E8": 929.0 / 12960.0,
}

# Minimum distance of the canonical (unscaled) basis.
_MIN_DISTANCE = {
    "Z": 1.0,
    "A2": 1.0,
    "D4": SQRT2,
    "E8": SQRT2,
}

_MAX_GENERIC_DIM = 8
_ENUM_BUDGET = 2_000_000


@dataclass(frozen=True, eq=False)
class Lattice:
    """An N-dimensional lattice: scale * {basis @ z : z integer}."""

    kind: str
    basis: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        basis = np.array(self.basis, dtype=float)
        if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
            raise ValueError("generator must be a square matrix")
        if not np.all(np.isfinite(basis)):
            raise ValueError("generator entries must be finite")
        if abs(np.linalg.det(basis)) < 1e-12:
            raise ValueError("generator is singular")
        if not (float(self.scale) > 0.0):
            raise ValueError(f"scale must be positive, got {self.scale}")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "_basis_inv", np.linalg.inv(basis))

    @property
    def dimension(self) -> int:
        return self.basis.shape[0]

    @property
    def generator(self) -> np.ndarray:
        """Effective column basis including the scale factor."""
        return self.basis * self.scale

    def scaled(self, beta: float) -> "Lattice":
        """The lattice beta * Lambda."""
        return Lattice(self.kind, self.basis, self.scale * beta)

    def unit_volume(self) -> "Lattice":
        """Rescaled copy whose fundamental cell has volume 1."""
        vol = abs(np.linalg.det(self.basis))
        return Lattice(self.kind, self.basis, vol ** (-1.0 / self.dimension))

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"Lattice(kind={self.kind!r}, N={self.dimension}, scale={self.scale})"


@dataclass(frozen=True)
class LatticePoint:
    """A lattice point G z together with its integer coordinates z."""

    coords: np.ndarray
    integer_coords: np.ndarray


@dataclass(frozen=True)
class LatticeGeometry:
    cell_volume: float
    packing_radius: float
    min_distance: float
    second_moment: float


def integer_lattice(n: int = 1) -> Lattice:
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return Lattice("Z", np.eye(n))


def hexagonal_a2() -> Lattice:
    return Lattice("A2", _A2_BASIS)


def checkerboard_d4() -> Lattice:
    return Lattice("D4", _D4_BASIS)


def gosset_e8() -> Lattice:
    return Lattice("E8", _E8_BASIS)


def from_generator(matrix) -> Lattice:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("generator must be a square matrix")
    if matrix.shape[0] > _MAX_GENERIC_DIM:
        raise ValueError(
            f"generic lattices are limited to dimension {_MAX_GENERIC_DIM}"
        )
    return Lattice("generic", matrix)


def from_name(name: str) -> Lattice:
    """Build a named lattice from a configuration string.

    Accepted: "Z", "A2", "D4", "E8", "generic:<matrix-file>".  The matrix
    file holds one row per line, entries separated by whitespace or commas.
    """
    if name == "Z":
        return integer_lattice(1)
    if name == "A2":
        return hexagonal_a2()
    if name == "D4":
        return checkerboard_d4()
    if name == "E8":
        return gosset_e8()
    if name.startswith("generic:"):
        path = name[len("generic:"):]
        rows = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rows.append([float(t) for t in line.replace(",", " ").split()])
        return from_generator(np.array(rows))
    raise ValueError(f"unknown lattice name: {name!r}")


# ---------------------------------------------------------------------------
# fast decoders (all operate on unscaled coordinates)
# ---------------------------------------------------------------------------

def _round_half_down(x: np.ndarray) -> np.ndarray:
    # Nearest integer; exact ties go to the smaller integer, which realizes
    # the lexicographic tie-break in one dimension.
    return np.ceil(np.asarray(x, dtype=float) - 0.5)


def _decode_zn(X: np.ndarray) -> np.ndarray:
    return _round_half_down(X)


def _decode_dn(X: np.ndarray) -> np.ndarray:
    """Nearest point of D_n (integer vectors with even sum)."""
    f = np.rint(X)
    d = X - f
    k = np.argmax(np.abs(d), axis=-1)
    dk = np.take_along_axis(d, k[..., None], axis=-1)
    step = np.where(dk >= 0.0, 1.0, -1.0)
    g = f.copy()
    fk = np.take_along_axis(g, k[..., None], axis=-1)
    np.put_along_axis(g, k[..., None], fk + step, axis=-1)
    odd = np.mod(f.sum(axis=-1), 2.0) != 0.0
    return np.where(odd[..., None], g, f)


def _decode_e8(X: np.ndarray) -> np.ndarray:
    """Nearest E8 point as the better of the D8 and D8 + 1/2 branches."""
    a = _decode_dn(X)
    b = _decode_dn(X - 0.5) + 0.5
    da = ((X - a) ** 2).sum(axis=-1)
    db = ((X - b) ** 2).sum(axis=-1)
    return np.where((da <= db)[..., None], a, b)


_A2_OFFSETS = np.array(
    sorted(itertools.product((-1, 0, 1), repeat=2)), dtype=float
)
_A2_INV = np.linalg.inv(_A2_BASIS)


def _decode_a2(X: np.ndarray) -> np.ndarray:
    """Babai rounding plus the 9 integer offsets, exact for the A2 basis."""
    zstar = np.rint(X @ _A2_INV.T)
    cand_z = zstar[..., None, :] + _A2_OFFSETS
    cand = cand_z @ _A2_BASIS.T
    d2 = ((X[..., None, :] - cand) ** 2).sum(axis=-1)
    j = np.argmin(d2, axis=-1)
    return np.take_along_axis(cand, j[..., None, None], axis=-2)[..., 0, :]


def _validate_input(lattice: Lattice, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[-1:] != (lattice.dimension,):
        raise ValueError(
            f"input dimension {X.shape[-1] if X.ndim else 0} does not match "
            f"lattice dimension {lattice.dimension}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError("input contains non-finite entries")
    return X


def nearest_points(lattice: Lattice, X) -> np.ndarray:
    """Vectorized nearest-point quantizer; returns coordinates only.

    X may be a single vector or any batch of row vectors; the result has the
    same shape.  Q_{beta Lambda}(x) = beta Q_Lambda(x / beta) is applied for
    scaled lattices.
    """
    X = _validate_input(lattice, X)
    Y = X / lattice.scale
    if lattice.kind == "Z":
        C = _decode_zn(Y)
    elif lattice.kind == "A2":
        C = _decode_a2(Y)
    elif lattice.kind == "D4":
        C = _decode_dn(Y)
    elif lattice.kind == "E8":
        C = _decode_e8(Y)
    else:
        C = _exhaustive_unscaled(lattice, np.atleast_2d(Y), 2).reshape(Y.shape)
    return C * lattice.scale


def integer_coordinates(lattice: Lattice, coords) -> np.ndarray:
    """Integer coordinates z of lattice points given their coordinates."""
    coords = np.asarray(coords, dtype=float)
    z = (coords / lattice.scale) @ lattice._basis_inv.T
    return np.rint(z).astype(np.int64)


def nearest_point(lattice: Lattice, x) -> LatticePoint:
    """Nearest lattice point to x, with integer coordinates."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("nearest_point expects a single vector")
    c = nearest_points(lattice, x)
    return LatticePoint(coords=c, integer_coords=integer_coordinates(lattice, c))


# ---------------------------------------------------------------------------
# exhaustive decoder (oracle / generic fallback)
# ---------------------------------------------------------------------------

def _offset_table(n: int, hint: int) -> np.ndarray:
    count = (2 * hint + 1) ** n
    if count > _ENUM_BUDGET:
        raise ValueError(
            f"enumeration budget exceeded: ({2 * hint + 1})^{n} candidates"
        )
    return np.array(
        sorted(itertools.product(range(-hint, hint + 1), repeat=n)), dtype=float
    )


def _exhaustive_unscaled(lattice: Lattice, Y: np.ndarray, hint: int,
                         _depth: int = 0) -> np.ndarray:
    """Exact argmin over the integer box [z*-hint, z*+hint]^N.

    The box is centred on the Babai rounding z* of each point.  Any lattice
    point outside the box has some coordinate z_i at least hint+1 away from
    z*_i and hence at least hint+1/2 away from (G^-1 x)_i, which forces its
    distance to x to be at least (hint+1/2)/max_i||row_i(G^-1)||.  Rows
    whose in-box winner does not beat that lower bound are re-run with a
    larger box, so the returned point is always the true nearest point.
    """
    if _depth > 8:
        raise RuntimeError("exhaustive decoder failed to converge")
    n = lattice.dimension
    basis = lattice.basis
    offsets = _offset_table(n, hint)
    O = offsets @ basis.T
    o2 = (O ** 2).sum(axis=1)
    zstar = _round_half_down(Y @ lattice._basis_inv.T)
    R = Y - zstar @ basis.T
    out = np.empty_like(Y)
    max_dual = np.linalg.norm(lattice._basis_inv, axis=1).max()
    outside_bound = (hint + 0.5) / max_dual
    retry_rows = []
    chunk = max(1, int(2e7 / max(len(offsets), 1)))
    for lo in range(0, len(Y), chunk):
        hi = min(lo + chunk, len(Y))
        r = R[lo:hi]
        d2 = (r ** 2).sum(axis=1)[:, None] - 2.0 * (r @ O.T) + o2[None, :]
        d2min = d2.min(axis=1)
        tol = 1e-12 * (1.0 + d2min)
        # offsets are lex sorted, so the first candidate within tolerance of
        # the minimum realizes the lexicographic tie-break
        j = np.argmax(d2 <= (d2min + tol)[:, None], axis=1)
        zsel = zstar[lo:hi] + offsets[j]
        out[lo:hi] = zsel @ basis.T
        uncertified = np.sqrt(np.maximum(d2min, 0.0)) >= outside_bound * (1 - 1e-9)
        if np.any(uncertified):
            retry_rows.extend(lo + np.flatnonzero(uncertified))
    if retry_rows:
        rows = np.array(retry_rows)
        out[rows] = _exhaustive_unscaled(lattice, Y[rows], hint + 1, _depth + 1)
    return out


def exhaustive_nearest_points(lattice: Lattice, X, radius_hint: int = 2) -> np.ndarray:
    """Batched exhaustive nearest-point search (test oracle)."""
    if lattice.dimension > _MAX_GENERIC_DIM:
        raise ValueError("exhaustive search is limited to dimension 8")
    if radius_hint < 1:
        raise ValueError("radius_hint must be >= 1")
    X = _validate_input(lattice, X)
    Y = np.atleast_2d(X / lattice.scale)
    C = _exhaustive_unscaled(lattice, Y, radius_hint)
    return C.reshape(X.shape) * lattice.scale


def nearest_point_exhaustive(lattice: Lattice, x, radius_hint: int = 2) -> LatticePoint:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("nearest_point_exhaustive expects a single vector")
    c = exhaustive_nearest_points(lattice, x, radius_hint)
    return LatticePoint(coords=c, integer_coords=integer_coordinates(lattice, c))


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

def _generic_min_distance(lattice: Lattice) -> float:
    n = lattice.dimension
    reach = 3 if n <= 4 else 2
    offsets = _offset_table(n, reach)
    vecs = offsets @ lattice.basis.T
    norms = np.sqrt((vecs ** 2).sum(axis=1))
    norms = norms[norms > 1e-12]
    return float(norms.min()) * lattice.scale


def geometry(lattice: Lattice) -> LatticeGeometry:
    """Cell volume, packing radius, minimum distance and G(Lambda).

    Closed forms for the named kinds; generic lattices use bounded
    enumeration for d_min and a seeded Monte Carlo estimate of the second
    moment.
    """
    n = lattice.dimension
    vol = abs(np.linalg.det(lattice.basis)) * lattice.scale ** n
    if lattice.kind in _MIN_DISTANCE:
        dmin = _MIN_DISTANCE[lattice.kind] * lattice.scale
        g2 = _SECOND_MOMENT[lattice.kind]
    else:
        dmin = _generic_min_distance(lattice)
        g2 = estimate_second_moment_mc(lattice, trials=100_000, seed=0)
    return LatticeGeometry(
        cell_volume=float(vol),
        packing_radius=dmin / 2.0,
        min_distance=float(dmin),
        second_moment=float(g2),
    )


def estimate_second_moment_mc(lattice: Lattice, trials: int, seed: int) -> float:
    """Monte Carlo estimate of the normalized second moment G(Lambda).

    Samples the fundamental parallelepiped uniformly and folds into the
    Voronoi region via u - Q(u); deterministic given the seed.
    """
    if trials < 10_000:
        raise ValueError("trials must be >= 10^4")
    n = lattice.dimension
    rng = np.random.default_rng(seed)
    G = lattice.generator
    vol = abs(np.linalg.det(G))
    total = 0.0
    done = 0
    chunk = 200_000
    while done < trials:
        m = min(chunk, trials - done)
        u = rng.random((m, n)) @ G.T
        e = u - nearest_points(lattice, u)
        total += float((e ** 2).sum())
        done += m
    return total / (trials * n * vol ** (2.0 / n))
