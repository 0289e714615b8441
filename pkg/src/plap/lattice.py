"""Finite boxes cut from the integer lattice graph Z^N.

Vertices of Z^N are integer N-tuples; two vertices are adjacent when they
differ by exactly 1 in a single coordinate.  A :class:`LatticeBox` is the
axis-aligned block ``[0, L_1) x ... x [0, L_N)`` of that graph together with
one of two boundary conventions:

``"torus"``
    Opposite faces are identified.  Every vertex keeps its full 2N
    neighbours, and shifting a field by the model period is an exact
    symmetry of all energies.

``"dirichlet-zero"``
    The box sits inside the infinite lattice and every field is extended by
    zero outside.  Edges that cross the boundary survive as *half-edges*
    against a phantom vertex holding the value 0, so the Dirichlet energy of
    a compactly supported function is computed exactly.

Fields on a box are plain 1-D ``float64`` arrays in row-major vertex order;
the box carries the topology (neighbour table, edge lists).
"""

import numpy as np

BOUNDARY_CONDITIONS = ("dirichlet-zero", "torus")


class LatticeBox:
    """Finite truncation of Z^N with explicit edge and neighbour tables.

    Parameters
    ----------
    sides : sequence of int
        Vertices per axis, ``(L_1, ..., L_N)``.  All sides must be >= 1;
        a torus needs every side >= 3 so the wrapped graph stays simple
        (no duplicate edges between a vertex pair).
    bc : str
        ``"dirichlet-zero"`` or ``"torus"``.

    Attributes
    ----------
    dim : int
        Number of axes N.
    vertex_count : int
        Product of the sides.
    edges : (m, 2) ndarray of int
        Every unordered interior edge exactly once.
    half_vertices : (k,) ndarray of int
        Dirichlet-zero only: one entry per boundary-crossing half-edge
        (a vertex may appear several times, once per crossing).

    Notes
    -----
    Vertex indexing is row-major over coordinates, so axis N-1 varies
    fastest.  Boxes are immutable after construction and safe to share
    between threads.
    """

    def __init__(self, sides, bc="torus"):
        sides = tuple(int(s) for s in sides)
        if len(sides) < 1:
            raise ValueError("need at least one axis")
        if any(s < 1 for s in sides):
            raise ValueError(f"all sides must be >= 1, got {sides}")
        if bc not in BOUNDARY_CONDITIONS:
            raise ValueError(f"bc must be one of {BOUNDARY_CONDITIONS}, got {bc!r}")
        if bc == "torus" and any(s < 3 for s in sides):
            raise ValueError(f"torus sides must be >= 3 to keep the graph simple, got {sides}")

        self.sides = sides
        self.bc = bc
        self.dim = len(sides)
        self.vertex_count = int(np.prod(sides))
        self._build_topology()

    def _build_topology(self):
        n, ndim = self.vertex_count, self.dim
        coords = np.indices(self.sides).reshape(ndim, n).T.astype(np.int64)

        # Slot layout: columns (2i, 2i+1) are the -e_i and +e_i neighbours.
        nbr = np.empty((n, 2 * ndim), dtype=np.int64)
        inside = np.ones((n, 2 * ndim), dtype=bool)
        for axis in range(ndim):
            length = self.sides[axis]
            for j, step in enumerate((-1, +1)):
                shifted = coords.copy()
                shifted[:, axis] += step
                if self.bc == "torus":
                    shifted[:, axis] %= length
                    ok = np.ones(n, dtype=bool)
                else:
                    ok = (shifted[:, axis] >= 0) & (shifted[:, axis] < length)
                    shifted[:, axis] = np.clip(shifted[:, axis], 0, length - 1)
                col = 2 * axis + j
                nbr[:, col] = np.ravel_multi_index(tuple(shifted.T), self.sides)
                inside[:, col] = ok

        # Each unordered edge once: pair every vertex with its +e_i neighbour
        # (on the torus the wrap covers all edges; sides >= 3 avoids duplicates).
        ea, eb, halves = [], [], []
        for axis in range(ndim):
            length = self.sides[axis]
            plus_col = 2 * axis + 1
            if self.bc == "torus":
                ea.append(np.arange(n, dtype=np.int64))
                eb.append(nbr[:, plus_col])
            else:
                src = np.flatnonzero(coords[:, axis] < length - 1)
                ea.append(src)
                eb.append(nbr[src, plus_col])
                halves.append(np.flatnonzero(coords[:, axis] == 0))
                halves.append(np.flatnonzero(coords[:, axis] == length - 1))

        self.coords = coords
        self.neighbor_table = nbr
        self.inside_mask = inside
        self.edges = np.stack([np.concatenate(ea), np.concatenate(eb)], axis=1)
        self.half_vertices = (
            np.concatenate(halves) if halves else np.empty(0, dtype=np.int64)
        )
        for arr in (self.coords, self.neighbor_table, self.inside_mask, self.edges, self.half_vertices):
            arr.flags.writeable = False

    @property
    def edge_count(self):
        return self.edges.shape[0]

    @property
    def half_edge_count(self):
        return self.half_vertices.shape[0]

    def index_of(self, coords):
        """Row-major vertex index of an integer coordinate tuple."""
        coords = np.asarray(coords, dtype=np.int64)
        if coords.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} coordinates, got {coords.shape}")
        if np.any(coords < 0) or np.any(coords >= np.asarray(self.sides)):
            raise ValueError(f"coordinates {tuple(coords)} outside box {self.sides}")
        return int(np.ravel_multi_index(tuple(coords), self.sides))

    def coords_of(self, v):
        """Coordinate tuple of a vertex index (inverse of :meth:`index_of`)."""
        v = int(v)
        if not 0 <= v < self.vertex_count:
            raise ValueError(f"vertex index {v} outside [0, {self.vertex_count})")
        return tuple(int(c) for c in np.unravel_index(v, self.sides))

    def neighbors(self, v):
        """The 2N neighbour slots of a vertex.

        Returns a list of ``(index, inside)`` pairs in slot order
        (-e_1, +e_1, -e_2, ...).  Under dirichlet-zero an out-of-box slot
        is reported as ``(None, False)``; fields evaluate to 0 there.
        """
        v = int(v)
        if not 0 <= v < self.vertex_count:
            raise ValueError(f"vertex index {v} outside [0, {self.vertex_count})")
        out = []
        for idx, ok in zip(self.neighbor_table[v], self.inside_mask[v]):
            out.append((int(idx), True) if ok else (None, False))
        return out

    def __repr__(self):
        return f"LatticeBox(sides={self.sides}, bc={self.bc!r})"


def build_box(dim, sides, bc):
    """Build a :class:`LatticeBox`, checking that ``dim`` matches ``sides``."""
    sides = tuple(int(s) for s in sides)
    if int(dim) != len(sides):
        raise ValueError(f"dim={dim} but {len(sides)} sides given")
    return LatticeBox(sides, bc)


def as_field(box, values):
    """Validate ``values`` as a field on ``box`` and return it as float64."""
    u = np.asarray(values, dtype=float).reshape(-1)
    if u.shape[0] != box.vertex_count:
        raise ValueError(
            f"field length {u.shape[0]} does not match box with {box.vertex_count} vertices"
        )
    if not np.all(np.isfinite(u)):
        raise ValueError("field contains non-finite entries")
    return u


def delta_field(box, vertex=None):
    """Unit mass at one vertex (default: the centre of the box)."""
    if vertex is None:
        vertex = box.index_of([s // 2 for s in box.sides])
    u = np.zeros(box.vertex_count)
    u[int(vertex)] = 1.0
    return u


def constant_field(box, value=1.0):
    """Field holding the same value at every vertex."""
    return np.full(box.vertex_count, float(value))


def translate_field(box, u, k, period):
    """Shift a field on a torus by ``k * period`` lattice steps per axis.

    The translated field takes at ``x`` the value the original took at
    ``x + k*period`` (wrapped).  When the model data is ``period``-periodic
    and ``period`` divides every side, this is an exact symmetry of all
    energies.  Rejected on dirichlet-zero boxes, where shifting changes the
    distance to the zero boundary and is not energy-preserving.
    """
    if box.bc != "torus":
        raise ValueError("translate_field needs a torus box")
    period = int(period)
    if period < 1:
        raise ValueError("period must be a positive integer")
    k = np.asarray(k, dtype=np.int64).reshape(-1)
    if k.shape[0] != box.dim:
        raise ValueError(f"expected {box.dim} shift components, got {k.shape[0]}")
    arr = as_field(box, u).reshape(box.sides)
    shifted = np.roll(arr, shift=tuple(-int(ki) * period for ki in k), axis=tuple(range(box.dim)))
    return shifted.reshape(-1)
