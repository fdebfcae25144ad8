"""Grids, sampled functions, piecewise potentials and finite Radon measures.

Everything lives on the unit interval.  Sampled data are interpreted as
piecewise linear between their nodes; integrals use the composite trapezoid
rule on the union of a segment's own nodes and the uniform grid nodes it
contains.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError

DEFAULT_N = 4096
_MERGE_TOL = 1e-13


def default_grid_n() -> int:
    """Grid size, overridable with the ``SLOPT_GRID_N`` environment variable."""
    raw = os.environ.get("SLOPT_GRID_N")
    if not raw:
        return DEFAULT_N
    try:
        n = int(raw)
    except ValueError:
        raise InvalidInputError(f"SLOPT_GRID_N must be an integer, got {raw!r}") from None
    return n


def _finite(values, what="values") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{what} must be finite")
    return arr


class UnitGrid:
    """Uniform nodes t_k = k/n on [0, 1]."""

    __slots__ = ("n", "nodes")

    def __init__(self, n: int | None = None):
        n = default_grid_n() if n is None else int(n)
        if n < 16:
            raise InvalidInputError(f"grid needs n >= 16, got {n}")
        self.n = n
        self.nodes = np.arange(n + 1) / n
        self.nodes.setflags(write=False)

    @property
    def h(self) -> float:
        return 1.0 / self.n

    def __eq__(self, other):
        return isinstance(other, UnitGrid) and other.n == self.n

    def __hash__(self):
        return hash(("UnitGrid", self.n))

    def __repr__(self):
        return f"UnitGrid(n={self.n})"

    def index(self, t: float) -> int:
        """Nearest node index (used for snapping atoms)."""
        return int(round(float(t) * self.n))


@dataclass(frozen=True)
class SampledFunction:
    """Grid samples, linear in between."""

    grid: UnitGrid
    values: np.ndarray

    def __post_init__(self):
        vals = _finite(self.values)
        if vals.shape != (self.grid.n + 1,):
            raise InvalidInputError(
                f"expected {self.grid.n + 1} samples, got shape {vals.shape}")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, fn, grid: UnitGrid | None = None) -> "SampledFunction":
        grid = grid or UnitGrid()
        return cls(grid, np.broadcast_to(np.asarray(fn(grid.nodes), dtype=float),
                                         grid.nodes.shape))

    def __call__(self, t):
        return np.interp(t, self.grid.nodes, self.values)

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.grid.nodes))

    def inner(self, other: "SampledFunction") -> float:
        return float(np.trapezoid(self.values * other.values, self.grid.nodes))

    def __mul__(self, c: float) -> "SampledFunction":
        return SampledFunction(self.grid, self.values * c)

    __rmul__ = __mul__

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        return SampledFunction(self.grid, self.values + other.values)

    def __neg__(self) -> "SampledFunction":
        return SampledFunction(self.grid, -self.values)


@dataclass(frozen=True)
class Segment:
    """One piece of a potential: zero, or samples at nodes ``t`` on [start, stop]."""

    start: float
    stop: float
    t: np.ndarray | None = None
    values: np.ndarray | None = None

    def __post_init__(self):
        if not (self.stop > self.start):
            raise InvalidInputError(f"empty segment [{self.start}, {self.stop}]")
        if self.values is None:
            return
        t = _finite(self.t, "segment nodes")
        v = _finite(self.values, "segment values")
        if t.shape != v.shape or t.ndim != 1 or t.size < 2:
            raise InvalidInputError("segment nodes and values must be equal-length 1-D arrays")
        if np.any(np.diff(t) <= 0):
            raise InvalidInputError("segment nodes must be strictly increasing")
        if abs(t[0] - self.start) > 1e-12 or abs(t[-1] - self.stop) > 1e-12:
            raise InvalidInputError("segment nodes must span [start, stop]")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    @property
    def is_zero(self) -> bool:
        return self.values is None

    def __call__(self, t):
        if self.values is None:
            return np.zeros_like(np.asarray(t, dtype=float))
        return np.interp(t, self.t, self.values)

    def quadrature_nodes(self, grid: UnitGrid) -> np.ndarray:
        inner = grid.nodes[(grid.nodes > self.start) & (grid.nodes < self.stop)]
        pts = [np.array([self.start, self.stop]), inner]
        if self.t is not None:
            pts.append(self.t)
        return merge_nodes(np.concatenate(pts))


def merge_nodes(points: np.ndarray) -> np.ndarray:
    """Sorted unique nodes, dropping near-duplicates."""
    pts = np.sort(np.asarray(points, dtype=float))
    if pts.size == 0:
        return pts
    keep = np.concatenate(([True], np.diff(pts) > _MERGE_TOL))
    return pts[keep]


class PiecewisePotential:
    """Integrable potential on [0, 1] made of zero and sampled segments."""

    def __init__(self, segments: Sequence[Segment]):
        segs = list(segments)
        if not segs:
            raise InvalidInputError("a potential needs at least one segment")
        if abs(segs[0].start) > 1e-12 or abs(segs[-1].stop - 1.0) > 1e-12:
            raise InvalidInputError("segments must cover [0, 1]")
        for left, right in zip(segs, segs[1:]):
            if abs(left.stop - right.start) > 1e-12:
                raise InvalidInputError("segments must be contiguous")
        self.segments = tuple(segs)

    # constructors -----------------------------------------------------
    @classmethod
    def zero(cls) -> "PiecewisePotential":
        return cls([Segment(0.0, 1.0)])

    @classmethod
    def constant(cls, c: float) -> "PiecewisePotential":
        c = float(c)
        if not math.isfinite(c):
            raise InvalidInputError("constant must be finite")
        return cls([Segment(0.0, 1.0, np.array([0.0, 1.0]), np.array([c, c]))])

    @classmethod
    def from_sampled(cls, f: SampledFunction) -> "PiecewisePotential":
        return cls([Segment(0.0, 1.0, f.grid.nodes, f.values)])

    @classmethod
    def step(cls, breaks: Iterable[float], levels: Iterable[float]) -> "PiecewisePotential":
        """Piecewise-constant potential; ``levels[i]`` on [breaks[i-1], breaks[i]]."""
        edges = [0.0, *map(float, breaks), 1.0]
        segs = []
        for lo, hi, c in zip(edges, edges[1:], levels):
            segs.append(Segment(lo, hi) if c == 0 else
                        Segment(lo, hi, np.array([lo, hi]), np.array([c, c], dtype=float)))
        if len(segs) != len(edges) - 1:
            raise InvalidInputError("need one level per piece")
        return cls(segs)

    # evaluation -------------------------------------------------------
    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([s.start for s in self.segments] + [1.0])

    def __call__(self, t):
        """Right-continuous evaluation (left-continuous at t = 1)."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        starts = np.array([s.start for s in self.segments])
        idx = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(self.segments) - 1)
        for i, seg in enumerate(self.segments):
            mask = idx == i
            if np.any(mask) and not seg.is_zero:
                out[mask] = seg(t[mask])
        return out

    def sample(self, grid: UnitGrid) -> SampledFunction:
        return SampledFunction(grid, self(grid.nodes))

    def integration_nodes(self, grid: UnitGrid) -> np.ndarray:
        """Grid nodes plus every segment breakpoint."""
        return merge_nodes(np.concatenate([grid.nodes, self.breakpoints]))

    def stage_samples(self, nodes: np.ndarray):
        """Potential at the left end, midpoint and right end of each step.

        ``nodes`` must contain every breakpoint so that no step straddles two
        segments; end values are then one-sided limits from inside the step.
        """
        nodes = np.asarray(nodes, dtype=float)
        lo, hi = nodes[:-1], nodes[1:]
        mid = 0.5 * (lo + hi)
        qa = np.zeros_like(mid)
        qm = np.zeros_like(mid)
        qb = np.zeros_like(mid)
        for seg in self.segments:
            if seg.is_zero:
                continue
            mask = (mid > seg.start) & (mid < seg.stop)
            qa[mask] = seg(lo[mask])
            qm[mask] = seg(mid[mask])
            qb[mask] = seg(hi[mask])
        return qa, qm, qb

    def shifted(self, c: float) -> "PiecewisePotential":
        """The potential q + c."""
        segs = []
        for s in self.segments:
            if s.is_zero:
                segs.append(Segment(s.start, s.stop, np.array([s.start, s.stop]),
                                    np.array([c, c], dtype=float)) if c else s)
            else:
                segs.append(Segment(s.start, s.stop, s.t, s.values + c))
        return PiecewisePotential(segs)

    def scaled(self, c: float) -> "PiecewisePotential":
        return PiecewisePotential([s if s.is_zero else Segment(s.start, s.stop, s.t, s.values * c)
                                   for s in self.segments])

    def to_json(self) -> dict:
        return {"kind": "piecewise", "segments": [_segment_json(s) for s in self.segments]}

    def __repr__(self):
        kinds = ",".join("0" if s.is_zero else "s" for s in self.segments)
        return f"PiecewisePotential([{kinds}], breaks={self.breakpoints.round(6).tolist()})"


def _segment_json(s: Segment) -> dict:
    if s.is_zero:
        return {"start": s.start, "stop": s.stop, "kind": "zero"}
    return {"start": s.start, "stop": s.stop, "kind": "sampled",
            "t": s.t.tolist(), "values": s.values.tolist()}


def as_potential(q) -> PiecewisePotential:
    if isinstance(q, PiecewisePotential):
        return q
    if isinstance(q, SampledFunction):
        return PiecewisePotential.from_sampled(q)
    if isinstance(q, (int, float)):
        return PiecewisePotential.constant(q)
    raise InvalidInputError(f"cannot interpret {type(q).__name__} as a potential")


@dataclass(frozen=True)
class RadonMeasure:
    """Density part plus finitely many Dirac atoms ``(position, mass)``."""

    density: PiecewisePotential | None = None
    atoms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        atoms = []
        for pos, mass in self.atoms:
            pos, mass = float(pos), float(mass)
            if not (math.isfinite(pos) and math.isfinite(mass)):
                raise InvalidInputError("atom position and mass must be finite")
            if not 0.0 < pos <= 1.0:
                raise InvalidInputError(f"atom position {pos} outside (0, 1]")
            if mass == 0.0:
                raise InvalidInputError("atom mass must be nonzero")
            atoms.append((pos, mass))
        positions = [p for p, _ in atoms]
        if len(set(positions)) != len(positions):
            raise InvalidInputError("atom positions must be distinct")
        object.__setattr__(self, "atoms", tuple(sorted(atoms)))
        if self.density is not None:
            object.__setattr__(self, "density", as_potential(self.density))

    @classmethod
    def dirac(cls, position: float, mass: float = 1.0) -> "RadonMeasure":
        return cls(None, ((position, mass),))

    def __add__(self, other: "RadonMeasure") -> "RadonMeasure":
        if self.density is not None and other.density is not None:
            raise InvalidInputError("adding two densities is not supported")
        return RadonMeasure(self.density if self.density is not None else other.density,
                            self.atoms + other.atoms)

    def distribution(self, t: float, grid: UnitGrid | None = None) -> float:
        """mu([0, t]); atoms at t are included (right continuity)."""
        grid = grid or UnitGrid()
        val = sum(m for p, m in self.atoms if p <= t)
        if self.density is not None and t > 0:
            for seg in self.density.segments:
                if seg.is_zero or seg.start >= t:
                    continue
                nodes = seg.quadrature_nodes(grid)
                nodes = merge_nodes(np.append(nodes[nodes < t], min(t, seg.stop)))
                val += float(np.trapezoid(seg(nodes), nodes))
        return val

    def to_json(self) -> dict:
        return {"density": None if self.density is None else self.density.to_json(),
                "atoms": [{"pos": p, "mass": m} for p, m in self.atoms]}


# norms and pairings -----------------------------------------------------

def _segment_integral(seg: Segment, grid: UnitGrid, fn) -> float:
    nodes = seg.quadrature_nodes(grid)
    return float(np.trapezoid(fn(seg(nodes)), nodes))


def lp_norm(f, p: float, grid: UnitGrid | None = None) -> float:
    """(integral of |f|^p)^(1/p) by the trapezoid rule; max |f| over samples for p = inf."""
    p = float(p)
    if not (p >= 1.0):
        raise InvalidInputError(f"lp_norm needs p >= 1, got {p}")
    if isinstance(f, SampledFunction):
        vals = np.abs(f.values)
        if math.isinf(p):
            return float(vals.max())
        return float(np.trapezoid(vals ** p, f.grid.nodes)) ** (1.0 / p)
    f = as_potential(f)
    grid = grid or UnitGrid()
    if math.isinf(p):
        best = 0.0
        for seg in f.segments:
            if not seg.is_zero:
                best = max(best, float(np.abs(seg(seg.quadrature_nodes(grid))).max()))
        return best
    total = sum(_segment_integral(seg, grid, lambda v: np.abs(v) ** p)
                for seg in f.segments if not seg.is_zero)
    return total ** (1.0 / p)


def total_variation(mu: RadonMeasure, grid: UnitGrid | None = None) -> float:
    ac = 0.0 if mu.density is None else lp_norm(mu.density, 1, grid)
    return ac + sum(abs(m) for _, m in mu.atoms)


def pair_against(mu: RadonMeasure, u, grid: UnitGrid | None = None) -> float:
    """Integral of u against mu: density quadrature plus atom evaluations."""
    if isinstance(u, SampledFunction):
        grid = grid or u.grid
        ufun = u
    else:
        grid = grid or UnitGrid()
        ufun = u
    total = 0.0
    if mu.density is not None:
        for seg in mu.density.segments:
            if seg.is_zero:
                continue
            nodes = seg.quadrature_nodes(grid)
            total += float(np.trapezoid(np.asarray(ufun(nodes)) * seg(nodes), nodes))
    for pos, mass in mu.atoms:
        total += float(ufun(pos)) * mass
    return total


# JSON -----------------------------------------------------------------

def potential_from_json(obj) -> PiecewisePotential:
    """Parse ``constant``, ``sampled`` or ``piecewise`` potential JSON."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InvalidInputError("potential JSON needs a 'kind' field")
    kind = obj["kind"]
    try:
        if kind == "constant":
            return PiecewisePotential.constant(float(obj["value"]))
        if kind == "zero":
            return PiecewisePotential.zero()
        if kind == "sampled":
            vals = np.asarray(obj["values"], dtype=float)
            n = int(obj.get("n", vals.size - 1))
            return PiecewisePotential.from_sampled(SampledFunction(UnitGrid(n), vals))
        if kind == "piecewise":
            segs = []
            for s in obj["segments"]:
                lo, hi = float(s["start"]), float(s["stop"])
                skind = s.get("kind", "sampled")
                if skind == "zero":
                    segs.append(Segment(lo, hi))
                elif skind == "constant":
                    c = float(s["value"])
                    segs.append(Segment(lo, hi, np.array([lo, hi]), np.array([c, c])))
                elif skind == "sampled":
                    segs.append(Segment(lo, hi, np.asarray(s["t"], dtype=float),
                                        np.asarray(s["values"], dtype=float)))
                else:
                    raise InvalidInputError(f"unknown segment kind {skind!r}")
            return PiecewisePotential(segs)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise InvalidInputError(f"malformed potential JSON: {exc}") from None
    raise InvalidInputError(f"unknown potential kind {kind!r}")


def measure_from_json(obj) -> RadonMeasure:
    if not isinstance(obj, dict):
        raise InvalidInputError("measure JSON must be an object")
    dens = obj.get("density")
    try:
        atoms = tuple((float(a["pos"]), float(a["mass"])) for a in obj.get("atoms", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed atom: {exc}") from None
    return RadonMeasure(None if dens is None else potential_from_json(dens), atoms)
