"""Dyadic cubes in R^{2n} = R^n x R^n and their maximal admissible decomposition.

A cube of level m with integer corner j is ``prod_i [j_i 2^m, (j_i + 1) 2^m)``.
For ``C = Q x R`` split into its first and last n coordinates, with corner
offsets ``a`` (of Q) and ``b`` (of R):

* level 0 cubes are always admissible;
* a level m >= 1 cube is admissible iff the open boxes 2[Q] and 2[R] are
  disjoint, i.e. ``|a_i - b_i| >= 2`` for some i;
* negative levels are below the base scale and never admissible.

Non-admissibility at level m >= 1 passes to the parent, so the ancestors of
a point that are admissible form an initial run of levels 0..m*; the maximal
admissible cube containing the point is its level-m* ancestor.  All
arithmetic is on integers; homothety uses exact rationals.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    LevelCapTooSmall,
    NumericalFailure,
    OddAmbientDimension,
    UncoveredPoint,
    ValidationError,
    WindowTooSmall,
)

__all__ = [
    "CubeDecomposition",
    "DyadicCube",
    "Window",
    "admissible_mask",
    "cube_stats",
    "enumerate_maximal",
    "homothety",
    "is_admissible",
    "is_maximal",
    "maximal_level",
    "parent",
    "partner_count",
    "partner_stats",
    "route",
    "scan_maximal",
]


@dataclass(frozen=True, order=True)
class DyadicCube:
    level: int
    corner: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "corner", tuple(int(c) for c in self.corner))

    @property
    def dim(self) -> int:
        return len(self.corner)

    @property
    def side(self) -> Fraction:
        return Fraction(2) ** self.level

    @property
    def lo(self) -> tuple[Fraction, ...]:
        return tuple(c * self.side for c in self.corner)

    @property
    def hi(self) -> tuple[Fraction, ...]:
        return tuple((c + 1) * self.side for c in self.corner)

    def halves(self) -> tuple["DyadicCube", "DyadicCube"]:
        """The factors Q and R of a cube in R^{2n}."""
        if self.dim % 2:
            raise OddAmbientDimension(f"cube in R^{self.dim} has no Q x R split")
        n = self.dim // 2
        return DyadicCube(self.level, self.corner[:n]), DyadicCube(self.level, self.corner[n:])

    def parent(self) -> "DyadicCube":
        return DyadicCube(self.level + 1, tuple(c // 2 for c in self.corner))

    def children(self) -> list["DyadicCube"]:
        return [DyadicCube(self.level - 1, tuple(2 * c + e for c, e in zip(self.corner, bits)))
                for bits in itertools.product((0, 1), repeat=self.dim)]

    def contains_point(self, x: Sequence) -> bool:
        return all(lo <= Fraction(v) < hi for v, lo, hi in zip(x, self.lo, self.hi))

    def contains(self, other: "DyadicCube") -> bool:
        if other.level > self.level:
            return False
        shift = self.level - other.level
        return all((c >> shift) == s for c, s in zip(other.corner, self.corner))

    def to_json(self) -> str:
        return json.dumps({"level": self.level, "corner": list(self.corner)})


def parent(C: DyadicCube) -> DyadicCube:
    return C.parent()


def homothety(Q, K) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """``K[Q]``: the box with the same center and K times the side, as exact rationals.

    ``Q`` is a :class:`DyadicCube` or a ``(lo, hi)`` pair of coordinate sequences.
    """
    K = Fraction(K)
    if K <= 0:
        raise ValidationError("homothety factor must be positive")
    lo, hi = (Q.lo, Q.hi) if isinstance(Q, DyadicCube) else Q
    lo = [Fraction(v) for v in lo]
    hi = [Fraction(v) for v in hi]
    c = [(a + b) / 2 for a, b in zip(lo, hi)]
    return (tuple(ci + K * (a - ci) for ci, a in zip(c, lo)),
            tuple(ci + K * (b - ci) for ci, b in zip(c, hi)))


def _split(corners: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = corners.shape[-1]
    if d % 2:
        raise OddAmbientDimension(f"ambient dimension {d} is odd")
    return corners[..., : d // 2], corners[..., d // 2:]


def admissible_mask(level: int, corners: np.ndarray) -> np.ndarray:
    """Vectorized admissibility for cubes of one level; ``corners`` has shape (K, 2n)."""
    corners = np.asarray(corners)
    a, b = _split(corners)
    if level < 0:
        return np.zeros(len(corners), dtype=bool)
    if level == 0:
        return np.ones(len(corners), dtype=bool)
    return np.any(np.abs(a - b) >= 2, axis=-1)


def is_admissible(C: DyadicCube) -> bool:
    return bool(admissible_mask(C.level, np.array([C.corner]))[0])


def is_maximal(C: DyadicCube) -> bool:
    """Admissible with a non-admissible parent."""
    return is_admissible(C) and not is_admissible(C.parent())


@dataclass(frozen=True)
class Window:
    """Integer box ``[lo, hi)`` in R^{2n}."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(int(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(int(v) for v in self.hi))
        if len(self.lo) != len(self.hi) or len(self.lo) % 2:
            raise OddAmbientDimension("window must live in an even-dimensional space")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise ValidationError("window is empty")

    @classmethod
    def cube(cls, n: int, side: int, origin: int | Sequence[int] = 0) -> "Window":
        o = [origin] * (2 * n) if np.isscalar(origin) else list(origin)
        return cls(tuple(o), tuple(v + side for v in o))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def n(self) -> int:
        return self.dim // 2

    def volume(self) -> int:
        return int(np.prod([h - l for l, h in zip(self.lo, self.hi)], dtype=object))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.all((x >= np.array(self.lo)) & (x < np.array(self.hi)), axis=-1)

    def shifted(self, t: int) -> "Window":
        return Window(tuple(v + t for v in self.lo), tuple(v + t for v in self.hi))


def _meets(level: int, corners: np.ndarray, window: Window) -> np.ndarray:
    s = 2 ** level
    lo = corners * s
    return np.all((lo < np.array(window.hi)) & (lo + s > np.array(window.lo)), axis=-1)


def _inside(level: int, corners: np.ndarray, window: Window) -> bool:
    s = 2 ** level
    return bool(np.all(corners.min(axis=0) * s >= np.array(window.lo))
                and np.all((corners.max(axis=0) + 1) * s <= np.array(window.hi)))


def _overlap_volume(level: int, corners: np.ndarray, window: Window) -> int:
    s = 2 ** level
    if len(corners) == 0:
        return 0
    if _inside(level, corners, window):
        return len(corners) * s ** window.dim
    lo = np.maximum(corners * s, np.array(window.lo))
    hi = np.minimum(corners * s + s, np.array(window.hi))
    ext = np.clip(hi - lo, 0, None)
    return int(np.prod(ext, axis=1, dtype=np.int64).sum()) if len(ext) else 0


def _cell_keys(level: int, corners: np.ndarray, window: Window) -> np.ndarray:
    """Injective int64 code of cube corners of one level inside the window's grid."""
    s = 2 ** level
    base = np.array(window.lo) // s
    ext = -(-np.array(window.hi) // s) - base
    return np.ravel_multi_index((corners - base).T.astype(np.int64), tuple(ext))


_CORNER = np.int32  # corner dtype for enumeration; windows beyond 2^30 cells are out of scope


def _top_corners(window: Window, level: int) -> np.ndarray:
    s = 2 ** level
    ranges = [np.arange(l // s, -(-h // s)) for l, h in zip(window.lo, window.hi)]
    grid = np.meshgrid(*ranges, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1).astype(_CORNER)


def scan_maximal(window: Window, max_level: int, chunk: int = 1 << 14) -> Iterator[tuple[int, np.ndarray]]:
    """Stream ``(level, corners)`` blocks of maximal admissible cubes meeting the window.

    Descends from ``max_level``: admissible cubes are emitted, the rest are
    split into their ``2^{2n}`` children.  Raises :class:`LevelCapTooSmall`
    if an admissible top cube has an admissible parent (its maximal ancestor
    lies above the cap).
    """
    if max_level < 0:
        raise LevelCapTooSmall("max_level must be >= 0")
    d = window.dim
    offsets = np.array(list(itertools.product((0, 1), repeat=d)), dtype=_CORNER)
    top = _top_corners(window, max_level)
    aligned = _inside(max_level, top, window)
    adm = admissible_mask(max_level, top)
    if np.any(adm):
        up = admissible_mask(max_level + 1, top[adm] // 2)
        if np.any(up):
            raise LevelCapTooSmall(f"cube at level {max_level} with corner {top[adm][up][0].tolist()} "
                                   "has an admissible parent; raise max_level")
        yield max_level, top[adm]
    pending = top[~adm]
    for level in range(max_level - 1, -1, -1):
        nxt = []
        for s in range(0, len(pending), chunk):
            kids = (2 * pending[s:s + chunk, None, :] + offsets[None, :, :]).reshape(-1, d)
            if not aligned:
                kids = kids[_meets(level, kids, window)]
            m = admissible_mask(level, kids)
            if np.any(m):
                yield level, kids[m]
            if level > 0:
                nxt.append(kids[~m])
        pending = np.concatenate(nxt) if nxt else np.zeros((0, d), dtype=_CORNER)


@dataclass
class CubeDecomposition:
    window: Window
    max_level: int
    levels: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.window.n

    def counts(self) -> dict[int, int]:
        return {m: len(c) for m, c in sorted(self.levels.items(), reverse=True)}

    def cubes(self) -> list[DyadicCube]:
        """All cubes, sorted by level then corner (lexicographic)."""
        out = []
        for m in sorted(self.levels):
            out.extend(DyadicCube(m, tuple(row)) for row in sorted(map(tuple, self.levels[m].tolist())))
        return out

    def locate(self, x) -> DyadicCube:
        levels, corners = route(np.atleast_2d(x), self.max_level)
        return DyadicCube(int(levels[0]), tuple(corners[0]))

    def verify(self, probes: int = 0, seed: int = 0) -> dict:
        """Exact partition check; raises :class:`NumericalFailure` on any defect."""
        return verify_partition(self.window, self.max_level, self.levels.items(), probes, seed)

    def to_jsonl(self) -> str:
        return "\n".join(c.to_json() for c in self.cubes())


class PartitionChecker:
    """Streaming partition check for the (level, corners) blocks of one enumeration.

    Every cube must be admissible with a non-admissible parent (hence, by
    upward inheritance, only non-admissible strict ancestors, so no returned
    cube contains another), cubes of one level must be distinct, and the
    clipped volumes must add up to the window volume.  Together these force
    a disjoint cover of the window.
    """

    def __init__(self, window: Window, max_level: int):
        self.window = window
        self.max_level = max_level
        self.volume = 0
        self.keys: dict[int, list[np.ndarray]] = {}

    def feed(self, level: int, corners: np.ndarray) -> None:
        if not np.all(admissible_mask(level, corners)):
            raise NumericalFailure(f"non-admissible cube at level {level}")
        if np.any(admissible_mask(level + 1, corners // 2)):
            raise NumericalFailure(f"cube at level {level} has an admissible parent")
        self.volume += _overlap_volume(level, corners, self.window)
        self.keys.setdefault(level, []).append(_cell_keys(level, corners, self.window))

    def finish(self, probes: int = 0, seed: int = 0) -> dict:
        sorted_keys = {}
        for level, parts in self.keys.items():
            k = np.sort(np.concatenate(parts))
            if np.any(k[1:] == k[:-1]):
                raise NumericalFailure(f"duplicate cubes at level {level}")
            sorted_keys[level] = k
        if self.volume != self.window.volume():
            raise NumericalFailure(f"covered volume {self.volume} != window volume {self.window.volume()}")
        if probes:
            rng = np.random.default_rng(seed)
            w = self.window
            pts = rng.uniform(np.array(w.lo), np.array(w.hi), (probes, w.dim))
            levels, corners = route(pts, self.max_level)
            for m in np.unique(levels):
                sel = levels == m
                k = _cell_keys(int(m), corners[sel], w)
                known = sorted_keys.get(int(m), np.zeros(0, dtype=np.int64))
                pos = np.minimum(np.searchsorted(known, k), max(len(known) - 1, 0))
                if len(known) == 0 or not np.all(known[pos] == k):
                    raise NumericalFailure(f"a probe point routed to a level {m} cube that was not enumerated")
        return {"volume": self.volume, "probes": probes}


def verify_partition(window: Window, max_level: int, blocks, probes: int = 0, seed: int = 0) -> dict:
    checker = PartitionChecker(window, max_level)
    for level, corners in blocks:
        checker.feed(level, corners)
    return checker.finish(probes, seed)


def enumerate_maximal(window: Window, max_level: int, verify: bool = True, probes: int = 10_000,
                      seed: int = 0) -> CubeDecomposition:
    """Materialized decomposition of the window (use :func:`scan_maximal` for large windows)."""
    blocks: dict[int, list[np.ndarray]] = {}
    for level, corners in scan_maximal(window, max_level):
        blocks.setdefault(level, []).append(corners)
    levels = {m: np.concatenate(p) for m, p in blocks.items()}
    dec = CubeDecomposition(window, max_level, levels)
    if verify:
        dec.verify(probes=probes, seed=seed)
    return dec


def maximal_level(points: np.ndarray, max_level: int) -> np.ndarray:
    """Level of the maximal admissible cube containing each point of R^{2n}."""
    pts = np.asarray(points, dtype=float)
    base = np.floor(pts).astype(np.int64)
    level = np.zeros(len(pts), dtype=np.int64)
    anc = base
    for m in range(1, max_level + 2):
        anc = anc // 2
        ok = admissible_mask(m, anc)
        if m == max_level + 1:
            if np.any(ok & (level == max_level)):
                raise LevelCapTooSmall(f"a maximal cube lies above level {max_level}")
            break
        level = np.where(ok & (level == m - 1), m, level)
    return level


def route(points, max_level: int) -> tuple[np.ndarray, np.ndarray]:
    """``(levels, corners)`` of the maximal admissible cube containing each point (half-open)."""
    pts = np.asarray(points, dtype=float)
    levels = maximal_level(pts, max_level)
    corners = np.floor(pts).astype(np.int64) >> levels[:, None]
    return levels, corners


def _window_factor(window: Window, first: bool) -> tuple[np.ndarray, np.ndarray]:
    n = window.n
    sl = slice(0, n) if first else slice(n, 2 * n)
    return np.array(window.lo[sl]), np.array(window.hi[sl])


def partner_count(Q: DyadicCube, dec: CubeDecomposition, side: str = "Q") -> int:
    """Number of cubes ``R`` with ``Q x R`` (or ``R x Q`` when side="R") in the decomposition.

    Raises :class:`WindowTooSmall` if the window may cut off partners: every
    partner lies within 3 cells of Q at its level, so that neighbourhood
    must fit inside the window's other factor.
    """
    n = dec.n
    if Q.dim != n:
        raise ValidationError(f"Q must live in R^{n}")
    lo, hi = _window_factor(dec.window, first=(side != "Q"))
    s = 2 ** Q.level
    c = np.array(Q.corner)
    if np.any((c - 3) * s < lo) or np.any((c + 4) * s > hi):
        raise WindowTooSmall(f"partners of {Q} may fall outside the window")
    corners = dec.levels.get(Q.level)
    if corners is None:
        return 0
    own = corners[:, :n] if side == "Q" else corners[:, n:]
    return int(np.count_nonzero(np.all(own == c, axis=1)))


def _interior_keys(level: int, own: np.ndarray, other_lo, other_hi, reach: int = 3) -> np.ndarray:
    s = 2 ** level
    return np.all(((own - reach) * s >= other_lo) & ((own + reach + 1) * s <= other_hi), axis=1)


class PartnerCounter:
    """Streaming partner counts: for each factor cube, how many cubes pair with it.

    Counts are accumulated with ``bincount`` over encoded factor corners.
    Only factor cubes whose whole partner neighbourhood (3 cells at their
    level) lies inside the window's other factor are reported as interior;
    the rest may be truncated by the window and are flagged separately.
    """

    def __init__(self, window: Window):
        self.window = window
        self.acc: dict[tuple[int, str], np.ndarray] = {}
        self.meta: dict[tuple[int, str], tuple[np.ndarray, np.ndarray]] = {}

    def feed(self, level: int, corners: np.ndarray) -> None:
        n = self.window.n
        s = 2 ** level
        for side, first in (("Q", True), ("R", False)):
            own = corners[:, :n] if first else corners[:, n:]
            flo, fhi = _window_factor(self.window, first)
            base = flo // s
            ext = (-(-fhi // s)) - base
            idx = np.ravel_multi_index((own - base).T, tuple(ext))
            cnt = np.bincount(idx, minlength=int(np.prod(ext)))
            key = (level, side)
            self.acc[key] = self.acc[key] + cnt if key in self.acc else cnt
            self.meta[key] = (base, ext)

    def result(self) -> dict[int, dict]:
        out: dict[int, dict] = {}
        for (level, side), cnt in sorted(self.acc.items(), reverse=True):
            base, ext = self.meta[(level, side)]
            nz = np.nonzero(cnt)[0]
            own = np.stack(np.unravel_index(nz, tuple(ext)), axis=1) + base
            olo, ohi = _window_factor(self.window, side == "R")
            inner = _interior_keys(level, own, olo, ohi)
            rec = out.setdefault(level, {})
            rec[f"max_{side}"] = int(cnt[nz][inner].max()) if np.any(inner) else 0
            rec[f"max_{side}_all"] = int(cnt[nz].max())
            rec[f"interior_{side}"] = int(np.count_nonzero(inner))
            rec[f"edge_{side}"] = int(np.count_nonzero(~inner))
        return out


def partner_stats(window: Window, max_level: int, blocks=None) -> dict[int, dict]:
    """Per level: maximum partner count over factor cubes whose partner set fits in the window."""
    counter = PartnerCounter(window)
    for level, corners in (scan_maximal(window, max_level) if blocks is None else blocks):
        counter.feed(level, corners)
    return counter.result()


def cube_stats(window: Window, max_level: int, verify: bool = True, probes: int = 10_000) -> dict:
    """Per-level counts, partner maxima and the exact partition check, in one streaming pass."""
    counts: dict[int, int] = {}
    counter = PartnerCounter(window)
    checker = PartitionChecker(window, max_level) if verify else None
    for level, corners in scan_maximal(window, max_level):
        counts[level] = counts.get(level, 0) + len(corners)
        counter.feed(level, corners)
        if checker is not None:
            checker.feed(level, corners)
    partners = counter.result()
    info = {"n": window.n, "window": [list(window.lo), list(window.hi)], "max_level": max_level,
            "counts": dict(sorted(counts.items(), reverse=True)),
            "partners": partners,
            "max_partners": max((max(v["max_Q"], v["max_R"]) for v in partners.values()), default=0),
            "bound": 6 ** window.n}
    if checker is not None:
        checker.finish(probes)
        info["verified"] = True
    return info
