"""Root counting and location for entire functions on rectangles.

Counting uses the argument principle in its discrete form: walk the rectangle
boundary counterclockwise, accumulate principal-value phase increments of
``f`` between consecutive samples, and subdivide any edge segment whose
increment reaches ``pi/2`` until all increments are small.  The winding
number is then the total phase over ``2*pi``, which telescopes to an integer
up to float rounding; the residual defect is reported.

Targets expose scaled evaluation ``f = s * exp(m)`` with real ``m``, so
contours where ``|f|`` passes ``1e300`` still produce exact phases.  Targets
built from quasi-polynomials are first multiplied by ``exp(sigma0 * lam)``
(the least exponent), which leaves roots and winding numbers unchanged and
keeps magnitudes polynomial-sized on the right half plane.
"""

from __future__ import annotations

import math
import os
import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .quasipoly import QuasiPolynomial

__all__ = [
    "AnalyticTarget",
    "Region",
    "WindingResult",
    "Root",
    "GrowthScan",
    "RootFindingError",
    "BoundaryProximityError",
    "SubdivisionLimitError",
    "BoxBudgetError",
    "NewtonConvergenceError",
    "NewtonDivergenceError",
    "winding_number",
    "winding_profile",
    "count_roots",
    "isolate_roots",
    "refine_root",
    "scan_growth",
]

PHASE_LIMIT = math.pi / 2
_EDGE_POINTS = 16        # initial segments per rectangle edge
_MAX_SAMPLES = 1 << 20   # runaway-subdivision guard

_WORKERS_VAR = "QPROOTS_WORKERS"


class RootFindingError(RuntimeError):
    """Base class for counting and refinement failures."""


class BoundaryProximityError(RootFindingError):
    """``|f|`` fell under the proximity floor at a boundary sample."""

    def __init__(self, message: str, where: complex):
        super().__init__(message)
        self.where = where


class SubdivisionLimitError(RootFindingError):
    """Edge subdivision exceeded the boundary sample budget."""


class BoxBudgetError(RootFindingError):
    """Quadtree isolation exceeded its box budget."""


class NewtonConvergenceError(RootFindingError):
    """Newton iteration failed to converge within the step budget."""


class NewtonDivergenceError(RootFindingError):
    """Newton iteration left the safeguard disk around the seed."""


def _workers() -> int:
    raw = os.environ.get(_WORKERS_VAR)
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise RuntimeError(f"{_WORKERS_VAR} must be an integer (got {raw!r})")
    return max(n, 1)


def _seeded_rng(parts: Sequence[float], attempt: int) -> np.random.Generator:
    # Deterministic per (geometry, attempt): retries are reproducible.
    raw = struct.pack(f"<{len(parts)}d", *parts) + struct.pack("<q", attempt)
    return np.random.default_rng(zlib.crc32(raw))


@dataclass(frozen=True)
class Region:
    """Axis-aligned closed rectangle in the complex plane."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        vals = (self.re_min, self.re_max, self.im_min, self.im_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("region bounds must be finite")
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("region must have positive width and height")

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> complex:
        return complex(
            0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max)
        )

    def contains(self, z: complex, margin: float = 0.0) -> bool:
        return (
            self.re_min - margin <= z.real <= self.re_max + margin
            and self.im_min - margin <= z.imag <= self.im_max + margin
        )

    def scaled(self, factor: float) -> "Region":
        """Rectangle with the same center and sides scaled by ``factor``."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        c = self.center
        hw = 0.5 * self.width * factor
        hh = 0.5 * self.height * factor
        return Region(c.real - hw, c.real + hw, c.imag - hh, c.imag + hh)

    def inflated(self, margins: Sequence[float]) -> "Region":
        left, right, down, up = margins
        return Region(
            self.re_min - left, self.re_max + right,
            self.im_min - down, self.im_max + up,
        )

    def split(self, at: complex) -> tuple["Region", "Region", "Region", "Region"]:
        """Partition into four boxes meeting at ``at`` (SW, SE, NW, NE)."""
        x, y = at.real, at.imag
        if not (self.re_min < x < self.re_max and self.im_min < y < self.im_max):
            raise ValueError("split point must be interior")
        return (
            Region(self.re_min, x, self.im_min, y),
            Region(x, self.re_max, self.im_min, y),
            Region(self.re_min, x, y, self.im_max),
            Region(x, self.re_max, y, self.im_max),
        )


class AnalyticTarget:
    """Entire function with scaled evaluation and a derivative.

    ``value_scaled(lams)`` returns ``(s, m)`` with ``f = s * exp(m)`` and
    ``m`` real per point; plain ``value``/``deriv`` rebuild the direct values
    (and overflow to ``inf`` honestly when the true magnitude does).
    """

    def __init__(
        self,
        value_scaled,
        deriv_scaled=None,
        label: str = "target",
        rotation_hint: float = 0.0,
    ):
        self._value_scaled = value_scaled
        self._deriv_scaled = deriv_scaled
        self.label = label
        # Bound on the steady phase rate (radians per unit length) of the
        # exponential content.  Boundary sampling is seeded densely enough
        # that this much rotation cannot alias past a full turn.
        self.rotation_hint = float(rotation_hint)

    @classmethod
    def from_quasipolynomial(cls, qp: QuasiPolynomial, label: str = "") -> "AnalyticTarget":
        if qp.is_zero:
            raise ValueError("cannot build a root-counting target from zero")
        sigma0, g = qp.factor_exponential()
        if g.is_zero:
            raise ValueError("cannot build a root-counting target from zero")
        dg = g.derivative()
        rate = max(abs(complex(t.sigma).real) for t in g.terms)
        t = cls(
            g.eval_scaled_many,
            dg.eval_scaled_many,
            label or "quasi-polynomial",
            rotation_hint=rate,
        )
        t.function = g
        t.exponent_shift = sigma0
        return t

    @classmethod
    def from_callables(
        cls,
        f: Callable[[complex], complex],
        df: Optional[Callable[[complex], complex]] = None,
        vectorized: bool = False,
        label: str = "callable",
        rotation_hint: float = 0.0,
    ) -> "AnalyticTarget":
        def wrap(fn):
            def scaled(lams):
                if vectorized:
                    v = np.asarray(fn(lams), np.complex128)
                else:
                    v = np.array([fn(complex(z)) for z in lams], np.complex128)
                return v, np.zeros(v.shape[0])
            return scaled

        return cls(
            wrap(f),
            wrap(df) if df is not None else None,
            label,
            rotation_hint=rotation_hint,
        )

    def value_scaled(self, lams: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self._value_scaled(np.ascontiguousarray(lams, np.complex128))

    def deriv_scaled(self, lams: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self._deriv_scaled is None:
            raise RootFindingError(f"{self.label}: no derivative available")
        return self._deriv_scaled(np.ascontiguousarray(lams, np.complex128))

    def _unscale(self, s, m) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return s * np.exp(m)

    def value_many(self, lams: np.ndarray) -> np.ndarray:
        return self._unscale(*self.value_scaled(lams))

    def value(self, lam: complex) -> complex:
        return complex(self.value_many(np.array([lam]))[0])

    def deriv(self, lam: complex) -> complex:
        s, m = self.deriv_scaled(np.array([lam]))
        return complex(self._unscale(s, m)[0])

    def newton_ratio(self, lam: complex) -> complex:
        """``f(lam) / f'(lam)`` assembled from scaled pieces."""
        arr = np.array([lam])
        sf, mf = self.value_scaled(arr)
        sd, md = self.deriv_scaled(arr)
        if sd[0] == 0:
            raise NewtonConvergenceError(f"{self.label}: derivative vanished")
        if sf[0] == 0:
            return 0j
        expo = float(mf[0] - md[0])
        if expo > 700.0:
            raise NewtonDivergenceError(f"{self.label}: newton step overflowed")
        return complex(sf[0] / sd[0]) * math.exp(expo)

    def log_abs(self, lam: complex) -> float:
        s, m = self.value_scaled(np.array([lam]))
        a = abs(complex(s[0]))
        if a == 0.0:
            return -math.inf
        return float(m[0]) + math.log(a)


@dataclass(frozen=True)
class WindingResult:
    """Integer winding count with its pre-rounding defect."""

    count: int
    defect: float
    samples: int
    region: Region


def _edge_count(length: float, rate: float) -> int:
    # Keep the steady rotation under pi/4 per initial segment, so a wrapped
    # phase increment cannot masquerade as a small one and dodge subdivision.
    by_rate = math.ceil(length * rate / (math.pi / 4)) if rate > 0 else 0
    return min(max(_EDGE_POINTS, by_rate), _MAX_SAMPLES // 8)


def _boundary_polyline(region: Region, rate: float) -> np.ndarray:
    nh = _edge_count(region.width, rate)
    nv = _edge_count(region.height, rate)
    bottom = np.linspace(region.re_min, region.re_max, nh, endpoint=False)
    right = np.linspace(region.im_min, region.im_max, nv, endpoint=False)
    top = np.linspace(region.re_max, region.re_min, nh, endpoint=False)
    left = np.linspace(region.im_max, region.im_min, nv, endpoint=False)
    pts = np.concatenate(
        [
            bottom + 1j * region.im_min,
            region.re_max + 1j * right,
            top + 1j * region.im_max,
            region.re_min + 1j * left,
        ]
    )
    return pts.astype(np.complex128)


def _proximity_check(pts, s, m, boundary_eps, label):
    a = np.abs(s)
    with np.errstate(divide="ignore"):
        log_f = np.where(a > 0.0, m + np.log(np.where(a > 0.0, a, 1.0)), -np.inf)
    floor = math.log(boundary_eps) + np.log1p(np.abs(pts))
    hits = log_f < floor
    if hits.any():
        z = complex(pts[int(np.argmax(hits))])
        raise BoundaryProximityError(
            f"{label}: |f| under the proximity floor at {z}"
            " (a root sits on or near the contour)",
            z,
        )


def _adaptive_phase_sum(target, region, boundary_eps, max_depth, phase_limit):
    pts = _boundary_polyline(region, target.rotation_hint)
    s, m = target.value_scaled(pts)
    _proximity_check(pts, s, m, boundary_eps, target.label)
    depth = np.zeros(pts.shape[0], np.int64)
    while True:
        nxt = np.roll(s, -1)
        dphi = np.angle(nxt * np.conj(s))
        bad = np.abs(dphi) >= phase_limit
        if not bad.any():
            return float(dphi.sum()), pts.shape[0]
        if (depth[bad] >= max_depth).any():
            # A phase step that survives max_depth halvings means a root lies
            # within ~spacing of the contour, closer than the |f| floor can
            # detect for simple roots; report it as a proximity failure so
            # the retry machinery (inflation, split jitter) can move the
            # contour instead of giving up.
            idx = int(np.argmax(bad & (depth >= max_depth)))
            z = complex(0.5 * (pts[idx] + pts[(idx + 1) % pts.shape[0]]))
            raise BoundaryProximityError(
                f"{target.label}: phase step never settled near {z:.6g} after"
                f" {max_depth} subdivisions (a root sits on or near the"
                " contour)",
                z,
            )
        if pts.shape[0] + int(bad.sum()) > _MAX_SAMPLES:
            raise SubdivisionLimitError(
                f"{target.label}: boundary sampling exceeded {_MAX_SAMPLES} points"
            )
        where = np.flatnonzero(bad)
        mids = 0.5 * (pts[where] + np.roll(pts, -1)[where])
        ms, mm = target.value_scaled(mids)
        _proximity_check(mids, ms, mm, boundary_eps, target.label)
        pts = np.insert(pts, where + 1, mids)
        s = np.insert(s, where + 1, ms)
        m = np.insert(m, where + 1, mm)
        reps = np.where(bad, 2, 1)
        depth = np.repeat(np.where(bad, depth + 1, depth), reps)


def winding_profile(
    target: AnalyticTarget,
    region: Region,
    boundary_eps: float = 1e-8,
    max_depth: int = 24,
) -> WindingResult:
    """Winding number of ``target`` around ``region`` with diagnostics.

    Phase increments between consecutive boundary samples are kept under
    ``pi/2`` by adaptive subdivision, so the accumulated total telescopes to
    ``2*pi*k`` exactly up to float rounding.  A sample with
    ``|f| < boundary_eps * (1 + |lam|)`` raises
    :class:`BoundaryProximityError`, since a root that close to the contour
    makes any count unreliable.
    """
    limit = PHASE_LIMIT
    result = None
    for _ in range(3):
        total, used = _adaptive_phase_sum(target, region, boundary_eps, max_depth, limit)
        turns = total / (2.0 * math.pi)
        count = int(round(turns))
        defect = abs(turns - count)
        result = WindingResult(count, defect, used, region)
        if defect <= 0.05:
            return result
        limit *= 0.5
    raise RootFindingError(
        f"{target.label}: winding defect {result.defect:.3g} never settled"
        f" under 0.05 over {region}"
    )


def winding_number(
    target: AnalyticTarget,
    region: Region,
    boundary_eps: float = 1e-8,
    max_depth: int = 24,
) -> int:
    return winding_profile(target, region, boundary_eps, max_depth).count


def count_roots(
    target: AnalyticTarget,
    region: Region,
    boundary_eps: float = 1e-8,
    max_depth: int = 24,
    max_attempts: int = 8,
) -> int:
    """Count roots in ``region``, nudging the boundary off nearby roots.

    On a proximity failure the rectangle is inflated outward by a
    deterministic jitter of order ``1e-6 * diameter`` (growing with each
    attempt, at most ``max_attempts`` tries), so a root sitting on the
    requested boundary ends up strictly inside and is counted.
    """
    base = (region.re_min, region.re_max, region.im_min, region.im_max)
    err: BoundaryProximityError | None = None
    for attempt in range(max_attempts):
        if attempt == 0:
            reg = region
        else:
            rng = _seeded_rng(base, attempt)
            unit = 1e-6 * region.diameter * attempt
            reg = region.inflated(unit * rng.uniform(0.5, 1.5, size=4))
        try:
            return winding_number(target, reg, boundary_eps, max_depth)
        except BoundaryProximityError as e:
            err = e
    raise err


def _split_point(region: Region, attempt: int) -> complex:
    c = region.center
    if attempt == 0:
        return c
    rng = _seeded_rng(
        (region.re_min, region.re_max, region.im_min, region.im_max), attempt
    )
    frac = 0.3 * attempt / 8.0
    dx = region.width * frac * (rng.uniform() - 0.5)
    dy = region.height * frac * (rng.uniform() - 0.5)
    return complex(c.real + dx, c.imag + dy)


def isolate_roots(
    target: AnalyticTarget,
    region: Region,
    max_boxes: int = 1024,
    boundary_eps: float = 1e-8,
    max_depth: int = 24,
) -> list[tuple[Region, int]]:
    """Quadtree isolation: boxes with a single root, or tiny cluster boxes.

    Splits the region until every returned box counts one root, or is
    smaller than ``1e-8`` across (returned with its count as a cluster,
    which is how multiple roots show up).  Child boxes partition their
    parent exactly; when a root lands on a split line the split point is
    jittered deterministically and retried.  Counts over the returned boxes
    sum to the count of the whole region.

    Near a multiple root the ``|f|`` proximity floor would eventually
    obstruct every possible split: for an m-fold root, ``|f|`` stays under
    the floor within distance ``eps^(1/m)`` of the root — far wider than
    the cluster emission size (0.1 for an 8-fold root).  When every
    jittered split of a box at most ``0.5`` across is obstructed, the
    splits retry with the floor disabled; the phase-defect check alone
    certifies those counts.
    """
    total = count_roots(target, region, boundary_eps, max_depth)
    if total == 0:
        return []
    out: list[tuple[Region, int]] = []
    stack: list[tuple[Region, int]] = [(region, total)]
    boxes_used = 1
    workers = _workers()
    pool = ThreadPoolExecutor(max_workers=4) if workers > 1 else None
    try:
        while stack:
            box, cnt = stack.pop()
            if cnt == 1 or max(box.width, box.height) < 1e-8:
                out.append((box, cnt))
                continue
            boxes_used += 4
            if boxes_used > max_boxes:
                raise BoxBudgetError(
                    f"{target.label}: isolation exceeded {max_boxes} boxes"
                )
            eps_schedule = [boundary_eps] * 8
            if box.diameter <= 0.5:
                eps_schedule += [1e-300] * 8
            children = counts = None
            for attempt, eps in enumerate(eps_schedule):
                children = box.split(_split_point(box, attempt % 8))
                try:
                    if pool is not None:
                        counts = list(
                            pool.map(
                                lambda ch: winding_number(
                                    target, ch, eps, max_depth
                                ),
                                children,
                            )
                        )
                    else:
                        counts = [
                            winding_number(target, ch, eps, max_depth)
                            for ch in children
                        ]
                    break
                except BoundaryProximityError:
                    counts = None
            if counts is None:
                raise BoundaryProximityError(
                    f"{target.label}: a root obstructs every tried split of"
                    f" the box centered at {box.center}",
                    box.center,
                )
            if sum(counts) != cnt:
                raise RootFindingError(
                    f"{target.label}: child counts {counts} do not add up to"
                    f" {cnt} over the box centered at {box.center}"
                )
            for ch, c in zip(children, counts):
                if c > 0:
                    stack.append((ch, c))
    finally:
        if pool is not None:
            pool.shutdown(wait=False)
    out.sort(key=lambda bc: (bc[0].center.real, bc[0].center.imag))
    return out


@dataclass(frozen=True)
class Root:
    """Refined root with the box it came from."""

    location: complex
    residual: float
    multiplicity: int
    box: Region


def _residual(target: AnalyticTarget, lam: complex) -> float:
    la = target.log_abs(lam)
    if la == -math.inf:
        return 0.0
    return math.exp(min(la, 700.0))


def _confirm_multiplicity(target, lam, fallback):
    # Proximity floor effectively off: only an exact zero on the contour
    # trips it, and the phase walk stays valid at any small magnitude.
    half = 1e-5 * (1.0 + abs(lam))
    for _ in range(3):
        box = Region(lam.real - half, lam.real + half, lam.imag - half, lam.imag + half)
        try:
            c = winding_number(target, box, boundary_eps=1e-300, max_depth=24)
        except BoundaryProximityError:
            half *= 0.5
            continue
        return (max(c, 1), box)
    return (fallback, None)


def refine_root(
    target: AnalyticTarget,
    seed: complex,
    tol: float = 1e-12,
    max_iter: int = 50,
    box: Optional[Region] = None,
) -> Root:
    """Newton refinement from ``seed`` with a divergence safeguard.

    Converges when the step satisfies ``|step| <= tol * (1 + |lam|)``.
    An m-fold root slows plain Newton to linear convergence with factor
    about ``(m - 1) / m``; when the step ratios expose that rate, the
    iteration switches to the accelerated step ``m * f / f'``, which is
    quadratic at an m-fold root.  The resulting multiplicity estimate is
    confirmed by a winding count over a small box.
    """
    lam = complex(seed)
    guard = 10.0 * (1.0 + abs(lam))
    steps: list[float] = []
    converged = False
    for _ in range(max_iter):
        step = target.newton_ratio(lam)
        lam = lam - step
        if abs(lam - seed) > guard:
            raise NewtonDivergenceError(
                f"{target.label}: newton left the safeguard disk around {seed}"
            )
        steps.append(abs(step))
        if abs(step) <= tol * (1.0 + abs(lam)):
            converged = True
            break

    def _rate_estimate() -> int:
        floor = 1e-14 * (1.0 + abs(lam))
        ratios = [
            b / a for a, b in zip(steps, steps[1:]) if a > floor and b > floor
        ]
        if len(ratios) < 2:
            return 1
        tail = ratios[-3:]
        rate = sorted(tail)[len(tail) // 2]
        if rate < 0.2 or rate > 0.999:
            return 1
        est = int(round(1.0 / max(1.0 - rate, 1e-3)))
        return min(max(est, 2), 12)

    mult = _rate_estimate()
    if not converged and mult > 1:
        for _ in range(25):
            step = mult * target.newton_ratio(lam)
            lam = lam - step
            if abs(lam - seed) > guard:
                raise NewtonDivergenceError(
                    f"{target.label}: newton left the safeguard disk around {seed}"
                )
            if abs(step) <= tol * (1.0 + abs(lam)):
                converged = True
                break
    if not converged:
        raise NewtonConvergenceError(
            f"{target.label}: no convergence from {seed} in {max_iter} steps"
        )
    confirm_box = None
    if mult > 1:
        mult, confirm_box = _confirm_multiplicity(target, lam, mult)
    if box is None:
        box = confirm_box
    if box is None:
        half = 1e-5 * (1.0 + abs(lam))
        box = Region(lam.real - half, lam.real + half, lam.imag - half, lam.imag + half)
    return Root(lam, _residual(target, lam), mult, box)


def _descend_unit_box(target: AnalyticTarget, box: Region, boundary_eps: float) -> Region:
    """Quarter of ``box`` certified to hold its single root."""
    eps_schedule = [boundary_eps] * 8
    if box.diameter <= 0.5:
        # near the root the |f| floor obstructs every line; the defect
        # check still certifies the counts (see isolate_roots)
        eps_schedule += [1e-300] * 8
    for attempt, eps in enumerate(eps_schedule):
        children = box.split(_split_point(box, attempt % 8))
        try:
            counts = [count_roots(target, child, eps) for child in children]
        except RootFindingError:
            continue
        if sorted(counts) == [0, 0, 0, 1]:
            return children[counts.index(1)]
    raise RootFindingError(
        f"{target.label}: could not shrink the unit box at {box.center}"
    )


def refine_in_box(
    target: AnalyticTarget,
    box: Region,
    tol: float = 1e-12,
    boundary_eps: float = 1e-8,
    max_shrink: int = 48,
) -> Root:
    """Refine the single root certified inside ``box`` without losing it.

    Newton from the box center can escape into the basin of a different
    root outside the box, which would contradict the winding certificate
    for the box.  Whenever the iteration fails or lands outside, the box
    is shrunk by count-preserving subdivision (keeping the quarter whose
    count stays one) and Newton restarts from the new center, so the
    returned location always lies in the original box.
    """
    margin = 1e-9 * (1.0 + box.diameter)
    cur = box
    for _ in range(max_shrink):
        try:
            root = refine_root(target, cur.center, tol, box=box)
            if box.contains(root.location, margin):
                return root
        except (NewtonConvergenceError, NewtonDivergenceError):
            pass
        if cur.diameter <= 1e-13 * (1.0 + abs(cur.center)):
            break
        cur = _descend_unit_box(target, cur, boundary_eps)
    lam = cur.center
    return Root(lam, _residual(target, lam), 1, box)


@dataclass(frozen=True)
class GrowthScan:
    """Root counts over nested scalings of a base rectangle."""

    factors: tuple[float, ...]
    regions: tuple[Region, ...]
    counts: tuple[Optional[int], ...]
    verdict: str
    summary: str


def _scan_verdict(counts: Sequence[Optional[int]]) -> tuple[str, str]:
    if any(c is None for c in counts):
        failed = sum(1 for c in counts if c is None)
        return "incomplete", f"scan incomplete: {failed} region(s) failed to count"
    vals = [int(c) for c in counts]
    if len(vals) == 1:
        return "stabilized", f"counts stabilized at value {vals[0]}"
    if all(b > a for a, b in zip(vals, vals[1:])):
        return "strictly_increasing", "counts strictly increased across all steps"
    if vals[-1] == vals[-2]:
        return "stabilized", f"counts stabilized at value {vals[-1]}"
    return "mixed", "counts grew without settling"


def scan_growth(
    target: AnalyticTarget,
    base: Region,
    factors: Sequence[float],
    boundary_eps: float = 1e-8,
    max_depth: int = 24,
) -> GrowthScan:
    """Count roots over ``base`` scaled by each factor and classify the trend.

    Factors must be strictly increasing with first factor 1, so the regions
    are nested and the counts cannot decrease.  Strictly increasing counts
    are the signature of infinitely many roots; counts that stop moving
    point at a polynomial-like root set.  A region whose count fails (after
    the jittered retries) records ``None`` and the scan is marked
    incomplete rather than aborted.
    """
    fs = [float(f) for f in factors]
    if not fs:
        raise ValueError("need at least one factor")
    if fs[0] != 1.0:
        raise ValueError("first factor must be 1")
    if any(b <= a for a, b in zip(fs, fs[1:])):
        raise ValueError("factors must be strictly increasing")
    regions = tuple(base.scaled(f) for f in fs)

    def one(reg: Region) -> Optional[int]:
        try:
            return count_roots(target, reg, boundary_eps, max_depth)
        except RootFindingError:
            return None

    workers = _workers()
    if workers > 1 and len(regions) > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(regions))) as pool:
            counts = tuple(pool.map(one, regions))
    else:
        counts = tuple(one(reg) for reg in regions)
    verdict, summary = _scan_verdict(counts)
    return GrowthScan(tuple(fs), regions, counts, verdict, summary)
