"""Characteristic quasi-polynomials of linear delay systems.

For ``x'(t) = A x(t) + sum_j B_j x(t - tau_j)`` the characteristic function
is ``det(lam*I - A - sum_j B_j exp(-tau_j * lam))``.  The determinant is
expanded by minors over a ring of polynomials graded by delay multi-indices,
with no division, so exponent bookkeeping stays exact: a monomial that used
``B_j`` a total of ``alpha_j`` times carries ``exp(-(alpha . tau) * lam)``.

Delays are either plain floats or exact rational combinations of a declared
basis of positive reals assumed rationally independent.  In the exact form,
exponent collisions (commensurate delays) merge by exact rational
arithmetic on the basis coordinates, never by floating comparison.

The single-delay path rescales to ``mu = tau * lam`` first, which makes the
exponents the integers ``0..n`` and permits a complex delay; roots map back
through ``lam = mu / tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .quasipoly import Polynomial, QuasiPolynomial, Term

__all__ = [
    "DelaySpec",
    "DelaySystem",
    "TraceVerdict",
    "IndependenceVerdict",
    "ExpansionReport",
    "build_characteristic_single",
    "build_characteristic_multi",
    "check_trace_condition",
    "check_delay_independence",
    "verify_expansion_structure",
]

MAX_DIMENSION = 8

RationalLike = Union[int, Fraction, str, tuple]


def _as_fraction(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rational coordinates")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, tuple) and len(x) == 2:
        return Fraction(int(x[0]), int(x[1]))
    if isinstance(x, float):
        raise TypeError(
            f"delay coordinates must be exact rationals, not float {x!r};"
            " use DelaySpec.from_values for plain float delays"
        )
    raise TypeError(f"cannot interpret {x!r} as a rational")


def _is_exact_number(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


@dataclass(frozen=True)
class DelaySpec:
    """Delay values, either exact over a rational basis or plain floats.

    Exact form: ``tau_j = sum_m coords[j][m] * basis_values[m]`` with
    rational coordinates over positive basis reals declared rationally
    independent.  Float form keeps only the numeric values, and rational
    independence then becomes undecidable here.
    """

    basis_labels: Optional[tuple[str, ...]] = None
    basis_values: Optional[tuple] = None
    coords: Optional[tuple[tuple[Fraction, ...], ...]] = None
    float_delays: Optional[tuple[float, ...]] = None

    @classmethod
    def exact(cls, basis: Iterable[tuple[str, object]], rows: Sequence[Sequence[RationalLike]]) -> "DelaySpec":
        pairs = list(basis)
        labels = tuple(str(lbl) for lbl, _ in pairs)
        values = tuple(v if _is_exact_number(v) else float(v) for _, v in pairs)
        if not labels:
            raise ValueError("basis must be nonempty")
        if len(set(labels)) != len(labels):
            raise ValueError("basis labels must be distinct")
        for v in values:
            if not (float(v) > 0.0 and math.isfinite(float(v))):
                raise ValueError("basis values must be positive and finite")
        coords = tuple(tuple(_as_fraction(x) for x in row) for row in rows)
        if not coords:
            raise ValueError("need at least one delay row")
        for row in coords:
            if len(row) != len(labels):
                raise ValueError("each delay row must match the basis length")
        spec = cls(labels, values, coords, None)
        spec._check_increasing()
        return spec

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "DelaySpec":
        vals = tuple(float(v) for v in values)
        if not vals:
            raise ValueError("need at least one delay")
        for v in vals:
            if not math.isfinite(v):
                raise ValueError("delays must be finite")
        spec = cls(None, None, None, vals)
        spec._check_increasing()
        return spec

    def _check_increasing(self):
        vs = [float(v) for v in self.values]
        if vs[0] <= 0:
            raise ValueError("delays must be positive")
        if any(b <= a for a, b in zip(vs, vs[1:])):
            raise ValueError("delays must be strictly increasing")

    @property
    def is_exact(self) -> bool:
        return self.coords is not None

    @property
    def has_exact_basis(self) -> bool:
        return self.is_exact and all(_is_exact_number(v) for v in self.basis_values)

    @property
    def k(self) -> int:
        return len(self.coords) if self.is_exact else len(self.float_delays)

    @property
    def values(self) -> tuple:
        """Numeric delays: Fractions when the basis is exact, else floats."""
        if not self.is_exact:
            return self.float_delays
        out = []
        for row in self.coords:
            if self.has_exact_basis:
                out.append(sum((c * Fraction(v) for c, v in zip(row, self.basis_values)), Fraction(0)))
            else:
                out.append(float(sum(float(c) * float(v) for c, v in zip(row, self.basis_values))))
        return tuple(out)


@dataclass(frozen=True, eq=False)
class DelaySystem:
    """Square system matrices with their delay structure.

    ``delays`` is a :class:`DelaySpec` for the general path, or a single
    nonzero complex number for the rescaled single-delay path.
    """

    A: np.ndarray
    Bs: tuple[np.ndarray, ...]
    delays: Union[DelaySpec, complex]

    def __post_init__(self):
        A = np.asarray(self.A, np.complex128)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise ValueError("A must be square and at least 1x1")
        Bs = tuple(np.asarray(B, np.complex128) for B in self.Bs)
        if not Bs:
            raise ValueError("need at least one delay matrix")
        for B in Bs:
            if B.shape != A.shape:
                raise ValueError("every B_j must match the shape of A")
        A.setflags(write=False)
        for B in Bs:
            B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Bs", Bs)
        if isinstance(self.delays, DelaySpec):
            if self.delays.k != len(Bs):
                raise ValueError("delay count must match the number of B matrices")
        else:
            tau = complex(self.delays)
            if tau == 0:
                raise ValueError("the single delay must be nonzero")
            if len(Bs) != 1:
                raise ValueError("a scalar delay goes with exactly one B")
            object.__setattr__(self, "delays", tau)

    @classmethod
    def single(cls, A, B, tau) -> "DelaySystem":
        return cls(A, (B,), complex(tau))

    @classmethod
    def multi(cls, A, Bs, spec: DelaySpec) -> "DelaySystem":
        return cls(A, tuple(Bs), spec)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def k(self) -> int:
        return len(self.Bs)

    @property
    def tau(self) -> complex:
        if isinstance(self.delays, DelaySpec):
            raise ValueError("tau is only defined on the single-delay path")
        return self.delays


def _check_dimension(n: int):
    if n > MAX_DIMENSION:
        raise ValueError(
            f"matrix dimension {n} exceeds the supported bound {MAX_DIMENSION}"
            " for symbolic determinant expansion"
        )


def _det_graded(entries, n: int, k: int):
    """Laplace expansion with subset memoization.

    ``entries[i][j]`` maps delay multi-indices to polynomial factors.  The
    result is the same kind of dict for the full determinant.  Cost is
    O(2^n * n) ring operations, fine for n <= 8.
    """
    one = Polynomial((1,))
    zero_alpha = (0,) * k
    memo = {0: {zero_alpha: one}}

    def go(mask: int):
        hit = memo.get(mask)
        if hit is not None:
            return hit
        row = n - bin(mask).count("1")
        acc: dict = {}
        pos = 0
        for col in range(n):
            bit = 1 << col
            if not mask & bit:
                continue
            entry = entries[row][col]
            if entry:
                sub = go(mask & ~bit)
                flip = pos & 1
                for ae, pe in entry.items():
                    for asub, psub in sub.items():
                        alpha = tuple(x + y for x, y in zip(ae, asub))
                        prod = pe * psub
                        if flip:
                            prod = -prod
                        have = acc.get(alpha)
                        acc[alpha] = prod if have is None else have + prod
            pos += 1
        memo[mask] = acc
        return acc

    full = go((1 << n) - 1)
    return {a: p for a, p in full.items() if not p.is_zero}


def _entries_for(A, Bs, n, k, scale=1.0):
    """Entry dicts for ``lam*I - scale*A - sum_j scale*B_j X_j``."""
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            d = {}
            base = Polynomial((-scale * A[i, j], 1.0) if i == j else (-scale * A[i, j],))
            if not base.is_zero:
                d[(0,) * k] = base
            for l in range(k):
                c = Bs[l][i, j]
                if c != 0:
                    alpha = tuple(1 if m == l else 0 for m in range(k))
                    d[alpha] = Polynomial((-scale * c,))
            row.append(d)
        out.append(row)
    return out


def build_characteristic_single(system: DelaySystem) -> QuasiPolynomial:
    """Characteristic quasi-polynomial in the rescaled variable ``mu``.

    Computes ``det(mu*I - tau*A - exp(-mu)*tau*B)`` where ``mu = tau*lam``,
    so the exponents are exactly the integers ``0..n`` regardless of the
    (possibly complex) delay.  Roots in ``mu`` map back as ``lam = mu/tau``.
    """
    tau = system.tau
    n = system.n
    _check_dimension(n)
    entries = _entries_for(system.A, system.Bs, n, 1, scale=tau)
    det = _det_graded(entries, n, 1)
    terms = [Term(int(alpha[0]), poly) for alpha, poly in det.items()]
    return QuasiPolynomial.from_terms(terms, sigma_merge_tol=0.0)


def build_characteristic_multi(system: DelaySystem) -> QuasiPolynomial:
    """Characteristic quasi-polynomial ``det(lam*I - A - sum B_j e^(-tau_j lam))``.

    With an exact :class:`DelaySpec` the exponents ``alpha . tau`` are
    grouped by their exact basis coordinates before any numeric value is
    formed, so commensurate delays merge without floating error.  Plain
    float delays fall back to tolerance merging.
    """
    spec = system.delays
    if not isinstance(spec, DelaySpec):
        raise ValueError("build_characteristic_multi needs a DelaySpec")
    n = system.n
    k = system.k
    _check_dimension(n)
    entries = _entries_for(system.A, system.Bs, n, k)
    det = _det_graded(entries, n, k)
    if spec.is_exact:
        m = len(spec.basis_values)
        grouped: dict = {}
        for alpha, poly in det.items():
            coord = tuple(
                sum((Fraction(a) * spec.coords[j][col] for j, a in enumerate(alpha)), Fraction(0))
                for col in range(m)
            )
            have = grouped.get(coord)
            grouped[coord] = poly if have is None else have + poly
        terms = []
        for coord, poly in grouped.items():
            if spec.has_exact_basis:
                sigma = sum((c * Fraction(v) for c, v in zip(coord, spec.basis_values)), Fraction(0))
            else:
                sigma = float(sum(float(c) * float(v) for c, v in zip(coord, spec.basis_values)))
            terms.append(Term(sigma, poly))
        return QuasiPolynomial.from_terms(terms, sigma_merge_tol=0.0)
    taus = spec.float_delays
    terms = [
        Term(float(sum(a * t for a, t in zip(alpha, taus))), poly)
        for alpha, poly in det.items()
    ]
    return QuasiPolynomial.from_terms(terms)


@dataclass(frozen=True)
class TraceVerdict:
    """Whether ``tr(B)`` is nonzero, with the raw trace and threshold used."""

    holds: bool
    trace: complex
    threshold: float

    def __bool__(self) -> bool:
        return self.holds


def check_trace_condition(B, threshold_scale: float = 1e-14) -> TraceVerdict:
    """Decide ``tr(B) != 0``, the cheap certificate for infinitely many roots.

    Integer or rational input is decided exactly.  Float input compares
    ``|tr(B)|`` against ``threshold_scale * ||B||_F``, so a trace that is
    zero up to rounding is reported as zero.
    """
    M = np.asarray(B)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("trace condition needs a square matrix")
    exact = M.dtype.kind in "iu" or (
        M.dtype == object and all(_is_exact_number(x) for x in M.flat)
    )
    if exact:
        tr = sum(M[i, i] for i in range(M.shape[0]))
        return TraceVerdict(tr != 0, complex(tr), 0.0)
    Mc = M.astype(np.complex128)
    tr = complex(np.trace(Mc))
    threshold = threshold_scale * float(np.linalg.norm(Mc))
    return TraceVerdict(abs(tr) > threshold, tr, threshold)


@dataclass(frozen=True)
class IndependenceVerdict:
    """Rational independence of the delays: status and integer witness."""

    status: str  # "independent" | "dependent" | "unknown"
    witness: Optional[tuple[int, ...]] = None

    def __bool__(self) -> bool:
        return self.status == "independent"


def _rational_kernel(rows: list, ncols: int) -> list:
    """Kernel basis of a rational matrix given as rows, via exact RREF."""
    work = [list(r) for r in rows]
    pivots: list[int] = []
    pr = 0
    for c in range(ncols):
        pivot = next((r for r in range(pr, len(work)) if work[r][c] != 0), None)
        if pivot is None:
            continue
        work[pr], work[pivot] = work[pivot], work[pr]
        pv = work[pr][c]
        work[pr] = [x / pv for x in work[pr]]
        for r in range(len(work)):
            if r != pr and work[r][c] != 0:
                f = work[r][c]
                work[r] = [x - f * y for x, y in zip(work[r], work[pr])]
        pivots.append(c)
        pr += 1
        if pr == len(work):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -work[r][fc]
        basis.append(vec)
    return basis


def check_delay_independence(spec: DelaySpec) -> IndependenceVerdict:
    """Decide rational independence of exact delays.

    Exact delays are dependent iff some nonzero integer vector ``beta``
    kills every basis coordinate, ``sum_j beta_j * coords[j] = 0``; that is
    a rational kernel computation, done exactly.  The witness is scaled to
    coprime integers with positive leading entry.  Float delays return
    ``unknown``: rational independence is not decidable from floats.
    """
    if not spec.is_exact:
        return IndependenceVerdict("unknown")
    k = spec.k
    m = len(spec.basis_values)
    # Rows indexed by basis coordinate, columns by delay.
    rows = [[spec.coords[j][col] for j in range(k)] for col in range(m)]
    basis = _rational_kernel(rows, k)
    if not basis:
        return IndependenceVerdict("independent")
    vec = basis[0]
    denom_lcm = math.lcm(*(f.denominator for f in vec))
    ints = [int(f * denom_lcm) for f in vec]
    g = math.gcd(*(abs(v) for v in ints))
    ints = [v // g for v in ints]
    lead = next(v for v in ints if v != 0)
    if lead < 0:
        ints = [-v for v in ints]
    return IndependenceVerdict("dependent", tuple(ints))


@dataclass(frozen=True)
class ExpansionReport:
    """Structure of a rescaled single-delay characteristic."""

    n: int
    a1_coefficient: complex
    trace: complex
    matches_trace: bool
    trace_rel_error: float
    last_nonzero_exponent: int


def verify_expansion_structure(
    system: DelaySystem, f: QuasiPolynomial, rel_tol: float = 1e-9
) -> ExpansionReport:
    """Check the leading structure of a tau=1 single-delay characteristic.

    The exponent-zero part must be monic of degree ``n`` (that is the
    delay-free determinant).  The coefficient of degree ``n-1`` in the
    exponent-one part is compared against ``-tr(B)``; those two agreeing is
    what makes a nonzero trace certify infinitely many roots.  Also reports
    the largest exponent that survived expansion.
    """
    if isinstance(system.delays, DelaySpec) or system.tau != 1:
        raise ValueError("expansion check expects the single-delay system with tau = 1")
    n = system.n
    sigma0 = next((t for t in f.terms if float(complex(t.sigma).real) == 0.0), None)
    if sigma0 is None or sigma0.poly.degree != n or abs(sigma0.poly.lead - 1.0) > rel_tol:
        raise ValueError(
            "exponent-zero part is not monic of the system dimension;"
            " was this built by build_characteristic_single with tau = 1?"
        )
    a1 = 0j
    for t in f.terms:
        if abs(complex(t.sigma) - 1.0) == 0.0:
            a1 = t.poly.coeff(n - 1)
            break
    trace = complex(np.trace(system.Bs[0]))
    err = abs(a1 + trace)
    rel = err / max(1.0, abs(trace))
    last = max(int(round(complex(t.sigma).real)) for t in f.terms)
    return ExpansionReport(n, a1, trace, rel <= rel_tol, rel, last)
