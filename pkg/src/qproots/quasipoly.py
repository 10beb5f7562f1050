"""Quasi-polynomials: finite sums of ``p_i(lam) * exp(-sigma_i * lam)``.

A :class:`Polynomial` is a dense ascending coefficient tuple with a nonzero
trailing coefficient (the zero polynomial is the empty tuple).  A
:class:`QuasiPolynomial` is a normalized tuple of :class:`Term` entries:
exponents pairwise distinct, sorted ascending, no zero polynomial parts.

Exponents may be exact (``int`` or ``Fraction``) or floating.  Exact
exponents merge only on exact equality; floating ones merge under a relative
tolerance.  Coefficients are always complex floats.

Functions here are scale-robust: evaluation on large contours goes through a
scaled form ``f = s * exp(m)`` with real ``m``, so magnitudes far beyond the
double range still yield usable phases and log-magnitudes.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from . import _kernels
from ._kernels import LOG_TINY

Sigma = Union[int, float, Fraction, complex]

__all__ = [
    "Polynomial",
    "Term",
    "QuasiPolynomial",
    "GrowthEstimate",
    "ZeroQuasiPolynomialError",
    "normalize",
    "estimate_growth_order",
]


class ZeroQuasiPolynomialError(ValueError):
    """The zero quasi-polynomial was passed where a nonzero one is required."""


@dataclass(frozen=True)
class Polynomial:
    """Dense complex polynomial, ascending coefficients, trailing one nonzero."""

    coeffs: tuple[complex, ...] = ()

    def __post_init__(self):
        cs = [complex(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def lead(self) -> complex:
        if self.is_zero:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def coeff(self, k: int) -> complex:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0j

    def __call__(self, lam: complex) -> complex:
        v = 0j
        for c in reversed(self.coeffs):
            v = v * lam + c
        return v

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial(tuple(out))

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if self.is_zero or other.is_zero:
            return Polynomial()
        out = [0j] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(tuple(out))

    def scale(self, c: complex) -> "Polynomial":
        return Polynomial(tuple(c * a for a in self.coeffs))

    def derivative(self) -> "Polynomial":
        return Polynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))


def _is_exact(sigma: Sigma) -> bool:
    return isinstance(sigma, (int, Fraction)) and not isinstance(sigma, bool)


def _sigma_complex(sigma: Sigma) -> complex:
    return complex(sigma)


def _sigma_key(sigma: Sigma) -> tuple[float, float]:
    z = complex(sigma)
    return (z.real, z.imag)


@dataclass(frozen=True)
class Term:
    """One summand ``poly(lam) * exp(-sigma * lam)``."""

    sigma: Sigma
    poly: Polynomial


TermLike = Union[Term, tuple]


def _coerce_term(t: TermLike) -> Term:
    if isinstance(t, Term):
        return t
    sigma, poly = t
    if not isinstance(poly, Polynomial):
        poly = Polynomial(tuple(poly))
    return Term(sigma, poly)


def normalize(terms: Iterable[TermLike], sigma_merge_tol: float = 1e-12) -> tuple[Term, ...]:
    """Merge near-equal exponents, drop zero parts, sort ascending.

    Exact exponents (``int``/``Fraction``) merge only on exact equality;
    any pair involving a float merges when the gap is at most
    ``sigma_merge_tol * (1 + |sigma|)``.  A merge that cancels all
    coefficients removes the term entirely.
    """
    if sigma_merge_tol < 0:
        raise ValueError("sigma_merge_tol must be nonnegative")
    pending = [_coerce_term(t) for t in terms]
    pending = [t for t in pending if not t.poly.is_zero]
    pending.sort(key=lambda t: _sigma_key(t.sigma))
    merged: list[Term] = []
    for t in pending:
        if merged:
            rep = merged[-1]
            if _is_exact(rep.sigma) and _is_exact(t.sigma):
                same = rep.sigma == t.sigma
            else:
                gap = abs(_sigma_complex(t.sigma) - _sigma_complex(rep.sigma))
                same = gap <= sigma_merge_tol * (1.0 + abs(_sigma_complex(rep.sigma)))
            if same:
                merged[-1] = Term(rep.sigma, rep.poly + t.poly)
                continue
        merged.append(t)
    return tuple(t for t in merged if not t.poly.is_zero)


@dataclass(frozen=True)
class QuasiPolynomial:
    """Normalized finite sum of ``poly_i(lam) * exp(-sigma_i * lam)``."""

    terms: tuple[Term, ...] = ()

    @classmethod
    def from_terms(
        cls, terms: Iterable[TermLike], sigma_merge_tol: float = 1e-12
    ) -> "QuasiPolynomial":
        return cls(normalize(terms, sigma_merge_tol))

    @classmethod
    def zero(cls) -> "QuasiPolynomial":
        return cls(())

    @classmethod
    def from_polynomial(cls, poly: Polynomial) -> "QuasiPolynomial":
        return cls.from_terms([(0, poly)])

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def sigmas(self) -> tuple[Sigma, ...]:
        return tuple(t.sigma for t in self.terms)

    @property
    def max_degree(self) -> int:
        return max((t.poly.degree for t in self.terms), default=-1)

    def __add__(self, other: "QuasiPolynomial") -> "QuasiPolynomial":
        return QuasiPolynomial.from_terms(self.terms + other.terms)

    def __mul__(self, other: "QuasiPolynomial") -> "QuasiPolynomial":
        prods = [
            Term(a.sigma + b.sigma, a.poly * b.poly)
            for a in self.terms
            for b in other.terms
        ]
        return QuasiPolynomial.from_terms(prods)

    def scale(self, c: complex) -> "QuasiPolynomial":
        return QuasiPolynomial.from_terms(
            [Term(t.sigma, t.poly.scale(c)) for t in self.terms]
        )

    def derivative(self) -> "QuasiPolynomial":
        """Termwise ``(p' - sigma * p) * exp(-sigma * lam)``."""
        out = [
            Term(t.sigma, t.poly.derivative() + t.poly.scale(-_sigma_complex(t.sigma)))
            for t in self.terms
        ]
        return QuasiPolynomial.from_terms(out)

    def __call__(self, lam: complex) -> complex:
        return complex(self.eval_many(np.array([lam], np.complex128))[0])

    def eval_many(self, lams: np.ndarray) -> np.ndarray:
        coeffs, degs, sigmas = _packed(self)
        return _kernels.eval_many(
            coeffs, degs, sigmas, np.ascontiguousarray(lams, np.complex128)
        )

    def eval_scaled_many(self, lams: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate as ``(s, m)`` with ``f = s * exp(m)`` and ``m`` real."""
        coeffs, degs, sigmas = _packed(self)
        return _kernels.eval_scaled_many(
            coeffs, degs, sigmas, np.ascontiguousarray(lams, np.complex128)
        )

    def log_abs_many(self, lams: np.ndarray) -> np.ndarray:
        """``log|f|`` clamped below at ``log(1e-300)``, safe at any scale."""
        s, m = self.eval_scaled_many(lams)
        a = np.abs(s)
        out = np.where(a > 0.0, m + np.log(np.where(a > 0.0, a, 1.0)), LOG_TINY)
        return np.maximum(out, LOG_TINY)

    def _require_real_sigmas(self, what: str) -> None:
        if self.is_zero:
            raise ZeroQuasiPolynomialError(
                f"{what} is undefined for the zero quasi-polynomial"
            )
        for t in self.terms:
            if _sigma_complex(t.sigma).imag != 0.0:
                raise ValueError(f"{what} requires real exponents")

    def is_admissible(self) -> bool:
        """True iff at least two distinct exponents carry nonzero parts."""
        self._require_real_sigmas("admissibility")
        return len(self.terms) >= 2

    def reduce_to_polynomial(self) -> Polynomial:
        """Strip the exponential factor of a single-term quasi-polynomial.

        The roots of the result are exactly the roots of the original, since
        the exponential never vanishes.  Raises ``ValueError`` for the zero
        quasi-polynomial and for admissible ones (two or more terms).
        """
        if self.is_zero:
            raise ZeroQuasiPolynomialError(
                "zero quasi-polynomial has no polynomial reduction"
            )
        if len(self.terms) > 1:
            raise ValueError(
                "admissible quasi-polynomial has no polynomial reduction"
            )
        return self.terms[0].poly

    def has_principal_term(self) -> bool:
        """True iff one term attains the top degree and top ``-sigma`` together."""
        self._require_real_sigmas("principal term detection")
        top = min(self.terms, key=lambda t: _sigma_key(t.sigma))
        return top.poly.degree == self.max_degree

    def factor_exponential(self) -> tuple[Sigma, "QuasiPolynomial"]:
        """Split off ``exp(-sigma0 * lam)`` with ``sigma0`` the least exponent.

        Returns ``(sigma0, g)`` with ``f(lam) = exp(-sigma0 * lam) * g(lam)``;
        ``g`` has least exponent zero and the same roots as ``f``.
        """
        self._require_real_sigmas("exponent shifting")
        sig0 = min((t.sigma for t in self.terms), key=_sigma_key)
        shifted = [Term(t.sigma - sig0, t.poly) for t in self.terms]
        return sig0, QuasiPolynomial.from_terms(shifted)


@functools.lru_cache(maxsize=512)
def _packed(qp: QuasiPolynomial):
    """Flat arrays (coeffs, degs, sigmas) for the kernels; cached per value."""
    T = len(qp.terms)
    width = max(qp.max_degree, 0) + 1
    coeffs = np.zeros((T, width), np.complex128)
    degs = np.zeros(T, np.int64)
    sigmas = np.zeros(T, np.complex128)
    for i, t in enumerate(qp.terms):
        cs = t.poly.coeffs
        coeffs[i, : len(cs)] = cs
        degs[i] = t.poly.degree
        sigmas[i] = _sigma_complex(t.sigma)
    coeffs.setflags(write=False)
    degs.setflags(write=False)
    sigmas.setflags(write=False)
    return coeffs, degs, sigmas


@dataclass(frozen=True)
class GrowthEstimate:
    """Max log-magnitude per circle radius and the fitted growth order."""

    radii: tuple[float, ...]
    max_log_abs: tuple[float, ...]
    fitted_order: float


def estimate_growth_order(
    p: QuasiPolynomial,
    radii: Sequence[float],
    samples_per_circle: int = 256,
) -> GrowthEstimate:
    """Estimate the exponential growth order from circle maxima.

    Parameters
    ----------
    p : QuasiPolynomial
        Nonzero quasi-polynomial to measure.
    radii : sequence of float
        Strictly increasing circle radii, at least two, each >= 10.
    samples_per_circle : int
        Uniform angular samples per circle, at least 64.

    Returns
    -------
    GrowthEstimate
        ``max_log_abs[i]`` is ``max log|p|`` over the sampled circle of
        radius ``radii[i]``; ``fitted_order`` is the least-squares slope of
        ``log M(R)`` against ``log R`` over radii with ``M(R) > 1``, clamped
        at zero.  With fewer than two qualifying radii the order is 0.

    Notes
    -----
    This is a sampled diagnostic, not a proof: it reports the apparent order
    over the radii supplied.  Functions of genuine order one show slopes near
    one; polynomials drift toward zero slowly (their ``log M`` still grows
    like ``log log R``), so wide radius spans separate the two cases best.
    """
    if p.is_zero:
        raise ValueError("growth order is undefined for the zero quasi-polynomial")
    rs = [float(r) for r in radii]
    if len(rs) < 2:
        raise ValueError("need at least two radii")
    if any(b <= a for a, b in zip(rs, rs[1:])):
        raise ValueError("radii must be strictly increasing")
    if rs[0] < 10.0:
        raise ValueError("radii below 10 are too small to separate growth regimes")
    if samples_per_circle < 64:
        raise ValueError("need at least 64 samples per circle")
    theta = np.linspace(0.0, 2.0 * np.pi, samples_per_circle, endpoint=False)
    ring = np.exp(1j * theta)
    maxima = []
    for r in rs:
        maxima.append(float(p.log_abs_many(r * ring).max()))
    xs = [np.log(r) for r, m in zip(rs, maxima) if m > 1.0]
    ys = [np.log(m) for m in maxima if m > 1.0]
    if len(xs) < 2:
        order = 0.0
    else:
        slope = np.polyfit(np.asarray(xs), np.asarray(ys), 1)[0]
        order = max(float(slope), 0.0)
    return GrowthEstimate(tuple(rs), tuple(maxima), order)
