"""Characteristic construction, trace condition, delay independence."""

from fractions import Fraction

import numpy as np
import pytest

from qproots import (
    DelaySpec,
    DelaySystem,
    QuasiPolynomial,
    build_characteristic_multi,
    build_characteristic_single,
    check_delay_independence,
    check_trace_condition,
    verify_expansion_structure,
)


def random_matrix(rng, n):
    return rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))


def random_rational_delays(rng, k):
    pool = sorted({Fraction(int(p), int(q)) for p in range(1, 13) for q in range(1, 7)})
    picks = rng.choice(len(pool), size=k, replace=False)
    return sorted(pool[i] for i in picks)


def numeric_det(A, Bs, taus, lam):
    n = A.shape[0]
    M = lam * np.eye(n, dtype=complex) - A
    for B, tau in zip(Bs, taus):
        M = M - B * np.exp(-complex(tau) * lam)
    return np.linalg.det(M)


# ---------------------------------------------------------------------------
# determinant oracle

def test_multi_delay_determinant_matches_numeric_oracle():
    rng = np.random.default_rng(101)
    for _ in range(30):
        n = int(rng.integers(1, 6))
        k = int(rng.integers(1, 4))
        A = random_matrix(rng, n)
        Bs = [random_matrix(rng, n) for _ in range(k)]
        fracs = random_rational_delays(rng, k)
        spec = DelaySpec.exact([("u", 1)], [[f] for f in fracs])
        system = DelaySystem.multi(A, Bs, spec)
        chi = build_characteristic_multi(system)
        for _ in range(20):
            lam = complex(rng.uniform(-7, 7), rng.uniform(-7, 7))
            want = numeric_det(A, Bs, fracs, lam)
            got = chi(lam)
            assert abs(got - want) <= 1e-9 * (1.0 + abs(want))


def test_single_delay_rescaling_identity():
    # chi is built in the rescaled variable mu = tau * lam and satisfies
    # chi(tau * lam) = tau^n * det(lam I - A - B e^{-tau lam})
    rng = np.random.default_rng(103)
    for tau in (1.0, 0.5, 2.0 + 0.0j, 1j, 0.3 - 0.7j):
        n = int(rng.integers(1, 5))
        A = random_matrix(rng, n)
        B = random_matrix(rng, n)
        system = DelaySystem.single(A, B, tau)
        chi = build_characteristic_single(system)
        for _ in range(10):
            lam = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            want = (complex(tau) ** n) * numeric_det(A, [B], [tau], lam)
            got = chi(complex(tau) * lam)
            assert abs(got - want) <= 1e-9 * (1.0 + abs(want))


def test_single_delay_exponents_are_small_integers():
    rng = np.random.default_rng(105)
    system = DelaySystem.single(random_matrix(rng, 3), random_matrix(rng, 3), 0.7)
    chi = build_characteristic_single(system)
    assert [t.sigma for t in chi.terms] == sorted(t.sigma for t in chi.terms)
    assert all(isinstance(t.sigma, int) for t in chi.terms)
    assert min(t.sigma for t in chi.terms) == 0
    assert max(t.sigma for t in chi.terms) <= 3


def test_multi_with_one_delay_agrees_with_single():
    rng = np.random.default_rng(107)
    n = 3
    A, B = random_matrix(rng, n), random_matrix(rng, n)
    tau = 0.75
    single = build_characteristic_single(DelaySystem.single(A, B, tau))
    multi = build_characteristic_multi(
        DelaySystem.multi(A, [B], DelaySpec.from_values([tau]))
    )
    for _ in range(10):
        lam = complex(rng.uniform(-4, 4), rng.uniform(-4, 4))
        want = multi(lam) * complex(tau) ** n
        got = single(tau * lam)
        assert abs(got - want) <= 1e-9 * (1.0 + abs(want))


def test_similarity_invariance():
    rng = np.random.default_rng(109)
    for _ in range(5):
        n = int(rng.integers(2, 5))
        A, B = random_matrix(rng, n), random_matrix(rng, n)
        while True:
            P = random_matrix(rng, n)
            if abs(np.linalg.det(P)) > 0.1:
                break
        Pinv = np.linalg.inv(P)
        base = build_characteristic_multi(
            DelaySystem.multi(A, [B], DelaySpec.from_values([1.0]))
        )
        conj = build_characteristic_multi(
            DelaySystem.multi(
                Pinv @ A @ P, [Pinv @ B @ P], DelaySpec.from_values([1.0])
            )
        )
        for _ in range(10):
            lam = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            want, got = base(lam), conj(lam)
            assert abs(got - want) <= 1e-8 * (1.0 + abs(want))


# ---------------------------------------------------------------------------
# trace structure

def test_trace_law_on_random_matrices():
    rng = np.random.default_rng(111)
    for _ in range(30):
        n = int(rng.integers(1, 6))
        A, B = random_matrix(rng, n), random_matrix(rng, n)
        chi = build_characteristic_single(DelaySystem.single(A, B, 1.0))
        sigma1 = [t for t in chi.terms if t.sigma == 1]
        assert sigma1
        got = sigma1[0].poly.coeff(n - 1)
        want = -np.trace(B)
        assert abs(got - want) <= 1e-9 * (1.0 + abs(want))


def test_trace_law_worked_two_by_two():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.eye(2)
    chi = build_characteristic_single(DelaySystem.single(A, B, 1.0))
    sigma1 = [t for t in chi.terms if t.sigma == 1][0]
    assert abs(sigma1.poly.coeff(1) - (-2.0)) <= 1e-12


def test_traceless_matrix_drops_the_top_sigma_one_coefficient():
    rng = np.random.default_rng(113)
    for _ in range(10):
        n = int(rng.integers(2, 5))
        A = random_matrix(rng, n)
        B = random_matrix(rng, n)
        B = B - (np.trace(B) / n) * np.eye(n)  # force trace zero
        chi = build_characteristic_single(DelaySystem.single(A, B, 1.0))
        sigma1 = [t for t in chi.terms if t.sigma == 1]
        if sigma1:
            assert abs(sigma1[0].poly.coeff(n - 1)) <= 1e-9


def test_nonzero_trace_implies_admissible():
    rng = np.random.default_rng(115)
    for _ in range(30):
        n = int(rng.integers(1, 6))
        A, B = random_matrix(rng, n), random_matrix(rng, n)
        if abs(np.trace(B)) < 1e-3:
            B = B + np.eye(n)
        chi = build_characteristic_single(DelaySystem.single(A, B, 1.0))
        assert chi.is_admissible()


def test_trace_condition_exact_and_float_paths():
    assert check_trace_condition(np.array([[1, 0], [0, -1]], dtype=object)).holds is False
    assert check_trace_condition(np.array([[Fraction(1, 3), 0], [0, Fraction(2, 3)]], dtype=object)).holds is True
    assert check_trace_condition(np.eye(3)).holds is True
    # trace tiny relative to the matrix scale: below the ||B||-based threshold
    v = check_trace_condition(np.array([[1.0, 5.0], [3.0, -1.0 + 1e-16]]))
    assert v.holds is False
    assert v.threshold > 0
    # an all-tiny matrix is nonzero relative to its own scale
    assert check_trace_condition(np.array([[1e-20, 0.0], [0.0, 0.0]])).holds is True
    assert bool(check_trace_condition(np.array([[2.0]])))


# ---------------------------------------------------------------------------
# exact exponent arithmetic

def test_commensurate_delays_merge_exponents_exactly():
    spec = DelaySpec.exact([("u", 1)], [[1], [2]])
    system = DelaySystem.multi(
        np.zeros((1, 1)), [np.eye(1), np.eye(1)], spec
    )
    chi = build_characteristic_multi(system)
    sigmas = [t.sigma for t in chi.terms]
    assert sigmas == [Fraction(0), Fraction(1), Fraction(2)]
    assert all(isinstance(s, Fraction) for s in sigmas)


def test_two_delay_products_collide_without_duplicates():
    # (e^{-lam})(e^{-2 lam}) terms from a 2x2 determinant collide with
    # e^{-3 lam}-type products; exact arithmetic must merge them.
    spec = DelaySpec.exact([("u", 1)], [[1], [2]])
    rng = np.random.default_rng(117)
    A = random_matrix(rng, 2)
    Bs = [random_matrix(rng, 2), random_matrix(rng, 2)]
    system = DelaySystem.multi(A, Bs, spec)
    chi = build_characteristic_multi(system)
    sigmas = [t.sigma for t in chi.terms]
    assert len(sigmas) == len(set(sigmas))
    for _ in range(10):
        lam = complex(rng.uniform(-4, 4), rng.uniform(-4, 4))
        want = numeric_det(A, Bs, [1, 2], lam)
        got = chi(lam)
        assert abs(got - want) <= 1e-9 * (1.0 + abs(want))


# ---------------------------------------------------------------------------
# independence checker

def test_dependent_delays_with_witness():
    spec = DelaySpec.exact([("u", 1)], [[1], [2]])
    verdict = check_delay_independence(spec)
    assert verdict.status == "dependent"
    assert verdict.witness == (2, -1)


def test_independent_delays_over_two_element_basis():
    spec = DelaySpec.exact(
        [("one", 1), ("sqrt2", 1.4142135623730951)],
        [[1, 0], [0, 1]],
    )
    verdict = check_delay_independence(spec)
    assert verdict.status == "independent"
    assert verdict.witness is None


def test_float_delays_give_unknown():
    spec = DelaySpec.from_values([1.0, 2.0])
    assert check_delay_independence(spec).status == "unknown"


def test_fractional_dependence_witness_is_primitive():
    spec = DelaySpec.exact([("u", 1)], [[Fraction(1, 3)], [Fraction(2, 3)]])
    verdict = check_delay_independence(spec)
    assert verdict.status == "dependent"
    assert verdict.witness == (2, -1)


def test_three_delays_mixed_dependence():
    spec = DelaySpec.exact(
        [("one", 1), ("sqrt2", 1.4142135623730951)],
        [[1, 0], [0, 1], [1, 1]],
    )
    verdict = check_delay_independence(spec)
    assert verdict.status == "dependent"
    combo = [1, 1, -1]
    assert verdict.witness is not None
    # the witness annihilates the coordinate rows
    rows = [[1, 0], [0, 1], [1, 1]]
    for col in range(2):
        assert sum(w * r[col] for w, r in zip(verdict.witness, rows)) == 0
    del combo


def test_single_delay_is_independent():
    spec = DelaySpec.exact([("u", 1)], [[1]])
    assert check_delay_independence(spec).status == "independent"


# ---------------------------------------------------------------------------
# expansion structure report

def test_expansion_report_worked_example():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.eye(2)
    system = DelaySystem.single(A, B, 1.0)
    chi = build_characteristic_single(system)
    rep = verify_expansion_structure(system, chi)
    assert rep.n == 2
    assert rep.matches_trace
    assert abs(rep.a1_coefficient - (-2.0)) <= 1e-12
    assert abs(rep.trace - 2.0) <= 1e-12
    assert rep.last_nonzero_exponent == 2


def test_expansion_report_requires_unit_delay():
    system = DelaySystem.single(np.zeros((1, 1)), np.eye(1), 2.0)
    chi = build_characteristic_single(system)
    with pytest.raises(ValueError):
        verify_expansion_structure(system, chi)


def test_expansion_report_requires_monic_structure():
    system = DelaySystem.single(np.zeros((1, 1)), np.eye(1), 1.0)
    bogus = QuasiPolynomial.from_polynomial(
        __import__("qproots").Polynomial((1.0, 2.0))
    )
    with pytest.raises(ValueError):
        verify_expansion_structure(system, bogus)


# ---------------------------------------------------------------------------
# guards and validation

def test_dimension_guard_on_symbolic_expansion():
    n = 9
    A = np.zeros((n, n))
    with pytest.raises(ValueError):
        build_characteristic_single(DelaySystem.single(A, A, 1.0))
    with pytest.raises(ValueError):
        build_characteristic_multi(
            DelaySystem.multi(A, [A], DelaySpec.from_values([1.0]))
        )


def test_delay_spec_validation():
    with pytest.raises(ValueError):
        DelaySpec.from_values([2.0, 1.0])  # not increasing
    with pytest.raises(ValueError):
        DelaySpec.from_values([-1.0])  # not positive
    with pytest.raises(ValueError):
        DelaySpec.exact([("u", 1)], [[2], [1]])  # not increasing
    with pytest.raises(TypeError):
        DelaySpec.exact([("u", 1)], [[0.5]])  # float coordinate


def test_mismatched_matrix_shapes_rejected():
    with pytest.raises(ValueError):
        DelaySystem.multi(
            np.zeros((2, 2)), [np.zeros((3, 3))], DelaySpec.from_values([1.0])
        )
    with pytest.raises(ValueError):
        DelaySystem.single(np.zeros((2, 2)), np.zeros((2, 2)), 0.0)
