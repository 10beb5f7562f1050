"""Command line front end: analyze, roots, scan.

Input is a single JSON document with a version tag and a mode selecting one
of four system families: ``single_delay``, ``multi_delay``, ``distributed``,
``raw_quasipolynomial``.  Complex numbers are two-element ``[re, im]``
arrays (a bare number is taken as real).  Exact rationals travel as
integers, ``"p/q"`` strings, or ``[p, q]`` pairs.  Kernels are sample
tables only; no expression syntax is accepted.

Reports are JSON with sorted keys, so equal inputs produce byte-identical
bytes run over run.  Exit codes: 0 success, 2 schema violation (with a
field path or line diagnostics), 3 numeric failure (the failing stage is
named on stderr).  Plots are optional SVG side outputs and never change
the exit code.

The environment variable ``QPROOTS_WORKERS`` caps the worker threads used
when counting disjoint regions; ``QPROOTS_BACKEND`` picks the evaluation
kernels (``numba`` or ``numpy``).
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .charbuild import (
    DelaySpec,
    DelaySystem,
    build_characteristic_multi,
    build_characteristic_single,
    check_delay_independence,
    check_trace_condition,
    verify_expansion_structure,
)
from .distributed import (
    DistributedSystem,
    QuadratureConfig,
    QuadratureConvergenceError,
    as_target,
    kernel_nonzero_check,
)
from .quasipoly import Polynomial, QuasiPolynomial, Term, estimate_growth_order
from .rootfinder import (
    AnalyticTarget,
    Region,
    Root,
    RootFindingError,
    count_roots,
    isolate_roots,
    refine_in_box,
    scan_growth,
)

SCHEMA_VERSION = 1
MODES = ("single_delay", "multi_delay", "distributed", "raw_quasipolynomial")

DEFAULT_GROWTH_RADII = (10.0, 20.0, 40.0, 80.0)
DEFAULT_SCAN_FACTORS = (1.0, 2.0, 4.0)
NEWTON_TOL = 1e-12
BOUNDARY_EPS = 1e-8
SIGMA_MERGE_TOL = 1e-12


class SchemaError(ValueError):
    """Input document violation, carrying the JSON path of the offense."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class NumericFailure(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


@contextmanager
def _stage(name: str):
    try:
        yield
    except (RootFindingError, QuadratureConvergenceError, FloatingPointError) as e:
        raise NumericFailure(name, e) from e


# ---------------------------------------------------------------------------
# document parsing

def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _get(d: dict, key: str, path: str, required=True):
    if key not in d:
        if required:
            raise SchemaError(path, f"missing required field {key!r}")
        return None
    return d[key]


def _expect_dict(x, path: str) -> dict:
    if not isinstance(x, dict):
        raise SchemaError(path, "expected an object")
    return x


def _expect_list(x, path: str) -> list:
    if not isinstance(x, list):
        raise SchemaError(path, "expected an array")
    return x


def _complex_from(x, path: str) -> complex:
    if _is_number(x):
        return complex(float(x), 0.0)
    if isinstance(x, list) and len(x) == 2 and all(_is_number(v) for v in x):
        return complex(float(x[0]), float(x[1]))
    raise SchemaError(path, "expected a number or a [re, im] pair")


def _real_from(x, path: str) -> float:
    if not _is_number(x):
        raise SchemaError(path, "expected a real number")
    return float(x)


def _rational_from(x, path: str, allow_float: bool) -> Union[int, Fraction, float]:
    if isinstance(x, bool):
        raise SchemaError(path, "expected a rational, not a boolean")
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        if allow_float:
            return x
        raise SchemaError(path, "expected an exact rational (int, \"p/q\", or [p, q])")
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError):
            raise SchemaError(path, f"cannot read {x!r} as p/q")
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, int) for v in x):
        if x[1] == 0:
            raise SchemaError(path, "zero denominator")
        return Fraction(x[0], x[1])
    raise SchemaError(path, "expected a rational (int, \"p/q\", or [p, q])")


def _matrix_from(x, path: str, n: Optional[int] = None) -> np.ndarray:
    rows = _expect_list(x, path)
    if not rows:
        raise SchemaError(path, "matrix must be nonempty")
    size = len(rows)
    if n is not None and size != n:
        raise SchemaError(path, f"expected a {n}x{n} matrix")
    if size > 8:
        raise SchemaError(path, "matrix dimension exceeds the supported bound 8")
    out = np.zeros((size, size), np.complex128)
    for i, row in enumerate(rows):
        r = _expect_list(row, f"{path}[{i}]")
        if len(r) != size:
            raise SchemaError(f"{path}[{i}]", "matrix must be square")
        for j, v in enumerate(r):
            out[i, j] = _complex_from(v, f"{path}[{i}][{j}]")
    return out


def _region_from(x, path: str) -> Region:
    d = _expect_dict(x, path)
    re = _expect_list(_get(d, "re", path), f"{path}.re")
    im = _expect_list(_get(d, "im", path), f"{path}.im")
    if len(re) != 2 or len(im) != 2:
        raise SchemaError(path, "re and im must be [min, max] pairs")
    try:
        return Region(
            _real_from(re[0], f"{path}.re[0]"), _real_from(re[1], f"{path}.re[1]"),
            _real_from(im[0], f"{path}.im[0]"), _real_from(im[1], f"{path}.im[1]"),
        )
    except ValueError as e:
        raise SchemaError(path, str(e))


@dataclass(frozen=True)
class AnalysisOptions:
    region: Optional[Region] = None
    factors: Optional[tuple[float, ...]] = None
    quadrature: QuadratureConfig = QuadratureConfig()
    growth_radii: tuple[float, ...] = DEFAULT_GROWTH_RADII
    samples_per_circle: int = 256


def _analysis_from(x, path: str) -> AnalysisOptions:
    if x is None:
        return AnalysisOptions()
    d = _expect_dict(x, path)
    region = None
    if d.get("region") is not None:
        region = _region_from(d["region"], f"{path}.region")
    factors = None
    if d.get("factors") is not None:
        fl = _expect_list(d["factors"], f"{path}.factors")
        factors = tuple(_real_from(v, f"{path}.factors[{i}]") for i, v in enumerate(fl))
    quad = QuadratureConfig()
    if d.get("quadrature") is not None:
        q = _expect_dict(d["quadrature"], f"{path}.quadrature")
        try:
            quad = QuadratureConfig(
                rel_tol=float(q.get("rel_tol", quad.rel_tol)),
                max_panels=int(q.get("max_panels", quad.max_panels)),
                nodes_per_panel=int(q.get("nodes_per_panel", quad.nodes_per_panel)),
            )
        except (TypeError, ValueError) as e:
            raise SchemaError(f"{path}.quadrature", str(e))
    radii = DEFAULT_GROWTH_RADII
    samples = 256
    if d.get("growth") is not None:
        g = _expect_dict(d["growth"], f"{path}.growth")
        if g.get("radii") is not None:
            gl = _expect_list(g["radii"], f"{path}.growth.radii")
            radii = tuple(_real_from(v, f"{path}.growth.radii[{i}]") for i, v in enumerate(gl))
        if g.get("samples_per_circle") is not None:
            samples = int(_real_from(g["samples_per_circle"], f"{path}.growth.samples_per_circle"))
    return AnalysisOptions(region, factors, quad, radii, samples)


@dataclass(frozen=True, eq=False)
class SystemDocument:
    """Parsed input document: one system plus analysis options."""

    mode: str
    system: Union[DelaySystem, DistributedSystem, QuasiPolynomial]
    analysis: AnalysisOptions
    kernel_table: Optional[tuple[tuple[float, ...], tuple[complex, ...]]] = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, SystemDocument):
            return NotImplemented
        if self.mode != other.mode or self.analysis != other.analysis:
            return False
        if self.kernel_table != other.kernel_table:
            return False
        a, b = self.system, other.system
        if isinstance(a, QuasiPolynomial):
            return a == b
        if isinstance(a, DistributedSystem):
            return isinstance(b, DistributedSystem) and a.a == b.a and a.tau == b.tau
        if isinstance(a, DelaySystem):
            return (
                isinstance(b, DelaySystem)
                and np.array_equal(a.A, b.A)
                and len(a.Bs) == len(b.Bs)
                and all(np.array_equal(x, y) for x, y in zip(a.Bs, b.Bs))
                and a.delays == b.delays
            )
        return False


def _wrap_value_error(path: str):
    @contextmanager
    def cm():
        try:
            yield
        except (ValueError, TypeError) as e:
            raise SchemaError(path, str(e))
    return cm()


def _parse_single(sysd: dict) -> DelaySystem:
    A = _matrix_from(_get(sysd, "A", "$.system"), "$.system.A")
    B = _matrix_from(_get(sysd, "B", "$.system"), "$.system.B", A.shape[0])
    tau = _complex_from(_get(sysd, "tau", "$.system"), "$.system.tau")
    if tau == 0:
        raise SchemaError("$.system.tau", "the delay must be nonzero")
    with _wrap_value_error("$.system"):
        return DelaySystem.single(A, B, tau)


def _parse_delays(d, path: str, k: int) -> DelaySpec:
    dd = _expect_dict(d, path)
    if "values" in dd and "basis" in dd:
        raise SchemaError(path, "give either plain values or basis coordinates, not both")
    if "values" in dd:
        vals = _expect_list(dd["values"], f"{path}.values")
        if len(vals) != k:
            raise SchemaError(f"{path}.values", f"expected {k} delays")
        with _wrap_value_error(f"{path}.values"):
            return DelaySpec.from_values(
                [_real_from(v, f"{path}.values[{i}]") for i, v in enumerate(vals)]
            )
    basis = _expect_list(_get(dd, "basis", path), f"{path}.basis")
    pairs = []
    for i, item in enumerate(basis):
        ent = _expect_dict(item, f"{path}.basis[{i}]")
        label = _get(ent, "label", f"{path}.basis[{i}]")
        if not isinstance(label, str) or not label:
            raise SchemaError(f"{path}.basis[{i}].label", "expected a nonempty string")
        value = _rational_from(
            _get(ent, "value", f"{path}.basis[{i}]"),
            f"{path}.basis[{i}].value",
            allow_float=True,
        )
        pairs.append((label, value))
    coords = _expect_list(_get(dd, "coords", path), f"{path}.coords")
    if len(coords) != k:
        raise SchemaError(f"{path}.coords", f"expected {k} delay rows")
    rows = []
    for i, row in enumerate(coords):
        r = _expect_list(row, f"{path}.coords[{i}]")
        rows.append(
            [
                _rational_from(v, f"{path}.coords[{i}][{j}]", allow_float=False)
                for j, v in enumerate(r)
            ]
        )
    with _wrap_value_error(path):
        return DelaySpec.exact(pairs, rows)


def _parse_multi(sysd: dict) -> DelaySystem:
    A = _matrix_from(_get(sysd, "A", "$.system"), "$.system.A")
    bl = _expect_list(_get(sysd, "B", "$.system"), "$.system.B")
    if not bl:
        raise SchemaError("$.system.B", "need at least one delay matrix")
    Bs = [
        _matrix_from(b, f"$.system.B[{i}]", A.shape[0]) for i, b in enumerate(bl)
    ]
    spec = _parse_delays(_get(sysd, "delays", "$.system"), "$.system.delays", len(Bs))
    with _wrap_value_error("$.system"):
        return DelaySystem.multi(A, Bs, spec)


def _parse_distributed(sysd: dict) -> tuple[DistributedSystem, tuple]:
    a = _complex_from(_get(sysd, "a", "$.system"), "$.system.a")
    tau = _real_from(_get(sysd, "tau", "$.system"), "$.system.tau")
    if tau <= 0:
        raise SchemaError("$.system.tau", "the horizon must be positive")
    kd = _expect_dict(_get(sysd, "kernel", "$.system"), "$.system.kernel")
    thetas = _expect_list(_get(kd, "thetas", "$.system.kernel"), "$.system.kernel.thetas")
    values = _expect_list(_get(kd, "values", "$.system.kernel"), "$.system.kernel.values")
    if len(thetas) != len(values) or len(thetas) < 2:
        raise SchemaError("$.system.kernel", "thetas and values must match, length >= 2")
    ts = [_real_from(t, f"$.system.kernel.thetas[{i}]") for i, t in enumerate(thetas)]
    vs = [_complex_from(v, f"$.system.kernel.values[{i}]") for i, v in enumerate(values)]
    if any(b <= a2 for a2, b in zip(ts, ts[1:])):
        raise SchemaError("$.system.kernel.thetas", "sample points must be strictly increasing")
    if ts[0] < 0 or ts[-1] > tau:
        raise SchemaError("$.system.kernel.thetas", "sample points must lie within [0, tau]")
    with _wrap_value_error("$.system"):
        system = DistributedSystem.from_table(a, tau, ts, vs)
    return system, (tuple(ts), tuple(vs))


def _parse_raw(sysd: dict) -> QuasiPolynomial:
    tl = _expect_list(_get(sysd, "terms", "$.system"), "$.system.terms")
    if not tl:
        raise SchemaError("$.system.terms", "need at least one term")
    terms = []
    for i, item in enumerate(tl):
        ent = _expect_dict(item, f"$.system.terms[{i}]")
        sigma = _rational_from(
            _get(ent, "sigma", f"$.system.terms[{i}]"),
            f"$.system.terms[{i}].sigma",
            allow_float=True,
        )
        cl = _expect_list(_get(ent, "coeffs", f"$.system.terms[{i}]"), f"$.system.terms[{i}].coeffs")
        coeffs = [
            _complex_from(c, f"$.system.terms[{i}].coeffs[{j}]") for j, c in enumerate(cl)
        ]
        terms.append(Term(sigma, Polynomial(tuple(coeffs))))
    qp = QuasiPolynomial.from_terms(terms, SIGMA_MERGE_TOL)
    if qp.is_zero:
        raise SchemaError("$.system.terms", "terms cancel to the zero function")
    return qp


def parse_document(data: Union[str, dict]) -> SystemDocument:
    """Parse and validate one input document (JSON text or a parsed dict)."""
    if isinstance(data, str):
        data = json.loads(data)
    doc = _expect_dict(data, "$")
    version = _get(doc, "schema_version", "$")
    if version != SCHEMA_VERSION:
        raise SchemaError("$.schema_version", f"unsupported version {version!r} (this build reads {SCHEMA_VERSION})")
    mode = _get(doc, "mode", "$")
    if mode not in MODES:
        raise SchemaError("$.mode", f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    sysd = _expect_dict(_get(doc, "system", "$"), "$.system")
    analysis = _analysis_from(doc.get("analysis"), "$.analysis")
    kernel_table = None
    if mode == "single_delay":
        system = _parse_single(sysd)
    elif mode == "multi_delay":
        system = _parse_multi(sysd)
    elif mode == "distributed":
        system, kernel_table = _parse_distributed(sysd)
    else:
        system = _parse_raw(sysd)
    return SystemDocument(mode, system, analysis, kernel_table)


def load_document(path: Union[str, Path]) -> SystemDocument:
    return parse_document(Path(path).read_text())


# ---------------------------------------------------------------------------
# serialization

def _cx(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _sigma_json(sigma):
    if isinstance(sigma, Fraction):
        return str(sigma)
    if isinstance(sigma, complex):
        return _cx(sigma)
    return sigma


def _rational_json(x):
    return str(x) if isinstance(x, Fraction) else x


def _matrix_json(M: np.ndarray) -> list:
    return [[_cx(M[i, j]) for j in range(M.shape[1])] for i in range(M.shape[0])]


def serialize_document(doc: SystemDocument) -> dict:
    """Canonical dict form; feeding it back to parse_document round-trips."""
    out: dict = {"schema_version": SCHEMA_VERSION, "mode": doc.mode}
    if doc.mode == "single_delay":
        s = doc.system
        out["system"] = {
            "A": _matrix_json(s.A),
            "B": _matrix_json(s.Bs[0]),
            "tau": _cx(s.tau),
        }
    elif doc.mode == "multi_delay":
        s = doc.system
        spec = s.delays
        if spec.is_exact:
            delays = {
                "basis": [
                    {"label": lbl, "value": _rational_json(v)}
                    for lbl, v in zip(spec.basis_labels, spec.basis_values)
                ],
                "coords": [[str(c) for c in row] for row in spec.coords],
            }
        else:
            delays = {"values": list(spec.float_delays)}
        out["system"] = {
            "A": _matrix_json(s.A),
            "B": [_matrix_json(B) for B in s.Bs],
            "delays": delays,
        }
    elif doc.mode == "distributed":
        s = doc.system
        ts, vs = doc.kernel_table
        out["system"] = {
            "a": _cx(s.a),
            "tau": s.tau,
            "kernel": {"thetas": list(ts), "values": [_cx(v) for v in vs]},
        }
    else:
        out["system"] = {
            "terms": [
                {"sigma": _sigma_json(t.sigma), "coeffs": [_cx(c) for c in t.poly.coeffs]}
                for t in doc.system.terms
            ]
        }
    a = doc.analysis
    analysis: dict = {
        "quadrature": {
            "rel_tol": a.quadrature.rel_tol,
            "max_panels": a.quadrature.max_panels,
            "nodes_per_panel": a.quadrature.nodes_per_panel,
        },
        "growth": {
            "radii": list(a.growth_radii),
            "samples_per_circle": a.samples_per_circle,
        },
    }
    if a.region is not None:
        analysis["region"] = {
            "re": [a.region.re_min, a.region.re_max],
            "im": [a.region.im_min, a.region.im_max],
        }
    if a.factors is not None:
        analysis["factors"] = list(a.factors)
    out["analysis"] = analysis
    return out


# ---------------------------------------------------------------------------
# targets and reports

def _characteristic(doc: SystemDocument):
    """(quasi-polynomial, variable name, tau or None) for the qp modes."""
    if doc.mode == "single_delay":
        return build_characteristic_single(doc.system), "mu", doc.system.tau
    if doc.mode == "multi_delay":
        return build_characteristic_multi(doc.system), "lambda", None
    if doc.mode == "raw_quasipolynomial":
        return doc.system, "lambda", None
    raise ValueError("distributed systems have no finite characteristic expansion")


def _target(doc: SystemDocument):
    if doc.mode == "distributed":
        return as_target(doc.system, doc.analysis.quadrature), "lambda", None
    qp, variable, tau = _characteristic(doc)
    return AnalyticTarget.from_quasipolynomial(qp), variable, tau


def _tolerances(doc: SystemDocument) -> dict:
    return {
        "sigma_merge_tol": SIGMA_MERGE_TOL,
        "boundary_eps": BOUNDARY_EPS,
        "newton_tol": NEWTON_TOL,
        "trace_threshold_scale": 1e-14,
        "quadrature_rel_tol": doc.analysis.quadrature.rel_tol,
    }


def _terms_json(qp: QuasiPolynomial) -> list:
    return [
        {
            "sigma": _sigma_json(t.sigma),
            "sigma_value": float(complex(t.sigma).real),
            "coeffs": [_cx(c) for c in t.poly.coeffs],
        }
        for t in qp.terms
    ]


def _growth_json(qp: QuasiPolynomial, opts: AnalysisOptions) -> dict:
    est = estimate_growth_order(qp, opts.growth_radii, opts.samples_per_circle)
    return {
        "radii": list(est.radii),
        "max_log_abs": list(est.max_log_abs),
        "fitted_order": est.fitted_order,
        "samples_per_circle": opts.samples_per_circle,
    }


def analyze_report(doc: SystemDocument) -> dict:
    out: dict = {
        "schema_version": SCHEMA_VERSION,
        "command": "analyze",
        "mode": doc.mode,
        "tolerances": _tolerances(doc),
    }
    if doc.mode == "distributed":
        with _stage("kernel inspection"):
            nonzero = kernel_nonzero_check(doc.system)
        out["kernel_nonzero"] = nonzero
        out["infinitely_many_roots"] = nonzero
        out["kernel_grid_points"] = 256
        if not nonzero:
            out["unique_root"] = _cx(doc.system.a)
        return out
    with _stage("characteristic construction"):
        qp, variable, tau = _characteristic(doc)
    char: dict = {"variable": variable, "terms": _terms_json(qp)}
    if tau is not None:
        char["tau"] = _cx(tau)
    out["characteristic"] = char
    admissible = qp.is_admissible()
    out["admissible"] = admissible
    out["infinitely_many_roots"] = admissible
    if not admissible:
        poly = qp.reduce_to_polynomial()
        out["reduced_polynomial"] = {
            "degree": poly.degree,
            "coeffs": [_cx(c) for c in poly.coeffs],
        }
    out["principal_term_present"] = qp.has_principal_term()
    with _stage("growth estimation"):
        out["growth"] = _growth_json(qp, doc.analysis)
    if doc.mode in ("single_delay", "multi_delay"):
        out["trace_conditions"] = []
        for i, B in enumerate(doc.system.Bs):
            v = check_trace_condition(B)
            out["trace_conditions"].append(
                {
                    "matrix": f"B{i + 1}",
                    "holds": v.holds,
                    "trace": _cx(v.trace),
                    "threshold": v.threshold,
                }
            )
    if doc.mode == "single_delay":
        tau_c = doc.system.tau
        effective = DelaySystem.single(
            tau_c * doc.system.A, tau_c * doc.system.Bs[0], 1.0
        )
        rep = verify_expansion_structure(effective, qp)
        out["expansion"] = {
            "monic_degree": rep.n,
            "a1_coefficient": _cx(rep.a1_coefficient),
            "trace": _cx(rep.trace),
            "matches_trace": rep.matches_trace,
            "rel_error": rep.trace_rel_error,
            "rel_tol": 1e-9,
            "last_nonzero_exponent": rep.last_nonzero_exponent,
        }
    if doc.mode == "multi_delay":
        verdict = check_delay_independence(doc.system.delays)
        out["independence"] = {
            "status": verdict.status,
            "witness": list(verdict.witness) if verdict.witness else None,
        }
        out["delay_values"] = [float(v) for v in doc.system.delays.values]
    return out


def _region_json(r: Region) -> dict:
    return {"re": [r.re_min, r.re_max], "im": [r.im_min, r.im_max]}


def roots_report(doc: SystemDocument, region: Region) -> tuple[dict, list[Root]]:
    with _stage("target construction"):
        target, variable, tau = _target(doc)
    with _stage("root counting"):
        total = count_roots(target, region, BOUNDARY_EPS)
    with _stage("root isolation"):
        boxes = isolate_roots(target, region) if total else []
    roots: list[Root] = []
    with _stage("root refinement"):
        for box, cnt in boxes:
            if cnt == 1:
                roots.append(refine_in_box(target, box, NEWTON_TOL, BOUNDARY_EPS))
            else:
                # Cluster box below the isolation floor: report its center.
                from .rootfinder import _residual
                roots.append(Root(box.center, _residual(target, box.center), cnt, box))
    roots.sort(key=lambda r: (r.location.real, r.location.imag))
    rows = []
    for r in roots:
        row = {
            "re": r.location.real,
            "im": r.location.imag,
            "residual": r.residual,
            "multiplicity": r.multiplicity,
            "box": _region_json(r.box),
        }
        if tau is not None:
            lam = r.location / tau
            row["lambda"] = _cx(lam)
        rows.append(row)
    out = {
        "schema_version": SCHEMA_VERSION,
        "command": "roots",
        "mode": doc.mode,
        "variable": variable,
        "region": _region_json(region),
        "count": total,
        "roots": rows,
        "tolerances": _tolerances(doc),
    }
    if tau is not None:
        out["tau"] = _cx(tau)
        out["note"] = "region and roots are in the rescaled variable; lambda = mu / tau"
    return out, roots


def scan_report(doc: SystemDocument, factors) -> tuple[dict, object]:
    with _stage("target construction"):
        target, variable, tau = _target(doc)
    base = doc.analysis.region
    if base is None:
        base = Region(-5.0, 5.0, -5.0, 5.0)
    with _stage("growth scan"):
        scan = scan_growth(target, base, factors, BOUNDARY_EPS)
    out = {
        "schema_version": SCHEMA_VERSION,
        "command": "scan",
        "mode": doc.mode,
        "variable": variable,
        "base_region": _region_json(base),
        "factors": list(scan.factors),
        "regions": [_region_json(r) for r in scan.regions],
        "counts": list(scan.counts),
        "verdict": scan.verdict,
        "summary": scan.summary,
        "tolerances": _tolerances(doc),
    }
    if tau is not None:
        out["tau"] = _cx(tau)
    return out, scan


# ---------------------------------------------------------------------------
# output helpers

def _emit(payload: dict, out_path: Optional[str]) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _write_csv(path: str, roots: list[Root]) -> None:
    lines = ["re,im,residual,multiplicity"]
    for r in roots:
        lines.append(
            f"{r.location.real!r},{r.location.imag!r},{r.residual!r},{r.multiplicity}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def _plot_roots(path: str, region: Region, roots: list[Root]) -> None:
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        from matplotlib.patches import Rectangle

        fig, ax = plt.subplots(figsize=(6, 6))
        ax.add_patch(
            Rectangle(
                (region.re_min, region.im_min), region.width, region.height,
                fill=False, edgecolor="tab:blue",
            )
        )
        if roots:
            ax.plot(
                [r.location.real for r in roots],
                [r.location.imag for r in roots],
                "x", color="tab:red",
            )
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        ax.set_aspect("equal")
        margin = 0.1 * max(region.width, region.height)
        ax.set_xlim(region.re_min - margin, region.re_max + margin)
        ax.set_ylim(region.im_min - margin, region.im_max + margin)
        fig.savefig(path)
        plt.close(fig)
    except Exception as e:  # plotting must never change the outcome
        print(f"plot skipped: {e}", file=sys.stderr)


def _plot_scan(path: str, scan) -> None:
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        from matplotlib.patches import Rectangle

        fig, ax = plt.subplots(figsize=(6, 6))
        big = scan.regions[-1]
        for reg, cnt in zip(scan.regions, scan.counts):
            ax.add_patch(
                Rectangle(
                    (reg.re_min, reg.im_min), reg.width, reg.height,
                    fill=False, edgecolor="tab:blue",
                )
            )
            label = "?" if cnt is None else str(cnt)
            ax.annotate(label, (reg.re_max, reg.im_max), fontsize=9)
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        ax.set_aspect("equal")
        margin = 0.1 * max(big.width, big.height)
        ax.set_xlim(big.re_min - margin, big.re_max + margin)
        ax.set_ylim(big.im_min - margin, big.im_max + margin)
        fig.savefig(path)
        plt.close(fig)
    except Exception as e:
        print(f"plot skipped: {e}", file=sys.stderr)


# ---------------------------------------------------------------------------
# commands

def cmd_analyze(args) -> int:
    doc = load_document(args.document)
    _emit(analyze_report(doc), args.out)
    return 0


def cmd_roots(args) -> int:
    doc = load_document(args.document)
    if args.re is not None and args.im is not None:
        try:
            region = Region(args.re[0], args.re[1], args.im[0], args.im[1])
        except ValueError as e:
            raise SchemaError("--re/--im", str(e))
    elif doc.analysis.region is not None:
        region = doc.analysis.region
    else:
        raise SchemaError("--re/--im", "no region given on the command line or in the document")
    payload, roots = roots_report(doc, region)
    _emit(payload, args.out)
    if args.csv:
        _write_csv(args.csv, roots)
    if args.plot:
        _plot_roots(args.plot, region, roots)
    return 0


def cmd_scan(args) -> int:
    doc = load_document(args.document)
    if args.factors:
        try:
            factors = tuple(float(v) for v in args.factors.split(","))
        except ValueError:
            raise SchemaError("--factors", "expected a comma-separated list of numbers")
    elif doc.analysis.factors is not None:
        factors = doc.analysis.factors
    else:
        factors = DEFAULT_SCAN_FACTORS
    if not factors or factors[0] != 1.0 or any(b <= a for a, b in zip(factors, factors[1:])):
        raise SchemaError("--factors", "factors must be strictly increasing and start at 1")
    payload, scan = scan_report(doc, factors)
    _emit(payload, args.out)
    if args.plot:
        _plot_scan(args.plot, scan)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qproots",
        description="Delay-system characteristic functions and root counting.",
        epilog=(
            "Environment: QPROOTS_WORKERS caps counting threads,"
            " QPROOTS_BACKEND selects numba or numpy kernels."
        ),
    )
    sub = p.add_subparsers(dest="cmd", required=True)

    pa = sub.add_parser("analyze", help="structural checks and growth estimate")
    pa.add_argument("document", help="input JSON document")
    pa.add_argument("--out", help="write the report here instead of stdout")
    pa.set_defaults(func=cmd_analyze)

    pr = sub.add_parser("roots", help="count, isolate, and refine roots in a rectangle")
    pr.add_argument("document")
    pr.add_argument("--re", nargs=2, type=float, metavar=("MIN", "MAX"))
    pr.add_argument("--im", nargs=2, type=float, metavar=("MIN", "MAX"))
    pr.add_argument("--csv", help="also write a re,im,residual,multiplicity table")
    pr.add_argument("--plot", help="also write an SVG of roots and the region")
    pr.add_argument("--out", help="write the report here instead of stdout")
    pr.set_defaults(func=cmd_roots)

    ps = sub.add_parser("scan", help="root counts over nested scalings of a base region")
    ps.add_argument("document")
    ps.add_argument("--factors", help="comma-separated scale factors, e.g. 1,2,4")
    ps.add_argument("--plot", help="also write an SVG of the nested regions")
    ps.add_argument("--out", help="write the report here instead of stdout")
    ps.set_defaults(func=cmd_scan)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except json.JSONDecodeError as e:
        print(f"input error at line {e.lineno} column {e.colno}: {e.msg}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"input error: {e}", file=sys.stderr)
        return 2
    except SchemaError as e:
        print(f"input error at {e.path}: {e.message}", file=sys.stderr)
        return 2
    except NumericFailure as e:
        print(f"numeric failure during {e.stage}: {e.cause}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
