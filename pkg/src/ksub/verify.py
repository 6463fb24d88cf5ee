"""Built-in verification suite.

Each check pits a closed-form quantity against an independent numerical
oracle (or a known constant) over fixed seeded samples, and reports the
worst residual, its tolerance and where it occurred. The CLI ``verify-paper``
subcommand runs the suite; the acceptance tests assert every check passes.

Residual tolerances can be overridden globally (``tol=``) to demonstrate
which checks are finite-difference-limited; runtime limits are fixed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import biharmonic as bih
from . import geometry as geo
from . import hopf
from . import surface as srf
from .expr import parse

__all__ = ["CheckReport", "CHECK_NAMES", "run_checks", "metric_families"]

SEED = 20240817


@dataclass
class CheckReport:
    name: str
    status: str            # pass | fail | skipped
    residual: float
    tol: float
    location: str = ""
    details: dict = field(default_factory=dict)

    @classmethod
    def from_residual(cls, name, residual, tol, location="", details=None):
        status = "pass" if residual <= tol else "fail"
        return cls(name, status, float(residual), float(tol), location,
                   details or {})


class _Worst:
    """Track the largest residual and where it happened."""

    def __init__(self):
        self.value = 0.0
        self.location = ""

    def update(self, value, location):
        if abs(value) > self.value:
            self.value = abs(value)
            self.location = location


def metric_families() -> list[geo.KillingData]:
    """The five fixed metric families used across the suite."""
    two = geo.Rect(-2.0, 2.0, -2.0, 2.0)
    flat = geo.KillingData(parse("1", ("x", "y")), parse("0", ("x", "y")),
                           parse("0", ("x", "y")), two, "flat-product")
    gaussian = geo.KillingData(
        parse("exp(-(x^2+y^2)/4)", ("x", "y")), parse("0", ("x", "y")),
        parse("x", ("x", "y")), geo.Rect(-1.5, 1.5, -1.5, 1.5),
        "gaussian-lambda")
    return [flat, geo.bcv(0.0, 0.5), geo.bcv(1.0, 1.0), geo.bcv(-1.0, 0.3),
            gaussian]


# ---------------------------------------------------------------------------
# Criterion 1: closed-form connection vs Koszul finite-difference oracle
# ---------------------------------------------------------------------------

def check_connection_oracle(tol=1e-6) -> CheckReport:
    rng = np.random.default_rng(SEED)
    families = metric_families()
    worst = _Worst()
    start = time.monotonic()
    for data in families:
        for _ in range(20):
            x, y = data.domain.random_point(rng)
            p = (x, y, float(rng.uniform(-1, 1)))
            diff = np.max(np.abs(geo.connection(data, p)
                                 - geo.connection_oracle(data, p)))
            worst.update(diff, f"{data.description} at {p}")
    elapsed = time.monotonic() - start
    report = CheckReport.from_residual(
        "connection-oracle", worst.value, tol, worst.location,
        {"points": 100, "families": len(families)})
    if elapsed >= 5.0:
        report.status = "fail"
        report.details["runtime_limit_exceeded"] = True
    return report


# ---------------------------------------------------------------------------
# Criterion 2: curvature formula vs direct definition, plus component identities
# ---------------------------------------------------------------------------

def check_curvature_formula(tol=1e-5) -> CheckReport:
    rng = np.random.default_rng(SEED + 1)
    families = metric_families()
    worst = _Worst()
    for data in families:
        for _ in range(40):
            x, y = data.domain.random_point(rng)
            p = (x, y, float(rng.uniform(-1, 1)))
            vecs = rng.standard_normal((4, 3))
            closed = geo.riemann_closed(data, p, *vecs)
            direct = geo.riemann_direct(data, p, *vecs)
            rel = abs(direct - closed) / max(1.0, abs(closed))
            worst.update(rel, f"{data.description} at {p}")

    basis = np.eye(3)
    for data in families:
        for _ in range(3):
            x, y = data.domain.random_point(rng)
            p = (x, y, 0.0)
            r, grad = geo.bundle_curvature(data, (x, y))
            g_curv = geo.gauss_curvature(data, (x, y))
            lam = data.lam(x, y)
            for j in range(2):
                got = geo.riemann_direct(data, p, basis[j], basis[2],
                                         basis[j], basis[2])
                worst.update(abs(got + r * r),
                             f"vertical-plane identity, {data.description}")
                got = geo.riemann_direct(data, p, basis[0], basis[1],
                                         basis[j], basis[2])
                expected = -grad[j] / lam
                worst.update(abs(got - expected),
                             f"mixed identity j={j}, {data.description}")
            got = geo.riemann_direct(data, p, basis[0], basis[1],
                                     basis[0], basis[1])
            worst.update(abs(got - (3.0 * r * r - g_curv)),
                         f"horizontal identity, {data.description}")
    return CheckReport.from_residual("curvature-formula", worst.value, tol,
                                     worst.location, {"tuples": 200})


# ---------------------------------------------------------------------------
# Criterion 3: Ricci closed form vs contraction of the FD curvature
# ---------------------------------------------------------------------------

def check_ricci(tol=1e-5, heis_tol=1e-8) -> CheckReport:
    rng = np.random.default_rng(SEED + 2)
    worst = _Worst()
    for data in metric_families():
        x, y = data.domain.random_point(rng)
        p = (x, y, 0.0)
        diff = np.max(np.abs(geo.ricci(data, (x, y))
                             - geo.ricci_contraction(data, p)))
        worst.update(diff, f"{data.description} at {p}")
    report = CheckReport.from_residual("ricci", worst.value, tol,
                                       worst.location)
    heis = geo.bcv(0.0, 0.5)
    expected = np.diag([-0.5, -0.5, 0.5])
    heis_diff = float(np.max(np.abs(geo.ricci(heis, (0.3, -0.4)) - expected)))
    report.details["heisenberg_residual"] = heis_diff
    if heis_diff > heis_tol:
        report.status = "fail"
        report.residual = max(report.residual, heis_diff)
    return report


# ---------------------------------------------------------------------------
# Criterion 4: BCV spaces have r = mu and G = c
# ---------------------------------------------------------------------------

def check_bcv_constants(r_tol=1e-10, g_tol=1e-8) -> CheckReport:
    worst = _Worst()
    status = "pass"
    for c, mu in ((1.0, 1.0), (-1.0, 0.3), (0.0, 0.5), (4.0, 1.0)):
        data = geo.bcv(c, mu)
        for (x, y) in data.domain.grid(20, 20):
            r, _ = geo.bundle_curvature(data, (x, y))
            g_val = geo.gauss_curvature(data, (x, y))
            if abs(r - mu) > r_tol or abs(g_val - c) > g_tol:
                status = "fail"
            worst.update(max(abs(r - mu), abs(g_val - c)),
                         f"BCV({c}, {mu}) at ({x:.3f}, {y:.3f})")
    report = CheckReport.from_residual("bcv-constants", worst.value,
                                       max(r_tol, g_tol), worst.location,
                                       {"grid": "20x20", "pairs": 4})
    report.status = status
    return report


# ---------------------------------------------------------------------------
# Criterion 5: the Hopf-cylinder criterion
# ---------------------------------------------------------------------------

def check_hopf_tube(residual_tol=1e-5, defect_min=0.1) -> CheckReport:
    start = time.monotonic()
    sphere = hopf.ConformalBase(geo.bcv(1.0, 0.0))
    good = hopf.hopf_residuals(hopf.bcv_circle(1.0, kappa=1.0), sphere)
    worst = _Worst()
    worst.update(np.max(np.abs(good.residuals)), "kappa=1 circle in BCV(1,0)")
    ok = good.verdict.passed and worst.value <= residual_tol

    details = {"kappa1_defect": good.verdict.defect}
    for kappa in (0.5, 2.0):
        v = hopf.classify_hopf(hopf.bcv_circle(1.0, kappa=kappa), sphere)
        details[f"kappa{kappa}_defect"] = v.defect
        if v.passed or v.defect < defect_min:
            ok = False

    heis = hopf.ConformalBase(geo.bcv(0.0, 0.5))
    v = hopf.classify_hopf(hopf.bcv_circle(0.0, kappa=1.0), heis)
    details["heisenberg_admissible"] = v.admissible
    if v.admissible or v.passed:
        ok = False

    elapsed = time.monotonic() - start
    report = CheckReport.from_residual("hopf-tube", worst.value, residual_tol,
                                       worst.location, details)
    if not ok or elapsed >= 2.0:
        report.status = "fail"
        if elapsed >= 2.0:
            report.details["runtime_limit_exceeded"] = True
    return report


# ---------------------------------------------------------------------------
# Criterion 6: the rotationally symmetric construction
# ---------------------------------------------------------------------------

def check_rotational_example(root_tol=1e-8, residual_tol=1e-5) -> CheckReport:
    worst = _Worst()
    case = hopf.rotational_case_search("cos(t)", 0.0, (0.0, 1.5))[0]
    worst.update(abs(case.t0 - math.pi / 4.0), "root for f=cos, r=0")
    worst.update(abs(case.kappa_g ** 2 - 1.0), "kappa^2 for f=cos, r=0")
    worst.update(abs(case.gauss - 1.0), "G for f=cos, r=0")
    ok = case.report.verdict.passed
    max_res = float(np.max(np.abs(case.report.residuals)))
    details = {"t0": case.t0, "residual_r0": max_res}
    if max_res > residual_tol:
        ok = False

    case = hopf.rotational_case_search("cos(t)", 0.25, (0.0, 1.5))[0]
    target = case.gauss - 4.0 * 0.25 ** 2
    worst.update(abs(case.kappa_g ** 2 - 0.75), "kappa^2 for f=cos, r=1/4")
    worst.update(abs(case.kappa_g ** 2 - target), "criterion for f=cos, r=1/4")
    details["t0_quarter"] = case.t0
    if not case.report.verdict.passed:
        ok = False

    report = CheckReport.from_residual("rotational-example", worst.value,
                                       root_tol, worst.location, details)
    if not ok:
        report.status = "fail"
    return report


# ---------------------------------------------------------------------------
# Criterion 7: surface identity suite on random graphs
# ---------------------------------------------------------------------------

def _random_graph(data: geo.KillingData, rng) -> tuple[srf.SurfacePatch, tuple]:
    for _ in range(60):
        coeffs = [float(c) for c in rng.uniform(-0.6, 0.6, size=6)]
        text = (f"{coeffs[0]!r}+{coeffs[1]!r}*x+{coeffs[2]!r}*y"
                f"+{coeffs[3]!r}*x*y+{coeffs[4]!r}*x^2+{coeffs[5]!r}*y^2")
        patch = srf.SurfacePatch.graph(data, text,
                                       geo.Rect(-0.45, 0.45, -0.45, 0.45))
        q = (float(rng.uniform(-0.2, 0.2)), float(rng.uniform(-0.2, 0.2)))
        d = srf.analyze_point(patch, q)
        if math.sin(d.phi) >= 0.25:
            return patch, q
    raise RuntimeError("could not draw a sufficiently tilted graph")


def check_surface_identities(tol=1e-4) -> CheckReport:
    rng = np.random.default_rng(SEED + 3)
    families = [metric_families()[0], geo.bcv(0.0, 0.5), geo.bcv(1.0, 1.0)]
    counts = (4, 3, 3)
    worst = _Worst()
    for data, count in zip(families, counts):
        for _ in range(count):
            patch, q = _random_graph(data, rng)
            where = f"{data.description}, graph at {q}"
            worst.update(srf.gauss_residual(patch, q), "gauss: " + where)
            worst.update(np.max(np.abs(srf.codazzi_residual(patch, q))),
                         "codazzi: " + where)
            c1, c2 = srf.compatibility_residuals(patch, q)
            worst.update(max(c1, c2), "compatibility: " + where)
            d = srf.analyze_point(patch, q)
            if math.sin(d.phi) >= 0.1:
                alt = srf.shape_norm_from_angle(patch, q)
                worst.update(d.norm_sq_shape - alt, "shape-norm: " + where)
    return CheckReport.from_residual("surface-identities", worst.value, tol,
                                     worst.location, {"graphs": 10})


# ---------------------------------------------------------------------------
# Criterion 8: harmonic implies biharmonic; orientation invariance
# ---------------------------------------------------------------------------

def _minimal_planes():
    """Vertical planes over base geodesics in three ambient families."""
    pvars = ("u", "v")
    patches = []
    for data in (metric_families()[0], geo.bcv(0.0, 0.5), geo.bcv(1.0, 1.0)):
        patches.append(srf.SurfacePatch(
            parse("u", pvars), parse("0", pvars), parse("v", pvars),
            geo.Rect(-1.0, 1.0, -1.0, 1.0), data,
            name=f"vertical plane in {data.description}"))
    return patches


def check_harmonic_sanity(tol=1e-6) -> CheckReport:
    worst = _Worst()
    ok = True
    for patch in _minimal_planes():
        for flipped in (False, True):
            p = patch.flipped() if flipped else patch
            bt = bih.bitension_residual(p, (0.1, 0.2))
            if abs(bt.mean_h) > 1e-8:
                ok = False
            worst.update(max(abs(bt.normal), bt.tangential_norm),
                         f"{patch.name} (flip={flipped})")

    # orientation flip must not change any verdict
    K = geo.bcv(1.0, 0.0)
    circ = hopf.bcv_circle(1.0, kappa=1.0)
    cyl = hopf.cylinder_patch(K, circ)
    q = (0.5 * circ.interval[1], 0.5)
    for patch, point in [(cyl, q)] + [(p, (0.1, 0.2)) for p in _minimal_planes()]:
        one = bih.bitension_residual(patch, point)
        other = bih.bitension_residual(patch.flipped(), point)
        if one.is_biharmonic() != other.is_biharmonic():
            ok = False
        branch_one = bih.classify_point(patch, point)
        branch_other = bih.classify_point(patch.flipped(), point)
        if branch_one.branch != branch_other.branch:
            ok = False
        lines_one = np.abs(bih.frame_system_residuals(patch, point))
        lines_other = np.abs(bih.frame_system_residuals(patch.flipped(), point))
        worst_flip = float(np.max(np.abs(lines_one - lines_other)))
        if worst_flip > 1e-10:
            ok = False

    report = CheckReport.from_residual("harmonic-sanity", worst.value, tol,
                                       worst.location)
    if not ok:
        report.status = "fail"
    return report


# ---------------------------------------------------------------------------
# Criterion 9: branch logic
# ---------------------------------------------------------------------------

def check_branch_logic(tan2_tol=1e-12) -> CheckReport:
    ok = True
    details = {}

    K = geo.bcv(1.0, 0.0)
    circ = hopf.bcv_circle(1.0, kappa=1.0)
    cyl = hopf.cylinder_patch(K, circ)
    report_a = bih.classify_point(cyl, (0.5 * circ.interval[1], 0.5))
    details["cylinder_branch"] = report_a.branch
    if report_a.branch != "a" or not report_a.satisfied:
        ok = False

    flagged = bih.classify_scalars(cos_phi=0.5, grad_norm=0.5,
                                   gauss=4.0 * 0.09, r=0.3,
                                   norm_sq=1.0, mean_h=1.0)
    details["degenerate_branch"] = flagged.branch
    if flagged.branch != "contradiction-propRconst":
        ok = False

    grad_norm, r, g_val = 0.4, 0.5, 0.3
    phi = 0.5 * math.atan2(2.0 * grad_norm, 4.0 * r * r - g_val)
    norm_sq = 2.0 * r * r + grad_norm * math.tan(phi)
    synth = bih.classify_scalars(cos_phi=math.cos(phi), grad_norm=grad_norm,
                                 gauss=g_val, r=r, norm_sq=norm_sq, mean_h=1.0)
    tan2 = abs(synth.diagnostics["tan2phi_residual"])
    details["b2_branch"] = synth.branch
    if synth.branch != "b2" or not synth.satisfied:
        ok = False

    mu = 0.7
    b1 = bih.classify_scalars(cos_phi=0.4, grad_norm=0.0, gauss=4.0 * mu * mu,
                              r=mu, norm_sq=2.0 * mu * mu, mean_h=1.0)
    details["b1_branch"] = b1.branch
    if b1.branch != "b1" or not b1.satisfied:
        ok = False

    report = CheckReport.from_residual("branch-logic", tan2, tan2_tol,
                                       "synthetic b2 data", details)
    if not ok:
        report.status = "fail"
    return report


# ---------------------------------------------------------------------------
# Criterion 10: serialization determinism
# ---------------------------------------------------------------------------

def check_serialization_determinism(reports) -> CheckReport:
    from .cli import dumps_json  # local import to avoid a cycle
    payload = [report_to_dict(r) for r in reports]
    first = dumps_json({"schema_version": 1, "checks": payload})
    second = dumps_json({"schema_version": 1, "checks": payload})
    same = first == second
    return CheckReport("cli-determinism", "pass" if same else "fail",
                       0.0 if same else 1.0, 0.5, "",
                       {"bytes": len(first)})


def report_to_dict(report: CheckReport) -> dict:
    return {
        "check": report.name,
        "status": report.status,
        "residual": report.residual,
        "tol": report.tol,
        "location": report.location,
        "details": report.details,
    }


CHECK_NAMES = [
    "connection-oracle",
    "curvature-formula",
    "ricci",
    "bcv-constants",
    "hopf-tube",
    "rotational-example",
    "surface-identities",
    "harmonic-sanity",
    "branch-logic",
    "cli-determinism",
]


def run_checks(only: str | None = None, tol: float | None = None) -> list[CheckReport]:
    """Run the verification suite, optionally filtered by substring.

    ``tol`` overrides every residual tolerance (runtime limits stay fixed);
    tightening it below the finite-difference floor makes the FD-limited
    checks fail with their honest residuals.
    """
    runners = {
        "connection-oracle": lambda: check_connection_oracle(tol or 1e-6),
        "curvature-formula": lambda: check_curvature_formula(tol or 1e-5),
        "ricci": lambda: check_ricci(tol or 1e-5, tol or 1e-8),
        "bcv-constants": lambda: check_bcv_constants(tol or 1e-10, tol or 1e-8),
        "hopf-tube": lambda: check_hopf_tube(tol or 1e-5),
        "rotational-example": lambda: check_rotational_example(tol or 1e-8,
                                                               tol or 1e-5),
        "surface-identities": lambda: check_surface_identities(tol or 1e-4),
        "harmonic-sanity": lambda: check_harmonic_sanity(tol or 1e-6),
        "branch-logic": lambda: check_branch_logic(tol or 1e-12),
    }
    reports = []
    for name in CHECK_NAMES[:-1]:
        if only and only not in name:
            continue
        reports.append(runners[name]())
    if not only or only in "cli-determinism":
        reports.append(check_serialization_determinism(reports))
    return reports
