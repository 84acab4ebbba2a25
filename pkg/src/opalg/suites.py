"""Check orchestration: each suite turns an instance into a list of report checks.

Every check draws randomness from its own stream keyed by ``(seed, check id)``,
so a suite's residuals do not depend on which other suites ran.
"""

from __future__ import annotations

import time
from functools import cached_property

import numpy as np

from . import geomorbit as gm
from . import numkernel as nk
from . import rkbundle as rk
from .cpstate import is_completely_positive, positivity_by_amplification
from .dilation import compatible_pair, dilation_residual, representation_residuals, stinespring
from .errors import IncompatibleData, OpalgError, UnknownSuite
from .gaugedecomp import (
    CircleAction,
    fourier_decompose,
    gauge_expectation,
    gauge_invariance_equiv,
    grading_residuals,
    orthogonality_mechanism,
    spectral_expectation,
    spectral_residual,
    weight_zero_subalgebra,
)
from .instance import Instance
from .report import Check, Report
from .sampling import rng_for
from .staralg import ap_space_report, commutant, compression, expectation_ep, expectation_trace, tomiyama_check

SUITES = ("algebra", "dilation", "kernel", "polar", "gauge")


class Context:
    """Lazily built objects shared by the checks of one instance."""

    def __init__(self, inst: Instance, seed: int, tol: float | None):
        self.inst = inst
        self.seed = seed
        self.tol = tol

    def rng(self, check_id: str):
        return rng_for(self.seed, check_id)

    def thr(self, default: float) -> float:
        return default if self.tol is None else self.tol

    @cached_property
    def expectation(self):
        inst = self.inst
        if inst.projection is not None:
            pc = commutant([inst.projection], inst.algebra)
            if pc.dim == inst.subalgebra.dim and pc.is_subalgebra_of(inst.subalgebra):
                return expectation_ep(inst.projection, inst.algebra)
        return expectation_trace(inst.algebra, inst.subalgebra)

    @cached_property
    def space(self) -> gm.CosetSpace:
        return gm.CosetSpace(self.expectation)

    @cached_property
    def pair(self):
        return compatible_pair(self.expectation, self.inst.cp_map)

    @cached_property
    def bundle(self) -> rk.HomogeneousBundle:
        return rk.HomogeneousBundle.from_pair(self.pair)


def _guard(check_id: str, anchor: str, fn) -> list[Check]:
    """Run ``fn`` and turn library errors into a failing check."""
    try:
        out = fn()
    except OpalgError as exc:
        return [Check.error(check_id, anchor, exc)]
    return out if isinstance(out, list) else [out]


# algebra -----------------------------------------------------------------------------


def suite_algebra(ctx: Context) -> list[Check]:
    inst = ctx.inst
    a, b = inst.algebra, inst.subalgebra
    out = [
        Check.at_most("algebra.closure", "unital *-subalgebra A: products and adjoints stay in span", a.closure_residual(), ctx.thr(1e-10)),
        Check.at_most("algebra.subalgebra_closure", "unital *-subalgebra B: products and adjoints stay in span", b.closure_residual(), ctx.thr(1e-10)),
        Check.flag("algebra.subalgebra_inclusion", "B contained in A", b.is_subalgebra_of(a)),
    ]

    def tomiyama():
        rep = tomiyama_check(ctx.expectation, 200, ctx.rng("algebra.tomiyama"), ctx.thr(1e-10))
        return [
            Check.at_most(f"algebra.tomiyama.{k}", "conditional expectation: Tomiyama properties", v, ctx.thr(1e-10))
            for k, v in sorted(rep.residuals.items())
        ]

    out += _guard("algebra.tomiyama", "conditional expectation: Tomiyama properties", tomiyama)
    p = inst.projection
    if p is not None:
        rep = ap_space_report(p, a, ctx.rng("algebra.ap_space"))
        out.append(Check.flag("algebra.ap_space", "A^p + A^(1-p) = A, (A^p)* = A^(1-p), A^p cap A^(1-p) = {p}'", rep.ok,
                              note=f"dim A^p={rep.dim_ap}, dim A^(1-p)={rep.dim_ap_hat}, dim {{p}}'={rep.dim_commutant}"))
        comp = compression(p, a)
        trivial = nk.opnorm(p) == 0 or nk.opnorm(p - np.eye(len(p))) == 0
        if not trivial:
            flagged = not tomiyama_check(comp, 5, ctx.rng("algebra.compression")).passed
            out.append(Check.flag("algebra.compression_flagged", "compression T -> pTp is not a conditional expectation", flagged))
        pc = commutant([p], a)
        if pc.dim == b.dim and pc.is_subalgebra_of(b):
            diff = nk.opnorm(expectation_ep(p, a).matrix - expectation_trace(a, b).matrix)
            out.append(Check.at_most("algebra.ep_vs_trace", "E_p(T) = pTp + (1-p)T(1-p) is the trace-orthogonal expectation", diff, ctx.thr(1e-12)))
    return out


# dilation ----------------------------------------------------------------------------


def suite_dilation(ctx: Context) -> list[Check]:
    inst = ctx.inst
    phi = inst.cp_map
    verdict = is_completely_positive(phi, 1e-9)
    amp = positivity_by_amplification(phi, 40, ctx.rng("dilation.choi_vs_amplification"), 1e-9)
    out = [
        Check.at_least("dilation.cp", "Choi criterion: Phi completely positive", verdict.min_eigenvalue, -ctx.thr(1e-9)),
        Check.flag("dilation.choi_vs_amplification", "Choi test agrees with positivity of amplifications", bool(verdict) == amp),
        Check.at_most("dilation.unital", "Phi(1) = 1", nk.opnorm(phi(np.eye(inst.dim)) - np.eye(phi.out_dim)), ctx.thr(1e-9)),
    ]

    def stine():
        d = stinespring(inst.algebra, phi)
        res = representation_residuals(d)
        anchor = "Stinespring: Phi(a) = V* pi(a) V"
        return [
            Check.at_most("dilation.stinespring", anchor, dilation_residual(phi, d, 20, ctx.rng("dilation.stinespring")), ctx.thr(1e-9),
                          note=f"space_dim={d.space_dim}"),
            Check.at_most("dilation.multiplicativity", "pi(a_i a_j) = sum_k c_k pi(a_k)", res["multiplicativity"], ctx.thr(1e-9)),
            Check.at_most("dilation.star", "pi(a*) = pi(a)*", res["star"], ctx.thr(1e-10)),
            Check.at_most("dilation.isometry", "V* V = 1", res["isometry"], ctx.thr(1e-10)),
            Check.flag("dilation.minimality", "span pi(A) V H0 is the whole dilation space", res["minimal_rank"] == d.space_dim),
        ]

    out += _guard("dilation.stinespring", "Stinespring: Phi(a) = V* pi(a) V", stine)

    def squares():
        try:
            pair = ctx.pair
        except IncompatibleData as exc:
            return Check.skip("dilation.two_squares", "compatible pair over E", f"Phi o E != Phi: {exc}")
        res = pair.residuals()
        anchor = "two commuting squares: P pi_A(b) = pi_B(b) P and E~ = P"
        return [
            Check.at_most("dilation.two_squares.right", anchor, res["right_square"], ctx.thr(1e-9)),
            Check.at_most("dilation.two_squares.restriction", anchor, res["restriction"], ctx.thr(1e-9)),
            Check.at_most("dilation.two_squares.left", anchor, res["left_square"], ctx.thr(1e-9)),
            Check.at_most("dilation.two_squares.e_tilde", anchor, res["e_tilde_vs_p"], ctx.thr(1e-9)),
            Check.flag("dilation.generation", "H_A = span pi_A(U_A) H_B",
                       pair.generation_rank(8, ctx.rng("dilation.generation")) == pair.dil_a.space_dim),
        ]

    out += _guard("dilation.two_squares", "compatible pair over E", squares)
    return out


# kernel ------------------------------------------------------------------------------


def _kernel_checks(ctx: Context) -> list[Check]:
    bnd = ctx.bundle
    out = []
    pts, vecs = rk.random_configuration(bnd, 8, ctx.rng("kernel.gram"))
    ks = rk.kernel_gram(pts, vecs)
    out.append(Check.at_least("kernel.gram_psd", "(-*)-positive definite kernel Gram", ks.min_eigenvalue, -ctx.thr(1e-8)))
    out.append(Check.at_most("kernel.gram_hermitian", "kernel Gram is Hermitian", ks.hermitian_residual, ctx.thr(1e-10)))
    out.append(Check.at_most("kernel.gram_vs_ambient", "kernel Gram equals the Gram of pi_A(u_j^-*) f_j in H_A",
                             nk.opnorm(ks.gram - rk.ambient_gram(vecs)), ctx.thr(1e-9)))

    rng = ctx.rng("kernel.intertwining")
    worst = 0.0
    for k in range(6):
        v = bnd.a.random_unitary(rng) if k % 2 else bnd.a.random_invertible(rng, 10.0)
        h = rng.standard_normal(bnd.h_a_dim) + 1j * rng.standard_normal(bnd.h_a_dim)
        worst = max(worst, rk.intertwine_check(bnd, v, h, pts))
    out.append(Check.at_most("kernel.intertwining", "gamma(pi_A(v) h) = v . gamma(h)(v^-1 .)", worst, ctx.thr(1e-8)))

    rng = ctx.rng("kernel.evaluation_identity")
    worst = 0.0
    for _ in range(3):
        s, t = bnd.space.random_point(rng, 10.0), bnd.space.random_point(rng, 10.0)
        worst = max(worst, rk.evaluation_identity_check(s, t, bnd, extra_points=[bnd.space.random_point(rng, 10.0)]))
    out.append(Check.at_most("kernel.evaluation_identity", "K(s, t^-*) = ev_s o (ev_t)^-*", worst, ctx.thr(1e-8)))

    rng = ctx.rng("kernel.prods")
    s, t = bnd.space.random_point(rng, 10.0), bnd.space.random_point(rng, 10.0)
    kspace = rk.kernel_space([e for z in (s, t, gm.coset_involution(s)) for e in rk.fiber_basis(z, bnd)])
    eta = bnd.element(t, rng.standard_normal(bnd.h_b_dim) + 1j * rng.standard_normal(bnd.h_b_dim))
    xi = bnd.element(s, rng.standard_normal(bnd.h_b_dim) + 1j * rng.standard_normal(bnd.h_b_dim))
    out.append(Check.at_most("kernel.prods", "(K_eta | K_xi) = (K(s^-*, t) eta | xi)", rk.prods_residual(kspace, eta, xi), ctx.thr(1e-9)))
    out.append(Check.at_most("kernel.isometry_w", "W: K_eta -> Theta(eta) is isometric", rk.isometry_residual(kspace), ctx.thr(1e-9)))

    rng = ctx.rng("kernel.holomorphy")
    h = rng.standard_normal(bnd.h_a_dim) + 1j * rng.standard_normal(bnd.h_a_dim)
    z0 = bnd.space.random_point(rng, 10.0)
    direction = bnd.a.random_element(rng)
    pos = rk.holomorphy_check(bnd, h, z0, direction)
    neg = rk.holomorphy_check(bnd, h, z0, direction, conjugate=True)
    anchor = "sections gamma(h) are holomorphic (Cauchy-Riemann under eps halving)"
    out.append(Check.flag("kernel.holomorphy", anchor, pos.passed, note=f"ratios={[round(r, 3) for r in pos.ratios]}"))
    degenerate = max(neg.residuals) <= neg.floor
    out.append(Check.flag("kernel.holomorphy_control", "entrywise conjugate fails the Cauchy-Riemann test",
                          degenerate or not neg.passed, note="constant map" if degenerate else ""))

    rng = ctx.rng("kernel.unitary_restriction")
    rep = rk.unitary_restriction_check(bnd, h, [bnd.a.random_unitary(rng) for _ in range(10)])
    out.append(Check.at_least("kernel.unitary_restriction", "fixed points carry a Hermitian structure", rep.min_diagonal_pairing, -ctx.thr(1e-10)))
    out.append(Check.at_most("kernel.unitary_definition", "gamma^U(h) = gamma(h) o lambda", rep.definition_residual, ctx.thr(1e-12)))
    return out


def suite_kernel(ctx: Context) -> list[Check]:
    try:
        ctx.bundle
    except IncompatibleData as exc:
        return [Check.skip("kernel", "homogeneous bundle over a compatible pair", f"Phi o E != Phi: {exc}")]
    except OpalgError as exc:
        return [Check.error("kernel", "homogeneous bundle over a compatible pair", exc)]
    return _guard("kernel", "homogeneous bundle over a compatible pair", lambda: _kernel_checks(ctx))


# polar -------------------------------------------------------------------------------


def polar_targets(ctx: Context) -> list[np.ndarray]:
    if ctx.inst.targets:
        return list(ctx.inst.targets)
    rng = ctx.rng("polar.targets")
    return [ctx.inst.algebra.random_invertible(rng, 100.0) for _ in range(5)]


def _polar_target(ctx: Context, k: int, a: np.ndarray) -> list[Check]:
    e = ctx.expectation
    pid = f"polar.target[{k}]"
    anchor = "a = u exp(iX) b with u unitary, X in Ker E anti-Hermitian, b > 0 in B"
    t = gm.porta_recht(a, e)
    na = nk.opnorm(a)
    out = [
        Check.at_most(f"{pid}.reconstruction", anchor, nk.opnorm(t.reconstruct() - a) / na, ctx.thr(1e-7), note=f"iterations={t.iterations}"),
        Check.at_most(f"{pid}.e_of_x", anchor, nk.opnorm(e(t.x)), ctx.thr(1e-8)),
        Check.at_most(f"{pid}.x_antihermitian", anchor, nk.opnorm(t.x + t.x.conj().T), ctx.thr(1e-10)),
        Check.at_most(f"{pid}.u_unitary", anchor, nk.opnorm(t.u.conj().T @ t.u - np.eye(len(a))), ctx.thr(1e-10)),
        Check.at_most(f"{pid}.b_in_b", anchor, e.target.residual(t.b), ctx.thr(1e-9)),
    ]
    rng = ctx.rng(f"{pid}.restarts")
    worst = 0.0
    for _ in range(3):
        t2 = gm.porta_recht(a, e, start=e.target.random_positive(rng) + 0.1 * np.eye(len(a)))
        worst = max(worst, gm.triples_equivalent(t, t2, e.target)[1], nk.opnorm(t.b - t2.b))
    out.append(Check.at_most(f"{pid}.restarts", "uniqueness of (u, X, b) up to U_B", worst, ctx.thr(1e-6)))
    mr = gm.mr_factorization(a, e)
    out.append(Check.at_most(f"{pid}.mr_identity", "a^-* = a_+ a b_+ with b_+ = E(a* a)", mr.residual, ctx.thr(1e-9), note=f"scale={mr.scale:.6g}"))
    return out


def suite_polar(ctx: Context) -> list[Check]:
    out = []
    iters = []
    for k, a in enumerate(polar_targets(ctx)):
        checks = _guard(f"polar.target[{k}]", "a = u exp(iX) b", lambda a=a, k=k: _polar_target(ctx, k, a))
        out += checks
        iters += [int(c.note.split("=")[1]) for c in checks if c.id.endswith(".reconstruction")]
    if iters:
        out.append(Check.at_most("polar.median_iterations", "fixed-point solver cost", float(np.median(iters)), 49.0))
    out += _guard("polar.fixed_points", "fixed points of z -> z^-* are the unitary orbit", lambda: _fixed_point_checks(ctx))
    return out


def _fixed_point_checks(ctx: Context) -> list[Check]:
    space = ctx.space
    rng = ctx.rng("polar.fixed_points")
    mismatches = 0
    for k in range(20):
        if k % 2:
            z = space.point(space.a.random_unitary(rng) @ (space.b.random_positive(rng) + 0.1 * np.eye(space.n)))
        else:
            z = space.random_point(rng, 20.0)
        fixed, _ = gm.is_fixed_point(z)
        oracle = nk.opnorm(gm.porta_recht(z.rep, space.expectation).x) <= 1e-7
        mismatches += fixed != oracle
    out = [Check.at_most("polar.fixed_points", "z^-* = z iff X = 0 in the polar form", float(mismatches), 0.0)]
    rng = ctx.rng("polar.involution_equivariance")
    bad = 0
    for _ in range(10):
        z, g = space.random_point(rng, 20.0), space.a.random_invertible(rng, 20.0)
        lhs = gm.coset_involution(z.act(g))
        rhs = gm.coset_involution(z).act(nk.inv_dag(g))
        bad += not gm.coset_equal(lhs, rhs)
    out.append(Check.at_most("polar.involution_equivariance", "(g z)^-* = g^-* z^-*", float(bad), 0.0))
    rng = ctx.rng("polar.tangent")
    rep = gm.tangent_check_psi(space, 1j * space.a.random_hermitian(rng), space.random_p(rng))
    out.append(Check.flag("polar.tangent", "tangent map of Psi^E is (Z, Y) -> (1-E)Z + iY", rep.passed,
                          note=f"ratios={[round(r, 3) for r in rep.ratios]}"))
    return out


# gauge -------------------------------------------------------------------------------


def suite_gauge(ctx: Context) -> list[Check]:
    inst = ctx.inst
    if inst.weights is None:
        return [Check.skip("gauge", "circle action", "instance has no weights")]
    act = CircleAction(inst.weights)
    anchor_e = "E^(m)(x) = int lambda^-m tau_lambda(x) dlambda"
    out = [Check.at_most("gauge.automorphism", "tau_lambda is a *-automorphism", act.automorphism_residual(10, ctx.rng("gauge.automorphism")), ctx.thr(1e-12))]
    worst = max(spectral_residual(act, m, 10, ctx.rng(f"gauge.mask_vs_discrete[{m}]")) for m in act.modes)
    out.append(Check.at_most("gauge.mask_vs_discrete", anchor_e, worst, ctx.thr(1e-12)))
    x = ctx.rng("gauge.partition").standard_normal((act.n, act.n)) + 0j
    part = float(np.max(np.abs(sum(spectral_expectation(act, m)(x) for m in act.modes) - x)))
    out.append(Check.at_most("gauge.partition", "sum_m E^(m) = id", part, 0.0))
    gr = grading_residuals(act, 5, ctx.rng("gauge.grading"))
    out.append(Check.at_most("gauge.grading", "A^(m) A^(n) in A^(m+n), (A^(m))* = A^(-m)", max(gr.values()), ctx.thr(1e-12)))
    e0 = gauge_expectation(act)
    rep = tomiyama_check(e0, 50, ctx.rng("gauge.tomiyama"), ctx.thr(1e-10))
    out.append(Check.at_most("gauge.tomiyama", "E^(0) is a conditional expectation", rep.max_residual, ctx.thr(1e-10)))
    phi = inst.cp_map
    verdict = gauge_invariance_equiv(phi, act)
    out.append(Check.flag("gauge.invariance_agree", "Phi o E^(0) = Phi iff Phi gauge invariant", verdict.agree,
                          note=f"invariant={verdict.via_expectation}"))
    if not verdict.via_expectation:
        out.append(Check.skip("gauge.fourier", "orthogonal decomposition H = sum_m H^(m)", "Phi is not gauge invariant"))
        return out

    def fourier():
        fd = fourier_decompose(compatible_pair(e0, phi), act)
        res = fd.residuals(3, ctx.rng("gauge.fourier"))
        anchor = "orthogonal decomposition H = sum_m H^(m)"
        return [
            Check.at_most("gauge.fourier.orthogonality", anchor, res["orthogonality"], ctx.thr(1e-9), note=f"dims={fd.dims}"),
            Check.at_most("gauge.fourier.completeness", anchor, res["completeness"], ctx.thr(1e-9)),
            Check.at_most("gauge.fourier.idempotence", anchor, res["idempotence"], ctx.thr(1e-10)),
            Check.at_most("gauge.fourier.average_vs_span", "P^(m) by span equals P^(m) by circle average",
                          max(res["average_vs_span_operator"], res["average_vs_span_section"]), ctx.thr(1e-8)),
            Check.at_most("gauge.fourier.mechanism", "Phi(y* x) = 0 for x, y of different weights", orthogonality_mechanism(phi, act), ctx.thr(1e-10)),
        ]

    out += _guard("gauge.fourier", "orthogonal decomposition H = sum_m H^(m)", fourier)
    return out


RUNNERS = {
    "algebra": suite_algebra,
    "dilation": suite_dilation,
    "kernel": suite_kernel,
    "polar": suite_polar,
    "gauge": suite_gauge,
}


def resolve_suites(names) -> tuple:
    names = [names] if isinstance(names, str) else list(names)
    out: list[str] = []
    for n in names:
        for part in str(n).split(","):
            part = part.strip()
            if not part:
                continue
            if part == "all":
                out += [s for s in SUITES if s not in out]
            elif part in RUNNERS:
                if part not in out:
                    out.append(part)
            else:
                raise UnknownSuite(f"unknown suite {part!r}; choose from {', '.join(SUITES + ('all',))}")
    return tuple(out)


def run_suite(inst: Instance, suites=("all",), tol: float | None = None, seed: int | None = None, prefix: str = "") -> Report:
    """Run the named suites on ``inst``; ``seed``/``tol`` override the instance values."""
    names = resolve_suites(suites)
    seed = inst.seed if seed is None else int(seed)
    tol = inst.tolerance if tol is None else tol
    ctx = Context(inst, seed, tol)
    report = Report(names, [], seed, tol, list(inst.warnings))
    for name in names:
        t0 = time.perf_counter()
        checks = RUNNERS[name](ctx)
        if prefix:
            checks = [Check(prefix + c.id, c.anchor, c.residual, c.threshold, c.passed, c.skipped, c.note) for c in checks]
        report.extend(checks)
        report.timings[prefix + name] = time.perf_counter() - t0
    return report
