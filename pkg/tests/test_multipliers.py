"""Symbol language, growth-class certificates, and the two functional calculi."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heisenberg_hodge import multipliers as mul
from heisenberg_hodge import operators as op
from heisenberg_hodge.bargmann import ModelPoint

TOL = 1e-10
ROUTE_TOL = 1e-6

PT1 = ModelPoint(1, 1.0, 8, 4)
PT1N = ModelPoint(1, -0.8, 8, 4)
PT2 = ModelPoint(2, 1.0, 8, 4)
PT3 = ModelPoint(3, 0.5, 6, 4)
PT3N = ModelPoint(3, -0.7, 6, 4)


# --- expression language -------------------------------------------------------------------


def test_parse_and_render_round_trip_simple():
    t = mul.parse_symbol("xi + 3*lambda")
    assert mul.render(t) == "xi + 3*lambda"
    t2 = mul.parse_symbol("sqrt(xi + lambda^2) / (xi + 1)")
    assert mul.render(t2) == "sqrt(xi + lambda^2)/(xi + 1)"


def test_parse_power_spellings_agree():
    a = mul.parse_symbol("xi**2 + lambda^2")
    b = mul.XI**2 + mul.LAM**2
    assert a == b


def test_parse_xitilde_sugar():
    t = mul.parse_symbol("xitilde")
    env = {"lambda": -0.7, "xi": 2.3, "p": 2, "q": 1, "l": 0, "n": 3}
    assert mul.s_eval(t, env) == 2.3 + (2 - 1) * (-0.7)


def test_parse_unary_minus_and_precedence():
    t = mul.parse_symbol("-xi + 2*lambda^2")
    env = {"lambda": 3.0, "xi": 5.0, "p": 0, "q": 0, "l": 0, "n": 2}
    assert mul.s_eval(t, env) == -5.0 + 2 * 9.0


def test_parse_constant_exponent_folds():
    t = mul.parse_symbol("xi^(1+1)")
    assert t == mul.XI**2


def test_parse_error_positions():
    with pytest.raises(mul.SymbolParseError) as e:
        mul.parse_symbol("xi + foo")
    assert e.value.pos == 5
    with pytest.raises(mul.SymbolParseError) as e:
        mul.parse_symbol("xi ^ lambda")
    assert e.value.pos == 3
    with pytest.raises(mul.SymbolParseError):
        mul.parse_symbol("(xi + 1")
    with pytest.raises(mul.SymbolParseError):
        mul.parse_symbol("xi +")
    with pytest.raises(mul.SymbolParseError) as e:
        mul.parse_symbol("xi $ 2")
    assert e.value.pos == 3


def test_diff_collapses_polynomials():
    d0 = mul.XI + mul.LAM**2
    assert mul.render(mul.s_diff(d0, "xi")) == "1"
    assert mul.render(mul.s_diff(d0, "lambda")) == "2*lambda"
    # parameters count as constants
    assert mul.render(mul.s_diff(mul.PP * mul.LAM, "lambda")) == "p"
    assert mul.render(mul.s_diff(mul.PP * mul.LAM, "xi")) == "0"


_ENV = {"lambda": -0.7, "xi": 2.3, "p": 1, "q": 0, "l": 1, "n": 3}


def _positive_trees():
    base = st.sampled_from([
        mul.num(0.5), mul.num(2.0), mul.num(3.0), mul.XI, mul.LAM**2, mul.XI + 1,
    ])

    def combine(children):
        return st.one_of(
            st.tuples(children, children).map(lambda ab: ab[0] + ab[1]),
            st.tuples(children, children).map(lambda ab: ab[0] * ab[1]),
            st.tuples(children, children).map(lambda ab: ab[0] / (ab[1] + 1)),
            children.map(mul.s_sqrt),
            st.tuples(children, st.sampled_from([-1.0, -0.5, 0.5, 2.0])).map(
                lambda ae: mul.s_pow(ae[0] + 1, ae[1])),
        )

    return st.recursive(base, combine, max_leaves=6)


@settings(max_examples=60, deadline=None)
@given(_positive_trees())
def test_render_parse_eval_round_trip(tree):
    text = mul.render(tree)
    back = mul.parse_symbol(text)
    va = float(mul.s_eval(tree, _ENV))
    vb = float(mul.s_eval(back, _ENV))
    assert abs(va - vb) <= 1e-12 * (1.0 + abs(va))


@settings(max_examples=60, deadline=None)
@given(_positive_trees(), st.sampled_from(["lambda", "xi"]))
def test_symbolic_derivative_matches_finite_difference(tree, wrt):
    sym = float(mul.s_eval(mul.s_diff(tree, wrt), _ENV))
    h = 1e-5 * max(1.0, abs(_ENV[wrt]))
    up, dn = dict(_ENV), dict(_ENV)
    up[wrt] += h
    dn[wrt] -= h
    fd = (float(mul.s_eval(tree, up)) - float(mul.s_eval(tree, dn))) / (2 * h)
    assert abs(sym - fd) <= 5e-3 * (1.0 + abs(sym) + abs(fd))


# --- fan points and diagonal evaluation ----------------------------------------------------


def test_fan_point_derived_xi_and_validation():
    fp = mul.FanPoint(2, -0.5, 3)
    assert fp.xi == 0.5 * (2 * 3 + 2)
    with pytest.raises(ValueError):
        mul.FanPoint(2, 0.0, 0)
    with pytest.raises(ValueError):
        mul.FanPoint(2, 1.0, -1)


def test_gamma_value_at_origin_slot():
    env = mul.fan_env(mul.FanPoint(2, 1.0, 0), 0, 0)
    assert mul.s_eval(mul.sym_gamma(), env) == 2.0


def test_eval_diagonal_reproduces_flat_laplacian():
    space = op.form_space(PT2, "pq", 0, 0)
    got = mul.eval_diagonal(mul.XI + mul.LAM**2, 0, 0, PT2)
    want = op.delta0_op(space)
    assert abs(got.mat - want.mat).max() == 0.0


def test_eval_diagonal_constant_one_is_identity():
    got = mul.eval_diagonal(mul.num(1.0), 1, 0, PT3)
    dim = op.form_space(PT3, "pq", 1, 0).dim
    assert abs(got.mat - np.eye(dim)).max() == 0.0


def test_eval_diagonal_star_homomorphism_exact():
    a = mul.sym_gamma()
    b = mul.sym_boxbar() + 1
    left = mul.eval_diagonal(a, 0, 1, PT3, ell=1) @ mul.eval_diagonal(b, 0, 1, PT3, ell=1)
    right = mul.eval_diagonal(a * b, 0, 1, PT3, ell=1)
    assert abs(left.mat - right.mat).max() == 0.0
    # adjoint of a real diagonal symbol is itself
    assert abs(mul.eval_diagonal(a, 0, 1, PT3, ell=1).H.mat - mul.eval_diagonal(a, 0, 1, PT3, ell=1).mat).max() == 0.0


def test_symbol_library_matches_operator_layer_scalars():
    for pt, (p, q, ell) in [(PT3, (0, 1, 1)), (PT3N, (1, 0, 0)), (PT2, (0, 0, 1))]:
        res = mul.scalar_route_residuals(pt, p, q, ell)
        worst = max(res.values())
        assert worst <= 1e-12, (pt.lam, p, q, ell, res)


def test_eval_diagonal_excluded_slot_raises_and_mask_clears():
    reg = mul.RegionSpec(n=2, restricted_plus=True)
    m = mul.s_sqrt(mul.sym_box())
    with pytest.raises(mul.ExcludedSlotError):
        mul.eval_diagonal(m, 0, 0, PT2, region=reg)
    space = op.form_space(PT2, "pq", 0, 0)
    mask = space.degrees() >= 1
    got = mul.eval_diagonal(m, 0, 0, PT2, region=reg, mask=mask)
    diag = got.mat.diagonal()
    assert abs(diag[space.degrees() == 0]).max() == 0.0
    assert np.isfinite(diag).all()


def test_eval_diagonal_nonfinite_without_region_raises():
    # box vanishes on the lowest line at p=0, lam>0, so its inverse root blows up
    m = mul.s_pow(mul.sym_box(), -0.5)
    with pytest.raises(ValueError):
        mul.eval_diagonal(m, 0, 0, PT2)


# --- growth-class certificates -------------------------------------------------------------


def test_check_class_flat_laplacian_symbol():
    cert = mul.check_class(mul.XI + mul.LAM**2, mul.SymbolClassParams(1, 0, 1, True),
                           env={"n": 3})
    assert cert.passed
    assert cert.star_min is not None and cert.star_min > 0.5


def test_check_class_constant_one():
    cert = mul.check_class(mul.num(1.0), mul.SymbolClassParams(0, 0, 0), env={"n": 3})
    assert cert.passed
    c00, _ = cert.worst()
    assert c00 == pytest.approx(1.0, abs=1e-9)


def test_check_class_gamma_plus_m_starred():
    cert = mul.check_class(mul.sym_gamma() + mul.sym_m(),
                           mul.SymbolClassParams(0.5, 0, 0, True),
                           env={"n": 3, "p": 0, "q": 0, "l": 0})
    assert cert.passed
    assert cert.star_min > 0.9


def test_check_class_negative_controls_fail_decisively():
    d0 = mul.XI + mul.LAM**2
    c1 = mul.check_class(d0 * d0, mul.SymbolClassParams(0, 0, 0), env={"n": 3})
    assert not c1.passed
    assert c1.worst()[0] > 10 * mul.GridSpec().cap
    c2 = mul.check_class(mul.num(1.0), mul.SymbolClassParams(0, 0, 1), env={"n": 3})
    assert not c2.passed
    assert c2.constants[(0, 0)] > mul.GridSpec().cap


def test_check_class_cli_example_splits_on_dimension():
    t = mul.parse_symbol("xi + 3*lambda")
    cls = mul.SymbolClassParams(0, 1, 1, True)
    c3 = mul.check_class(t, cls, env={"n": 3})
    assert not c3.passed
    assert c3.star_min == 0.0  # exact zero on the lambda<0 slope-3 line
    c4 = mul.check_class(t, cls, env={"n": 4})
    assert c4.passed
    assert c4.star_min == pytest.approx(0.25, rel=1e-6)


def test_check_class_deterministic_and_tiling_invariant():
    m = mul.sym_gamma()
    cls = mul.SymbolClassParams(0.5, 0, 0, True)
    env = {"n": 3, "p": 1, "q": 0, "l": 0}
    a = mul.check_class(m, cls, env=env).to_jsonable()
    b = mul.check_class(m, cls, env=env).to_jsonable()
    c = mul.check_class(m, cls, env=env, jobs=3).to_jsonable()
    assert a == b == c


def test_class_inclusion_ordering():
    base = mul.SymbolClassParams(1, 0, 1)
    assert mul.SymbolClassParams(1, 1, 1).includes(base)
    assert mul.SymbolClassParams(1, 0, 0).includes(base)
    assert not mul.SymbolClassParams(0.5, 0, 1).includes(base)  # needs larger growth room
    assert not mul.SymbolClassParams(1, 0, 2).includes(base)  # stronger small-end decay


def test_certificate_reports_excluded_rays():
    reg = mul.RegionSpec(n=3, restricted_plus=True)
    cert = mul.check_class(mul.s_sqrt(mul.sym_box()), mul.SymbolClassParams(0, 0.5, 0.5),
                           env={"n": 3, "p": 0, "q": 0, "l": 0}, region=reg)
    assert cert.passed
    assert cert.to_jsonable()["excluded_rays"] == ["xi=3*lambda, lambda>0"]


def test_class_algebra_report():
    rep = mul.verify_class_algebra()
    assert rep["all_passed"], {k: v["passed"] for k, v in rep.items() if isinstance(v, dict)}
    ra = rep["route_agreements"]
    assert ra["r11_factored_vs_poly"] <= 1e-9
    assert ra["r22_factored_vs_product"] <= 1e-9
    assert ra["delta_p_trace_vs_display"] <= 1e-9


@pytest.mark.parametrize("tup", [(0, 0, 0), (0, 0, 1), (1, 0, 0), (0, 1, 0), (1, 1, 0), (2, 0, 0)])
def test_lemma_memberships_n3(tup):
    p, q, ell = tup
    rep = mul.verify_lemma_memberships(3, p, q, ell)
    fails = [e["name"] for e in rep["entries"] if not e["skipped"] and not e["passed"]]
    assert rep["all_passed"], fails
    assert rep["checked"] > 0


def test_lemma_memberships_other_dimensions():
    assert mul.verify_lemma_memberships(2, 0, 0, 0)["all_passed"]
    assert mul.verify_lemma_memberships(4, 0, 0, 1)["all_passed"]


def test_lemma_memberships_skip_reasons():
    # n=2 at (1,1): first-order family needs p+q+1 <= n, here 3 > 2
    rep = mul.verify_lemma_memberships(2, 1, 1, 0)
    skipped = {e["name"]: e.get("reason") for e in rep["entries"] if e["skipped"]}
    assert "lambda" in skipped and skipped["lambda"]
    # n=1 scalar point: the second-order factors need q >= 1
    rep1 = mul.verify_lemma_memberships(1, 0, 0, 0)
    names = {e["name"] for e in rep1["entries"] if e["skipped"]}
    assert "DeltaP" in names


def test_q_plus_minus_star_constant_decays_with_grid_extent():
    # the lower-bound constant along the matching-sign lowest line falls like
    # 1/|lambda|; certified honestly on each declared grid
    m = mul.sym_q_factor(1, -1)
    cls = mul.SymbolClassParams(0.5, 0, 0, True)
    env = {"n": 3, "p": 0, "q": 0, "l": 0}
    small = mul.check_class(m, cls, env=env, grid=mul.GridSpec(xi_hi_exp=2.5))
    big = mul.check_class(m, cls, env=env, grid=mul.GridSpec(xi_hi_exp=4.5))
    assert small.passed and big.passed
    assert big.star_min < 0.05 * small.star_min
    assert big.star_min >= mul.GridSpec().star_floor


# --- functional calculus of the degree-k Laplacian -----------------------------------------


def test_catalog_gate_certifies_small_residual():
    assert mul.ensure_catalog_verified(PT2, 1) <= 1e-8
    assert mul.catalog_eigen_residual(PT1, 1) <= 1e-10


@pytest.mark.parametrize("name,fn", [
    ("one", lambda x: np.ones_like(x)),
    ("identity", lambda x: x),
    ("exp_decay", lambda x: np.exp(-x)),
])
def test_multiplier_routes_agree_on_probes(name, fn):
    gap = mul.multiplier_routes_gap(fn, 1, PT2)
    assert gap <= ROUTE_TOL, (name, gap)


def test_multiplier_routes_agree_beyond_middle_degree():
    # k = 4 > n exercises the star-transferred catalog
    gap = mul.multiplier_routes_gap(lambda x: 1.0 / (1.0 + x), 4, PT2)
    assert gap <= ROUTE_TOL


def test_multiplier_identity_function_recovers_laplacian():
    a = mul.apply_multiplier_delta(lambda x: x, 1, PT2, "eig")
    cols = mul._probe_columns(PT2, 1, 6, 1)
    want = op.delta_op(PT2, 1).mat @ cols
    got = a.mat @ cols
    assert np.linalg.norm(got - want) / np.linalg.norm(want) <= TOL


def test_multiplier_unknown_route_rejected():
    with pytest.raises(ValueError):
        mul.apply_multiplier_delta(lambda x: x, 1, PT2, "spectral")


# --- the first-order operator on the bundle ------------------------------------------------


def _assert_dirac_suite(ch):
    assert ch["hermitian"] == 0.0
    assert ch["square_vs_delta"] <= TOL
    assert ch["min_delta_eig"] > 0.0
    for key in ("p_idempotent", "p_hermitian", "p_cross", "p_complementary",
                "eigenflow_plus", "eigenflow_minus",
                "multiplier_identity_reproduces", "multiplier_routes"):
        assert ch[key] <= ROUTE_TOL, (key, ch[key])
    for key in ("measure_idempotent", "measure_total", "measure_intersection"):
        assert ch[key] <= 1e-12, (key, ch[key])


def test_dirac_bundle_n1_both_signs():
    for pt in (PT1, PT1N):
        d = mul.build_dirac(pt)
        _assert_dirac_suite(d.checks())


def test_dirac_bundle_n2():
    d = mul.build_dirac(PT2)
    _assert_dirac_suite(d.checks())


def test_dirac_projectors_sum_to_identity_exactly():
    d = mul.build_dirac(PT1)
    total = d.projector_plus + d.projector_minus
    assert abs(total - np.eye(d.space.dim)).max() == 0.0


def test_dirac_eigenline_content():
    for pt, k in [(PT1, 1), (PT2, 2)]:
        line = mul.dirac_block_eigenline(pt, k)
        assert line["square_residual"] <= TOL
        assert line["band_capture"] <= ROUTE_TOL
        assert line["mu"] > 0.0


def test_dirac_spectral_projector_orthogonal_bands():
    d = mul.build_dirac(PT1)
    lo = d.spectral_projector(0.0, 1.2)
    hi = d.spectral_projector(1.3, np.inf)
    assert np.linalg.norm(lo @ hi) <= 1e-12
