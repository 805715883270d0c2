import numpy as np
import pytest

from conftest import jet_values, max_value
from tractorlab.jets import PoleError, jet_space
from tractorlab.tractor import (
    TractorCalculus,
    TractorValue,
    bgg_split_metricity,
    change_splitting,
    induced_tractor_derivative,
    l_tau,
    metric_tractor_curvature_blocks,
    metricity_contorsion,
    metricity_residual,
    polynomial_tractor_section,
    s2t_slots,
    standard_curvature_blocks,
    std_tractor_derivative,
    tractor_curvature,
    tractor_metric_inverse,
)


def linear_upsilon(dim, coeffs):
    def ups(point, order):
        space = jet_space(dim, order)
        xs = [space.variable(i, float(point[i])) for i in range(dim)]
        out = np.empty(dim, dtype=object)
        for a in range(dim):
            val = space.constant(coeffs[a][0])
            for i in range(dim):
                val = val + coeffs[a][1 + i] * xs[i]
            out[a] = val
        return out

    return ups


def tv_gap(a, b):
    return max(
        abs((a.components[idx] - b.components[idx]).value)
        for idx in np.ndindex(a.components.shape)
    )


@pytest.fixture(scope="module")
def calc3(klein3):
    return TractorCalculus(klein3)


@pytest.fixture(scope="module")
def calc_af2(af2):
    return TractorCalculus(af2)


# -- the standard connection in a splitting ------------------------------------


def test_flat_structure_derivative(flat3):
    # flat geometry: P = 0 and Gamma = 0, so the derivative is literally
    # (partial nu + sigma delta; partial sigma)
    calc = TractorCalculus(flat3)
    p = (0.2, 0.1, -0.3)
    space = jet_space(3, 2)
    comps = np.empty(4, dtype=object)
    comps[0] = space.variable(0, p[0])  # sigma = x0
    for a in range(3):
        comps[1 + a] = space.constant(0.0)
    tv = TractorValue(comps, "u", 0, calc.levi_civita_splitting)
    D = std_tractor_derivative(calc, tv, p)
    for a in range(3):
        # nu-slot: sigma delta^b_a
        for b in range(3):
            expect = p[0] if a == b else 0.0
            assert D.components[a, 1 + b].value == pytest.approx(expect, abs=1e-14)
        # sigma-slot: partial_a sigma
        assert D.components[a, 0].value == pytest.approx(1.0 if a == 0 else 0.0,
                                                         abs=1e-14)


def test_constant_upper_section_on_flat(flat3):
    calc = TractorCalculus(flat3)
    p = (0.0, 0.0, 0.0)
    space = jet_space(3, 2)
    comps = np.empty(4, dtype=object)
    comps[0] = space.constant(0.0)
    for a in range(3):
        comps[1 + a] = space.variable(a, 0.0)
    tv = TractorValue(comps, "u", 0, calc.levi_civita_splitting)
    D = std_tractor_derivative(calc, tv, p)
    for a in range(3):
        assert D.components[a, 0].value == pytest.approx(0.0, abs=1e-14)
        for b in range(3):
            assert D.components[a, 1 + b].value == pytest.approx(
                1.0 if a == b else 0.0, abs=1e-14
            )


# -- change of splitting ---------------------------------------------------------


def test_change_splitting_identity_and_group_action(calc3, rng):
    p = (0.2, -0.1, 0.3)
    tv = l_tau(calc3, p, 2)
    ident = change_splitting(tv, np.zeros(3))
    assert tv_gap(ident, tv) == 0.0
    u1 = linear_upsilon(3, rng.uniform(-0.5, 0.5, (3, 4)))(p, 2)
    u2 = linear_upsilon(3, rng.uniform(-0.5, 0.5, (3, 4)))(p, 2)
    two = change_splitting(change_splitting(tv, u1), u2)
    u12 = np.array([u1[a] + u2[a] for a in range(3)], dtype=object)
    one = change_splitting(tv, u12)
    assert tv_gap(two, one) < 1e-10


def test_endomorphism_change_is_conjugation(calc3, rng):
    # pushing an endomorphism through the fiber change map reproduces the
    # slot change law: xi fixed, A += xi Y, lambda -= Y.xi,
    # psi += -A^T Y + lambda Y - (Y.xi) Y
    p = (0.15, 0.2, -0.1)
    d = 3
    space = jet_space(d, 1)
    M = np.empty((d + 1, d + 1), dtype=object)
    vals = rng.uniform(-1, 1, size=(d + 1, d + 1))
    for idx in np.ndindex(d + 1, d + 1):
        M[idx] = space.constant(vals[idx])
    uvals = rng.uniform(-0.7, 0.7, size=d)
    ups = np.array([space.constant(v) for v in uvals], dtype=object)
    tv = TractorValue(M, "ud", 0, calc3.reference)
    out = change_splitting(tv, ups)
    got = jet_values(out.components)

    A = vals[1:, 1:]
    xi = vals[1:, 0]
    psi = vals[0, 1:]
    lam = vals[0, 0]
    expected = np.zeros((d + 1, d + 1))
    expected[1:, 0] = xi
    expected[1:, 1:] = A + np.outer(xi, uvals)
    expected[0, 0] = lam - uvals @ xi
    expected[0, 1:] = psi - uvals @ A + lam * uvals - (uvals @ xi) * uvals
    assert np.max(np.abs(got - expected)) < 1e-12


def test_l_tau_hatform_instance(calc3, klein3):
    p = (0.25, -0.1, 0.3)
    order = 2
    Lh = calc3.in_splitting(l_tau(calc3, p, order), calc3.reference, p)
    rho_full = klein3.rho_jet(p, order + 1)
    grad = [rho_full.partial(a) for a in range(3)]
    rho = rho_full.truncate(order)
    tau_hat = calc3.tau_hat_jet(p, order)
    P = calc3.pack_of(calc3.levi_civita_splitting).schouten(p, order)
    G = Lh.components
    gap = np.max(np.abs((G[0, 0] - rho * tau_hat).coeffs))
    for a in range(3):
        gap = max(gap, np.max(np.abs((G[0, 1 + a] - 0.5 * grad[a] * tau_hat).coeffs)))
        for b in range(3):
            expect = P[a, b] * rho * tau_hat + grad[a] * grad[b] * tau_hat / (4 * rho)
            gap = max(gap, np.max(np.abs((G[1 + a, 1 + b] - expect).coeffs)))
    assert gap < 1e-9


def test_l_tau_boundary_slot_structure(calc3, klein3):
    # approaching the boundary: top slot -> 0, middle -> rho_a/2 * tauhat
    y = np.array([1.0, 0.0, 0.0])
    for eps in (1e-2, 1e-3):
        p = tuple(y * np.sqrt(1 - eps))
        G = calc3.in_splitting(l_tau(calc3, p, 0), calc3.reference, p).components
        assert abs(G[0, 0].value) < 2 * eps
        mid = np.array([G[0, 1 + a].value for a in range(3)])
        assert np.linalg.norm(mid - 0.5 * klein3.drho(p)) < 2 * eps


# -- induced connection on End(T), product rule ---------------------------------


def test_end_connection_block_formula(calc_af2, rng):
    # Leibniz-built derivative of an End section against the block formula
    # (with the Leibniz-consistent +lambda P entry)
    calc = calc_af2
    d = 4
    p = (0.4, 0.2, -0.3, 0.1)
    order = 2
    space = jet_space(d, order + 1)
    xs = [space.variable(i, p[i]) for i in range(d)]
    M = np.empty((d + 1, d + 1), dtype=object)
    for idx in np.ndindex(d + 1, d + 1):
        c = rng.uniform(-1, 1, size=1 + d)
        val = space.constant(c[0])
        for i in range(d):
            val = val + c[1 + i] * (xs[i] - p[i])
        M[idx] = val
    tv = TractorValue(M, "ud", 0, calc.reference)
    D = induced_tractor_derivative(calc, tv, p)

    conn = calc.connection_of(calc.reference)
    pack = calc.pack_of(calc.reference)
    P = pack.schouten(p, order)
    G = conn.christoffels(p, order)
    A = M[1:, 1:]
    xi = M[1:, 0]
    psi = M[0, 1:]
    lam = M[0, 0]

    def nabla(expr_arr, variance):
        # plain coupled derivative on spacetime tensors (weight 0)
        out = np.empty((d,) + expr_arr.shape, dtype=object)
        for a in range(d):
            for idx in np.ndindex(expr_arr.shape):
                acc = expr_arr[idx].partial(a)
                for slot, var in enumerate(variance):
                    i_s = idx[slot]
                    for e in range(d):
                        other = expr_arr[idx[:slot] + (e,) + idx[slot + 1:]]
                        if var == "u":
                            acc = acc + G[i_s, a, e] * other
                        else:
                            acc = acc - G[e, a, i_s] * other
                out[(a,) + idx] = acc
        return out

    dA = nabla(A, "ud")
    dxi = nabla(xi, "u")
    dpsi = nabla(psi, "d")
    dlam = nabla(np.array(lam, dtype=object).reshape(()), "")
    gap = 0.0
    for a in range(d):
        for b in range(d):
            for c in range(d):
                expect = dA[a, b, c] + psi[c] * (1.0 if a == b else 0.0) \
                    + P[a, c] * xi[b]
                gap = max(gap, abs((D.components[a, 1 + b, 1 + c] - expect).value))
            expect = dxi[a, b] + (lam if a == b else 0.0 * lam) - A[b, a]
            gap = max(gap, abs((D.components[a, 1 + b, 0] - expect).value))
        for c in range(d):
            acc = dpsi[a, c] + lam * P[a, c]
            for e in range(d):
                acc = acc - P[a, e] * A[e, c]
            gap = max(gap, abs((D.components[a, 0, 1 + c] - acc).value))
        acc = dlam[a]
        for e in range(d):
            acc = acc - P[a, e] * xi[e]
        acc = acc - psi[a]
        gap = max(gap, abs((D.components[a, 0, 0] - acc).value))
    assert gap < 1e-10


def test_product_rule(calc3, rng):
    p = (0.2, -0.15, 0.1)
    s1 = polynomial_tractor_section(calc3, p, 3, rng)
    s2 = polynomial_tractor_section(calc3, p, 3, rng)
    prod = np.empty((4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            prod[i, j] = s1.components[i] * s2.components[j]
    tv = TractorValue(prod, "uu", 0, calc3.reference)
    D = induced_tractor_derivative(calc3, tv, p)
    D1 = std_tractor_derivative(calc3, s1, p)
    D2 = std_tractor_derivative(calc3, s2, p)
    gap = 0.0
    for a in range(3):
        for i in range(4):
            for j in range(4):
                expect = (
                    D1.components[a, i] * s2.components[j].truncate(2)
                    + s1.components[i].truncate(2) * D2.components[a, j]
                )
                gap = max(gap, abs((D.components[a, i, j] - expect).value))
    assert gap < 1e-10


def test_l_tau_parallel_for_einstein(calc3, rng):
    # Klein is Einstein: grad P = 0, so L(tau) is parallel everywhere
    p = (0.2, -0.1, 0.25)
    L = l_tau(calc3, p, 3, calc3.reference)
    D = std_tractor_derivative(calc3, L, p)
    assert max_value(D.components) < 1e-9


def test_derivative_of_l_tau_slot_structure(calc_af2):
    # in every splitting the derivative of L(tau) sits in the injecting
    # slot only; in the Levi-Civita splitting that slot is tau grad_a P_bc
    p = (0.4, 0.2, -0.3, 0.1)
    d = 4
    pack = calc_af2.pack_of(calc_af2.levi_civita_splitting)
    dP = pack.schouten_derivative(p, 2)
    tau = calc_af2.tau_jet(p, 2)
    for s in (calc_af2.levi_civita_splitting, calc_af2.reference):
        L = l_tau(calc_af2, p, 3, s)
        D = std_tractor_derivative(calc_af2, L, p)
        top = max(abs(D.components[a, 0, 0].value) for a in range(d))
        mid = max(
            abs(D.components[a, 0, 1 + b].value)
            for a in range(d) for b in range(d)
        )
        assert max(top, mid) < 1e-9
        if s == calc_af2.levi_civita_splitting:
            gap = max(
                abs((D.components[a, 1 + b, 1 + c] - tau * dP[a, b, c]).value)
                for a in range(d) for b in range(d) for c in range(d)
            )
            assert gap < 1e-9


def test_einstein_trace_adjusted_schouten_vanishes(calc3, rng):
    # P - S g/(n(n+1)) is identically zero for the hyperbolic ball
    geom = calc3.geom
    pack = calc3.pack_of(calc3.levi_civita_splitting)
    p = geom.interior_points(1, rng)[0]
    P = pack.schouten(p, 0)
    S = pack.scalar(p, 0)
    g = geom.metric_jets(p, 0)
    n = 2
    gap = max(
        abs((P[a, b] - S * g[a, b] * (1.0 / (n * (n + 1)))).value)
        for a in range(3) for b in range(3)
    )
    assert gap < 1e-12


# -- the BGG splitting operator ---------------------------------------------------


def test_bgg_parallel_klein(calc3):
    p = (0.25, -0.1, 0.3)
    sigma = calc3.metricity_field()
    lifted = bgg_split_metricity(calc3, sigma, calc3.levi_civita_splitting, p, 1)
    top, mid, bot = s2t_slots(lifted)
    assert max(abs(j.value) for j in mid) < 1e-12
    rho = calc3.geom.rho_value(p)
    # bottom slot: g^ij P_ij tau^-1/(n+1) with g^ij P_ij = -(n+1)
    assert bot.value == pytest.approx(-1.0 / rho, rel=1e-12)


def test_bgg_flat_bottom_slot(flat3):
    calc = TractorCalculus(flat3)
    p = (0.2, 0.0, 0.1)
    sigma = calc.metricity_field()
    lifted = bgg_split_metricity(calc, sigma, calc.levi_civita_splitting, p, 1)
    top, mid, bot = s2t_slots(lifted)
    assert max(abs(j.value) for j in mid) < 1e-13
    assert abs(bot.value) < 1e-13


def test_bgg_equivariance(calc_af2):
    p = (0.4, 0.2, -0.3, 0.1)
    sigma = calc_af2.metricity_field()
    direct = bgg_split_metricity(calc_af2, sigma, calc_af2.reference, p, 1)
    in_lc = bgg_split_metricity(
        calc_af2, sigma, calc_af2.levi_civita_splitting, p, 1
    )
    changed = calc_af2.in_splitting(in_lc, calc_af2.reference, p)
    assert tv_gap(direct, changed) < 1e-10


# -- fiber metric inverse ----------------------------------------------------------


def test_inverse_of_inverse(calc3):
    p = (0.3, 0.1, -0.2)
    L = l_tau(calc3, p, 2, calc3.reference)
    back = tractor_metric_inverse(tractor_metric_inverse(L))
    assert tv_gap(back, L) < 1e-10


def test_flat_l_tau_degenerate(flat3):
    calc = TractorCalculus(flat3)
    L = l_tau(calc, (0.3, 0.0, 0.0), 1)
    with pytest.raises(PoleError):
        tractor_metric_inverse(L)


def test_klein_t_vector_and_psi(calc3, klein3):
    # closed forms: t^a = -x^a/2 and psi = 1
    p = (0.3, -0.2, 0.1)
    L = l_tau(calc3, p, 1, calc3.reference)
    inv = tractor_metric_inverse(L)
    top, mid, bot = s2t_slots(inv)
    tau_hat = calc3.tau_hat_jet(p, 1)
    for a in range(3):
        t_a = (tau_hat * mid[a] * 0.5).value
        assert t_a == pytest.approx(-p[a] / 2, abs=1e-11)
    assert (tau_hat * bot).value == pytest.approx(1.0, abs=1e-10)


# -- metricity residual -------------------------------------------------------------


def test_metricity_residual_zero_for_levi_civita(calc3, rng):
    pts = calc3.geom.interior_points(3, rng)
    rep = metricity_residual(calc3, None, pts)
    assert rep["residual"] < 1e-12


def test_metricity_residual_positive_for_modifications(calc3, rng):
    pts = calc3.geom.interior_points(3, rng)
    coeffs = rng.uniform(-0.5, 0.5, (3, 4))
    rep = metricity_residual(calc3, linear_upsilon(3, coeffs), pts)
    assert rep["residual"] > 0.01

    def rho_ups(point, order):
        geom = calc3.geom
        rho = geom.rho_jet(point, order + 1)
        denom = rho.truncate(order) * 2.0
        return np.array([rho.partial(a) / denom for a in range(3)], dtype=object)

    rep2 = metricity_residual(calc3, rho_ups, pts)
    assert rep2["residual"] > 0.01


# -- tractor curvature ----------------------------------------------------------------


def test_flat_and_klein_curvature_vanish(flat3, calc3):
    calcf = TractorCalculus(flat3)
    p = (0.2, 0.1, -0.1)
    assert max_value(tractor_curvature(calcf, calcf.reference, p, 0).components) < 1e-12
    assert max_value(tractor_curvature(calc3, calc3.reference, p, 0).components) < 1e-8
    assert (
        max_value(
            tractor_curvature(calc3, calc3.levi_civita_splitting, p, 0).components
        )
        < 1e-8
    )


def test_af2_curvature_consistency(calc_af2):
    p = (0.4, 0.2, -0.3, 0.1)
    for s in (calc_af2.reference, calc_af2.levi_civita_splitting):
        kap = tractor_curvature(calc_af2, s, p, 0)
        blocks = standard_curvature_blocks(calc_af2, s, p, 0)
        gap = max(
            abs((kap.components[idx] - blocks[idx]).value)
            for idx in np.ndindex(4, 4, 5, 5)
        )
        assert gap < 1e-7


def test_curvature_by_repeated_derivative(calc_af2, rng):
    # the matrix commutator route coincides with differentiating twice
    p = (0.4, 0.2, -0.3, 0.1)
    s = polynomial_tractor_section(calc_af2, p, 3, rng)
    Ds = std_tractor_derivative(calc_af2, s, p)
    DDs = std_tractor_derivative(calc_af2, Ds, p)
    kap = tractor_curvature(calc_af2, calc_af2.reference, p, 1)
    gap = 0.0
    for a in range(4):
        for b in range(4):
            for i in range(5):
                acc = DDs.components[a, b, i] - DDs.components[b, a, i]
                kap_s = None
                for j in range(5):
                    term = kap.components[a, b, i, j] * s.components[j].truncate(1)
                    kap_s = term if kap_s is None else kap_s + term
                gap = max(gap, abs((acc - kap_s).value))
    assert gap < 1e-9


def test_metric_tractor_connection_properties(calc_af2, rng):
    p = (0.4, 0.2, -0.3, 0.1)
    tc = metricity_contorsion(calc_af2, calc_af2.reference)
    L = l_tau(calc_af2, p, 3, calc_af2.reference)
    DL = std_tractor_derivative(calc_af2, L, p, contorsion=tc)
    assert max_value(DL.components) < 1e-10
    kap = tc.curvature(p, 1)
    blocks = metric_tractor_curvature_blocks(calc_af2, p, 1)
    gap = max(
        abs((kap.components[idx] - blocks[idx]).value)
        for idx in np.ndindex(4, 4, 5, 5)
    )
    assert gap < 1e-12
    torsion = max(
        abs(kap.components[a, b, 1 + c, 0].value)
        for a in range(4) for b in range(4) for c in range(4)
    )
    assert torsion < 1e-13


def test_klein_contorsion_vanishes(calc3, rng):
    # Einstein: grad P = 0 so A = 0 identically
    tc = metricity_contorsion(calc3, calc3.reference)
    p = calc3.geom.interior_points(1, rng)[0]
    psi = tc.contorsion_matrices(p, 1)
    assert max_value(psi) < 1e-10
