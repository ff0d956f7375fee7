import numpy as np
import pytest
from scipy.integrate import quad

from eringen_lab import _backend
from eringen_lab.assembly import (
    OuterDomainMode,
    StiffnessProfile,
    assemble_heterogeneous,
    assemble_mixture,
    assemble_nonlocal_stiffness,
    minimal_truncation,
    nonlocal_strain,
    outer_rule,
    parse_mode,
    parse_profile,
    strain_matrix,
    tail_bound,
)
from eringen_lab.errors import InvalidArgument, TruncationTooSmall, UnsupportedOperation
from eringen_lab.kernels import KernelSpec, double_primitive, eval_kernel, riesz_constant
from eringen_lab.linalg import cholesky
from eringen_lab.mesh_fem import assemble_mass_l2, assemble_stiffness_local, build_space, eval_fem

ALPHA = 2 / 3
SPECS_P1 = [KernelSpec.cubic(), KernelSpec.linear(), KernelSpec.riesz(ALPHA), KernelSpec.riesz_half(ALPHA)]


def _reference_p1(space, spec):
    """Element-pair sum written out entry by entry."""
    x = space.mesh.nodes
    h = space.h
    n = space.n_dofs
    K = np.zeros((n, n))
    for k in range(n):
        for m in range(n):
            for ek, sk in ((k, 1 / h), (k + 1, -1 / h)):
                for em, sm in ((m, 1 / h), (m + 1, -1 / h)):
                    K[k, m] += sk * sm * double_primitive(spec, x[ek], x[ek + 1], x[em], x[em + 1])
    return K


@pytest.mark.parametrize("spec", SPECS_P1, ids=str)
def test_p1_matches_entrywise_reference(backend, spec):
    s = build_space(9, 1)
    K = assemble_nonlocal_stiffness(s, spec)
    np.testing.assert_allclose(K, _reference_p1(s, spec), rtol=1e-12, atol=1e-12)
    np.testing.assert_array_equal(K, K.T)


@pytest.mark.parametrize("N", [2, 8, 64, 256])
def test_linear_kernel_is_twice_mass(backend, N):
    s = build_space(N, 1)
    K = assemble_nonlocal_stiffness(s, KernelSpec.linear())
    np.testing.assert_allclose(K, 2 * assemble_mass_l2(s), rtol=0, atol=1e-12)


def test_p2_linear_kernel_is_twice_mass():
    s = build_space(16, 2)
    K = assemble_nonlocal_stiffness(s, KernelSpec.linear())
    np.testing.assert_allclose(K, 2 * assemble_mass_l2(s), rtol=0, atol=1e-12)


def test_p2_cubic_against_adaptive_quadrature():
    s = build_space(3, 2)
    K = assemble_nonlocal_stiffness(s, KernelSpec.cubic())
    eye = np.eye(s.n_dofs)
    nodes = s.mesh.nodes
    hh = 1e-6

    def d(k, x):
        return (eval_fem(s, eye[k], min(x + hh, 1)) - eval_fem(s, eye[k], max(x - hh, 0))) / (2 * hh)

    def entry(k, m):
        def inner(x):
            pts = sorted(set(nodes[1:-1]) | ({x} if 0 < x < 1 else set()))
            f = lambda y: eval_kernel(KernelSpec.cubic(), abs(x - y)) * d(m, y)  # noqa: E731
            return quad(f, 0, 1, points=pts, epsabs=1e-12)[0] * d(k, x)

        return quad(inner, 0, 1, points=nodes[1:-1], epsabs=1e-11)[0]

    for k, m in [(0, 0), (0, 1), (1, 4), (2, 2), (3, 4)]:
        assert K[k, m] == pytest.approx(entry(k, m), abs=1e-6)


def test_riesz_p2_unsupported():
    with pytest.raises(UnsupportedOperation):
        assemble_nonlocal_stiffness(build_space(4, 2), KernelSpec.riesz(0.5))


def test_stiffness_constant_scaling():
    s = build_space(12, 1)
    for spec in SPECS_P1:
        np.testing.assert_array_equal(assemble_nonlocal_stiffness(s, spec, 2.0), 2 * assemble_nonlocal_stiffness(s, spec))
    for bad in (0.0, -1.0, np.ones(2)):
        with pytest.raises(InvalidArgument):
            assemble_nonlocal_stiffness(s, KernelSpec.linear(), bad)


@pytest.mark.parametrize("p", [1, 2])
@pytest.mark.parametrize("N", [4, 16, 64, 256, 512])
def test_assembled_matrices_pass_cholesky(N, p):
    s = build_space(N, p)
    specs = [KernelSpec.cubic(), KernelSpec.linear()] + ([KernelSpec.riesz(ALPHA), KernelSpec.riesz(0.2)] if p == 1 else [])
    for spec in specs:
        K = assemble_nonlocal_stiffness(s, spec)
        np.testing.assert_array_equal(K, K.T)
        cholesky(K)


def test_mixture():
    s = build_space(16, 1)
    M0, M1 = assemble_mass_l2(s), assemble_stiffness_local(s)
    lin = KernelSpec.linear()
    np.testing.assert_array_equal(assemble_mixture(s, lin, 1.0), M1)
    np.testing.assert_allclose(assemble_mixture(s, lin, 0.5), 0.5 * M1 + M0, rtol=0, atol=1e-12)
    K = assemble_nonlocal_stiffness(s, KernelSpec.riesz(ALPHA))
    diff = assemble_mixture(s, KernelSpec.riesz(ALPHA), 0.7) - assemble_mixture(s, KernelSpec.riesz(ALPHA), 0.5)
    np.testing.assert_allclose(diff, 0.2 * (M1 - K), rtol=0, atol=1e-12)
    for bad in (0.0, 1.2, -0.1):
        with pytest.raises(InvalidArgument):
            assemble_mixture(s, lin, bad)
    with pytest.raises(InvalidArgument):
        assemble_mixture(s, lin, 0.5, StiffnessProfile((0.5,), (1.0, 2.0)))


# ---------------------------------------------------------------- profiles and modes


def test_profile_parsing():
    p = parse_profile("breakpoints=0.25,0.5; values=1,2,3; outside=0.5")
    assert p.breakpoints == (0.25, 0.5) and p.values == (1.0, 2.0, 3.0) and p.outside_value == 0.5
    assert p.c_lower == 0.5 and p.c_upper == 3.0
    np.testing.assert_array_equal(p.value_at([-1, 0.1, 0.25, 0.4, 0.9, 2]), [0.5, 1, 2, 2, 3, 0.5])
    assert parse_profile(p.to_text()) == p
    assert parse_profile("2") == StiffnessProfile.constant(2.0)
    for bad in ["values=1,2", "breakpoints=0.6,0.5; values=1,2,3", "values=-1", "foo=1", "breakpoints 0.5"]:
        with pytest.raises(InvalidArgument):
            parse_profile(bad)


def test_mode_parsing():
    assert parse_mode("domain") == OuterDomainMode.domain_only()
    assert parse_mode("full") == OuterDomainMode.full_line()
    m = parse_mode("full:L=40,tol=1e-9")
    assert m.truncation == 40.0 and m.tail_tol == 1e-9
    for bad in ["domain:L=1", "half", "full:X=2", "full:L=-1"]:
        with pytest.raises(InvalidArgument):
            parse_mode(bad)


# ---------------------------------------------------------------- half-order strains


def _strain_oracle(space, k, alpha, z):
    """∫ Ã_{α/2}(|z - x|) e_k'(x) dx; a singular endpoint goes into an algebraic weight."""
    beta = alpha / 2
    scale = 1 / riesz_constant(beta)
    x = space.mesh.nodes
    e = beta - 1
    total = 0.0
    for a, b, slope in ((x[k], x[k + 1], 1 / space.h), (x[k + 1], x[k + 2], -1 / space.h)):
        if a < z < b:
            val = quad(lambda t: 1.0, a, z, weight="alg", wvar=(0, e))[0]
            val += quad(lambda t: 1.0, z, b, weight="alg", wvar=(e, 0))[0]
        elif z == a:
            val = quad(lambda t: 1.0, a, b, weight="alg", wvar=(e, 0))[0]
        elif z == b:
            val = quad(lambda t: 1.0, a, b, weight="alg", wvar=(0, e))[0]
        else:
            val = quad(lambda t: abs(t - z) ** e, a, b, epsabs=1e-14)[0]
        total += slope * scale * val
    return total


def test_strain_matches_quadrature(backend):
    s = build_space(6, 1)
    for z in (-0.7, 0.0, 0.1, 1 / 6, 0.4, 0.5, 0.93, 1.0, 2.5):
        S = strain_matrix(s, ALPHA, np.array([z]))[:, 0]
        for k in range(s.n_dofs):
            assert S[k] == pytest.approx(_strain_oracle(s, k, ALPHA, z), rel=1e-9, abs=1e-12)


def test_strain_basics():
    s = build_space(2, 1)
    assert nonlocal_strain(s, [0.0], ALPHA, 0.3) == 0.0
    assert nonlocal_strain(s, [1.0], ALPHA, 0.5) == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_array_equal(nonlocal_strain(build_space(8, 1), np.zeros(7), ALPHA, np.linspace(-2, 3, 9)), 0.0)
    with pytest.raises(UnsupportedOperation):
        strain_matrix(build_space(4, 2), ALPHA, 0.5)
    with pytest.raises(InvalidArgument):
        nonlocal_strain(s, [1.0, 2.0], ALPHA, 0.5)


def test_strain_is_continuous_at_nodes():
    # Hölder continuous with exponent α/2 at mesh nodes
    s = build_space(8, 1)
    u = np.sin(np.arange(1, 8))
    for x in s.mesh.nodes:
        mid = nonlocal_strain(s, u, ALPHA, x)
        jumps = [max(abs(nonlocal_strain(s, u, ALPHA, x + d) - mid), abs(nonlocal_strain(s, u, ALPHA, x - d) - mid)) for d in (1e-6, 1e-12)]
        assert jumps[1] < 1e-2
        assert jumps[1] <= jumps[0] * 1e-6 ** (ALPHA / 2) * 1.5


def test_strain_far_field_decay():
    s = build_space(8, 1)
    u = np.random.default_rng(3).uniform(0.5, 1.5, s.n_dofs)
    z = np.array([2.0, 4.0, 8.0])
    vals = np.abs(nonlocal_strain(s, u, ALPHA, 0.5 + z))
    # envelope from the defining kernel: |s(z)| <= C |z|^(α/2 - 1), C fixed at z = 2
    C = vals[0] / z[0] ** (ALPHA / 2 - 1)
    assert np.all(vals <= C * z ** (ALPHA / 2 - 1) * (1 + 1e-12))
    # FE functions vanish at both ends, so ∫ u' = 0 and one more power of |z| is gained
    ratios = vals[1:] / vals[:-1]
    np.testing.assert_allclose(ratios, 2.0 ** (ALPHA / 2 - 2), rtol=0.15)


def test_strain_envelope_bound_holds():
    s = build_space(16, 1)
    z = np.concatenate([-np.geomspace(0.01, 100, 30), 1 + np.geomspace(0.01, 100, 30)])
    S = np.abs(strain_matrix(s, ALPHA, z))
    dist = np.where(z < 0, -z, z - 1)
    from eringen_lab.assembly import strain_envelope

    assert np.all(S <= strain_envelope(s, ALPHA) * dist ** (ALPHA / 2 - 2))


# ---------------------------------------------------------------- heterogeneous form


@pytest.mark.parametrize("N", [16, 64])
def test_heterogeneous_full_line_matches_riesz(backend, N):
    s = build_space(N, 1)
    Kh = assemble_heterogeneous(s, ALPHA, 1.0, OuterDomainMode.full_line())
    Kr = assemble_nonlocal_stiffness(s, KernelSpec.riesz(ALPHA))
    assert np.linalg.norm(Kh - Kr) / np.linalg.norm(Kr) < 1e-6


def test_heterogeneous_linear_in_c():
    s = build_space(16, 1)
    mode = OuterDomainMode.full_line(truncation=200.0)
    K1 = assemble_heterogeneous(s, ALPHA, 1.0, mode)
    K2 = assemble_heterogeneous(s, ALPHA, 2.0, mode)
    np.testing.assert_allclose(K2, 2 * K1, rtol=1e-14, atol=1e-15 * np.abs(K1).max())


def test_heterogeneous_truncation_convergence():
    s = build_space(16, 1)
    tol = 1e-8
    L = minimal_truncation(s, ALPHA, 1.0, tol)
    assert tail_bound(s, ALPHA, 1.0, L) == pytest.approx(tol, rel=1e-12)
    K1 = assemble_heterogeneous(s, ALPHA, 1.0, OuterDomainMode.full_line(L, tol))
    K2 = assemble_heterogeneous(s, ALPHA, 1.0, OuterDomainMode.full_line(2 * L, tol))
    assert np.abs(K1 - K2).max() < tol


def test_truncation_too_small_reports_minimum():
    s = build_space(16, 1)
    with pytest.raises(TruncationTooSmall) as info:
        assemble_heterogeneous(s, ALPHA, 1.0, OuterDomainMode.full_line(1.0))
    assert info.value.minimal_length == pytest.approx(minimal_truncation(s, ALPHA, 1.0, 1e-8))


def test_domain_only_against_quadrature():
    s = build_space(4, 1)
    prof = StiffnessProfile((0.3,), (1.0, 2.5), 7.0)
    K = assemble_heterogeneous(s, ALPHA, prof, OuterDomainMode.domain_only())
    pts = [0.25, 0.3, 0.5, 0.75]

    def integrand(z, k, m):
        S = strain_matrix(s, ALPHA, np.array([z]))[:, 0]
        return prof.value_at(z) * S[k] * S[m]

    for k, m in [(0, 0), (0, 2), (1, 1)]:
        ref = quad(integrand, 0, 1, args=(k, m), points=pts, limit=400, epsabs=1e-13)[0]
        assert K[k, m] == pytest.approx(ref, rel=1e-8)
    np.testing.assert_array_equal(K, K.T)


def test_outer_rule_covers_breakpoints():
    s = build_space(8, 1)
    prof = StiffnessProfile((0.3,), (1.0, 2.0), 1.0)
    z, w = outer_rule(s, prof, OuterDomainMode.domain_only(), ALPHA)
    assert np.all((z > 0) & (z < 1)) and w.sum() == pytest.approx(1.0, rel=1e-14)
    z, w = outer_rule(s, prof, OuterDomainMode.full_line(400.0), ALPHA)
    assert w.sum() == pytest.approx(801.0, rel=1e-13)
    assert np.all(np.diff(z) > 0)


def test_backends_listed():
    assert "python" in _backend.backends()
    assert _backend.NAME in _backend.backends()
