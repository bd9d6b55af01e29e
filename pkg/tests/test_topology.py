import numpy as np
import pytest

from kerrchain.errors import GapClosingError, StabilityError
from kerrchain.model import (
    ChainParams,
    Profile,
    EffectiveQuadratic,
    homogeneous_effective,
)
from kerrchain.topology import (
    NU_UNKNOWN,
    bloch_matrix,
    build_nambu,
    extended_hermitian_check,
    greens_function,
    local_winding_profile,
    normalized_correlations,
    quadratic_residual,
    quadratic_steady_correlations,
    svd_analysis,
    winding_number,
    winding_number_quadrature,
    _det_bloch,
)


def chain(n=6, **kw):
    defaults = dict(N=n, delta_base=0.0, epsilon_base=0.0, phi=np.pi / 3,
                    kappa=1.0, N0=1, profile=Profile.HOMOGENEOUS)
    defaults.update(kw)
    return ChainParams(**defaults)


def brute_force_winding(delta_tilde, g, params, n_k=100_000):
    """Independent oracle: raw phase accumulation on a dense k-grid."""
    k = np.linspace(-np.pi, np.pi, n_k + 1)
    det = np.array([np.linalg.det(bloch_matrix(delta_tilde, g, params, kk)) for kk in k])
    phase = np.unwrap(np.angle(det))
    return (phase[-1] - phase[0]) / (2 * np.pi)


class TestNambu:
    def test_all_couplings_off(self):
        p = chain(J=0.0)
        eq = homogeneous_effective(0.0, 0.0, p.N)
        nb = build_nambu(eq, p)
        assert np.allclose(nb.H, -0.5j * p.kappa * np.eye(2 * p.N))

    def test_linear_chain_blocks(self):
        p = chain()
        eq = homogeneous_effective(0.3, 0.0, p.N)
        nb = build_nambu(eq, p)
        n = p.N
        assert np.all(nb.K == 0)
        assert np.all(nb.H[:n, n:] == 0)
        assert np.all(nb.H[n:, :n] == 0)

    def test_block_structure(self):
        p = chain(n=4)
        rng = np.random.default_rng(0)
        eq = EffectiveQuadratic(
            delta_tilde=rng.normal(size=4),
            g=rng.normal(size=4) + 1j * rng.normal(size=4),
        )
        nb = build_nambu(eq, p)
        n = 4
        loss = 0.5j * np.eye(n)
        assert np.allclose(nb.H[:n, :n], nb.D - loss)
        assert np.allclose(nb.H[n:, n:], -nb.D.conj() - loss)
        assert np.allclose(nb.H[:n, n:], nb.K)
        assert np.allclose(nb.H[n:, :n], -nb.K.conj())
        assert np.allclose(np.diagonal(nb.K), 2.0 * eq.g)


class TestBloch:
    def test_lossy_diagonal_when_g_zero(self):
        p = chain()
        for k in (-2.0, 0.0, 1.3):
            h = bloch_matrix(0.7, 0.0, p, k)
            assert h[0, 1] == 0 and h[1, 0] == 0
            assert h[0, 0].imag == pytest.approx(-0.5)
            assert h[1, 1].imag == pytest.approx(-0.5)

    def test_reciprocal_dispersion_at_phi_zero(self):
        p = chain(phi=0.0)
        for k in (0.3, 1.1):
            hp = bloch_matrix(0.4, 0.2 + 0.1j, p, k)
            hm = bloch_matrix(0.4, 0.2 + 0.1j, p, -k)
            assert np.allclose(np.diagonal(hp), np.diagonal(hm))

    def test_det_helper_matches_direct_determinant(self):
        p = chain()
        ks = np.linspace(-np.pi, np.pi, 7)
        det, ddet = _det_bloch(-0.8, 0.3 - 0.2j, p, ks)
        for i, k in enumerate(ks):
            direct = np.linalg.det(bloch_matrix(-0.8, 0.3 - 0.2j, p, k))
            assert det[i] == pytest.approx(direct, rel=1e-12)
        # analytic k-derivative against central differences
        h = 1e-6
        dp, _ = _det_bloch(-0.8, 0.3 - 0.2j, p, ks + h)
        dm, _ = _det_bloch(-0.8, 0.3 - 0.2j, p, ks - h)
        assert np.allclose(ddet, (dp - dm) / (2 * h), rtol=1e-6, atol=1e-8)


class TestWinding:
    def test_zero_without_pairing(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            p = chain(phi=rng.uniform(-np.pi, np.pi), kappa=rng.uniform(0.1, 5.0),
                      J=rng.uniform(0.1, 3.0))
            assert winding_number(rng.normal(), 0.0, p) == 0

    def test_loss_dominated_limit(self):
        p = chain(kappa=100.0)
        assert winding_number(0.0, 1.0, p) == 0
        assert brute_force_winding(0.0, 1.0, p) == pytest.approx(0.0, abs=1e-6)

    def test_amplifying_window_is_plus_one(self):
        p = chain()
        assert winding_number(-1.5, 0.8, p) == 1
        assert brute_force_winding(-1.5, 0.8, p) == pytest.approx(1.0, abs=1e-6)

    def test_two_methods_agree_on_random_sets(self):
        rng = np.random.default_rng(7)
        checked = 0
        while checked < 100:
            p = chain(phi=rng.uniform(-np.pi, np.pi), kappa=rng.uniform(0.2, 3.0))
            dt = rng.normal(scale=2.0)
            g = rng.normal(scale=1.0) + 1j * rng.normal(scale=1.0)
            try:
                nu = winding_number(dt, g, p)
            except GapClosingError:
                continue
            quad = winding_number_quadrature(dt, g, p, n_k=1 << 14)
            assert abs(quad - nu) < 1e-3
            checked += 1

    def test_continuity_near_g_zero(self):
        p = chain()
        for g in (1e-6, 1e-4, 1e-3 + 1e-3j):
            assert winding_number(0.4, g, p) == 0

    def test_gap_closing_raises(self):
        # phi=0 makes det H(k) real; a sign change pins it through the origin
        p = chain(phi=0.0)
        with pytest.raises(GapClosingError):
            winding_number(-1.0, 0.6, p)

    def test_local_profile_marks_unknown_sites(self):
        p = chain(n=3, phi=0.0)
        eq = EffectiveQuadratic(
            delta_tilde=np.array([5.0, -1.0, 5.0]),
            g=np.array([0.0, 0.6, 0.0], dtype=complex),
        )
        nu = local_winding_profile(eq, p)
        assert nu[0] == 0 and nu[2] == 0
        assert nu[1] == NU_UNKNOWN


class TestGreensFunction:
    def test_scalar_inverse(self):
        p = chain(J=0.0, kappa=2.0)
        eq = homogeneous_effective(0.0, 0.0, p.N)
        nb = build_nambu(eq, p)
        g0 = greens_function(nb, 0.0)
        # -H^-1 = -(2i/kappa) * identity for H = -i kappa/2
        assert np.allclose(g0, -(2j / 2.0) * np.eye(2 * p.N))
        sv = svd_analysis(nb)
        assert sv.frobenius_G == pytest.approx((2 / 2.0) * np.sqrt(2 * p.N))

    def test_inverse_residual(self):
        rng = np.random.default_rng(3)
        p = chain(n=8, phi=0.7, kappa=0.9)
        eq = EffectiveQuadratic(
            delta_tilde=rng.normal(size=8),
            g=0.3 * (rng.normal(size=8) + 1j * rng.normal(size=8)),
        )
        nb = build_nambu(eq, p)
        g0 = greens_function(nb, 0.0)
        assert np.max(np.abs(nb.H @ g0 + np.eye(16))) < 1e-8

    def test_rightward_amplification_in_topological_phase(self):
        p = chain(n=20)
        eq = homogeneous_effective(-1.5, 0.8, 20)
        g0 = np.abs(greens_function(build_nambu(eq, p), 0.0))
        col = g0[:20, 2]
        assert col[16] > 10 * col[3]


class TestSVD:
    def test_uniform_singular_values(self):
        p = chain(J=0.0, kappa=3.0)
        nb = build_nambu(homogeneous_effective(0.0, 0.0, p.N), p)
        sv = svd_analysis(nb)
        assert np.allclose(sv.singular_values, 1.5)
        assert sv.s_min == pytest.approx(1.5)

    def test_frobenius_consistency_with_direct_inverse(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n = rng.integers(3, 9)
            p = chain(n=int(n), phi=rng.uniform(-np.pi, np.pi),
                      kappa=rng.uniform(0.3, 2.0))
            eq = EffectiveQuadratic(
                delta_tilde=rng.normal(size=n, scale=1.5),
                g=0.5 * (rng.normal(size=n) + 1j * rng.normal(size=n)),
            )
            nb = build_nambu(eq, p)
            sv = svd_analysis(nb)
            direct = np.linalg.norm(greens_function(nb, 0.0), "fro")
            assert sv.frobenius_G == pytest.approx(direct, rel=1e-6)

    def test_topological_singular_value_collapses(self):
        sv = svd_analysis(build_nambu(homogeneous_effective(-1.5, 0.8, 40), chain(n=40)))
        assert sv.s_min < 1e-4
        assert sv.gap_ratio > 100
        assert sv.frobenius_G * sv.s_min == pytest.approx(1.0, abs=0.5)


class TestExtendedHermitian:
    def test_pairing_defect_small(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            n = 6
            p = chain(n=n, phi=rng.uniform(-np.pi, np.pi), kappa=rng.uniform(0.2, 2.0))
            eq = EffectiveQuadratic(
                delta_tilde=rng.normal(size=n, scale=2.0),
                g=rng.normal(size=n) + 1j * rng.normal(size=n),
            )
            nb = build_nambu(eq, p)
            defect = extended_hermitian_check(nb)["max_pairing_defect"]
            assert defect < 1e-9 * np.linalg.norm(nb.H, 2)

    def test_uniform_loss_spectrum(self):
        p = chain(J=0.0, kappa=1.0)
        nb = build_nambu(homogeneous_effective(0.0, 0.0, p.N), p)
        h = nb.H
        ext = np.block([[np.zeros_like(h), h], [h.conj().T, np.zeros_like(h)]])
        evals = np.linalg.eigvalsh(ext)
        assert np.allclose(np.abs(evals), 0.5)

    def test_chiral_symmetry_exact(self):
        p = chain(n=4)
        nb = build_nambu(homogeneous_effective(0.2, 0.1j, 4), p)
        h = nb.H
        m = h.shape[0]
        ext = np.block([[np.zeros_like(h), h], [h.conj().T, np.zeros_like(h)]])
        s = np.diag(np.concatenate([np.ones(m), -np.ones(m)]))
        assert np.max(np.abs(s @ ext @ s + ext)) == 0.0


class TestQuadraticModel:
    def test_pure_loss_builds_nothing(self):
        p = chain(n=8, phi=0.4)
        eq = homogeneous_effective(0.7, 0.0, 8)
        G, F = quadratic_steady_correlations(eq, p)
        assert np.max(np.abs(G)) < 1e-12
        assert np.max(np.abs(F)) < 1e-12

    def test_fixed_point_residual(self):
        rng = np.random.default_rng(9)
        p = chain(n=8)
        eq = EffectiveQuadratic(
            delta_tilde=rng.normal(size=8, scale=1.0) - 1.0,
            g=0.2 * (rng.normal(size=8) + 1j * rng.normal(size=8)),
        )
        G, F = quadratic_steady_correlations(eq, p)
        scale = max(np.max(np.abs(G)), np.max(np.abs(F)), 1.0)
        assert quadratic_residual(G, F, eq, p) < 1e-8 * scale
        # solution structure
        assert np.max(np.abs(G - G.conj().T)) < 1e-10 * scale
        assert np.max(np.abs(F - F.T)) < 1e-10 * scale
        assert np.min(np.real(np.diag(G))) > -1e-10

    def test_instability_is_reported(self):
        # strong pairing with weak loss pushes eigenvalues above the real axis
        p = chain(n=6, kappa=0.01)
        eq = homogeneous_effective(0.0, 2.0, 6)
        with pytest.raises(StabilityError, match="eigenvalue"):
            quadratic_steady_correlations(eq, p)


class TestNormalizedCorrelations:
    def test_unit_diagonal(self):
        rng = np.random.default_rng(1)
        g = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        g = g @ g.conj().T  # PSD, positive diagonal
        gbar = normalized_correlations(g)
        assert np.allclose(np.diagonal(gbar), 1.0)
        assert np.all(np.abs(gbar) <= 1.0 + 1e-12)

    def test_zero_diagonal_marks_nan(self):
        g = np.zeros((3, 3), dtype=complex)
        g[1, 1] = 2.0
        gbar = normalized_correlations(g)
        assert np.isnan(gbar[0, 0].real)
        assert gbar[1, 1] == pytest.approx(1.0)
