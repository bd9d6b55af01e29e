import numpy as np
import pytest

from kerrchain.errors import DimensionError, ParameterError
from kerrchain.model import (
    ChainParams,
    Gauge,
    Profile,
    build_profiles,
    default_border_size,
    effective_quadratic,
    gauge_transform,
    transform_state_gauge,
)


def make_params(**kw):
    defaults = dict(N=40, delta_base=0.5, epsilon_base=20.0, phi=np.pi / 3,
                    U=-2e-4, kappa=1.0, N0=5, profile=Profile.TANH_BORDER)
    defaults.update(kw)
    return ChainParams(**defaults)


class TestValidation:
    def test_rejects_bad_sizes(self):
        with pytest.raises(ParameterError):
            make_params(N=0)
        with pytest.raises(ParameterError):
            make_params(kappa=-0.1)
        with pytest.raises(ParameterError):
            make_params(N0=0)

    def test_tanh_border_needs_room(self):
        with pytest.raises(ParameterError):
            make_params(N=10, N0=5)
        # homogeneous profile has no such restriction
        make_params(N=10, N0=5, profile=Profile.HOMOGENEOUS)

    def test_default_border_size(self):
        assert default_border_size(40) == 5
        assert default_border_size(80) == 10
        assert default_border_size(10) == 2
        assert make_params(N0=None).N0 == 5

    def test_bulk_sites(self):
        p = make_params()
        assert p.bulk_sites[0] == 6
        assert p.bulk_sites[-1] == 34


class TestProfiles:
    def test_homogeneous_constant(self):
        prof = build_profiles(make_params(profile=Profile.HOMOGENEOUS))
        assert np.all(prof.epsilon == 20.0)
        assert np.all(prof.delta == 0.5)

    def test_tanh_bulk_saturates(self):
        prof = build_profiles(make_params(epsilon_base=40.0))
        assert prof.epsilon[19] == pytest.approx(40.0 * np.tanh(4.0))
        assert prof.epsilon[19] == pytest.approx(39.9732, abs=1e-3)

    def test_tanh_edges_and_mirror(self):
        prof = build_profiles(make_params(epsilon_base=40.0))
        assert prof.epsilon[0] == pytest.approx(40.0 * np.tanh(0.2))
        assert prof.epsilon[0] == pytest.approx(7.895, abs=1e-3)
        assert prof.epsilon[39] == prof.epsilon[0]

    @pytest.mark.parametrize("n,n0", [(40, 5), (41, 5), (12, 3), (7, 2), (100, 13)])
    def test_mirror_symmetry(self, n, n0):
        prof = build_profiles(make_params(N=n, N0=n0))
        assert np.allclose(prof.epsilon, prof.epsilon[::-1])
        assert np.allclose(prof.delta, prof.delta[::-1])

    def test_amplitude_bounds(self):
        prof = build_profiles(make_params(epsilon_base=40.0))
        assert np.all(prof.epsilon >= 0)
        assert np.all(prof.epsilon <= 40.0)

    def test_detuning_uses_tanh_squared(self):
        prof = build_profiles(make_params(delta_base=0.5))
        assert prof.delta[0] == pytest.approx(0.5 * np.tanh(0.2) ** 2)

    def test_drive_phases_by_gauge(self):
        hop = build_profiles(make_params())
        assert np.all(hop.psi == 0.0)
        drv = build_profiles(make_params(gauge=Gauge.DRIVE_PHASE))
        assert np.allclose(drv.psi, np.arange(1, 41) * np.pi / 3)


class TestGaugeTransform:
    def test_drive_to_hopping(self):
        p = make_params(gauge=Gauge.DRIVE_PHASE)
        prof = build_profiles(p)
        prof2, p2 = gauge_transform(prof, p, Gauge.HOPPING_PHASE)
        assert p2.gauge is Gauge.HOPPING_PHASE
        assert p2.phi == p.phi
        assert np.all(prof2.psi == 0.0)
        assert np.allclose(prof2.epsilon, prof.epsilon)

    def test_identity_when_same_gauge(self):
        p = make_params()
        prof = build_profiles(p)
        prof2, p2 = gauge_transform(prof, p, Gauge.HOPPING_PHASE)
        assert prof2 is prof and p2 is p

    def test_round_trip(self):
        p = make_params(gauge=Gauge.DRIVE_PHASE)
        prof = build_profiles(p)
        prof2, p2 = gauge_transform(prof, p, Gauge.HOPPING_PHASE)
        prof3, p3 = gauge_transform(prof2, p2, Gauge.DRIVE_PHASE)
        assert np.allclose(prof3.psi, prof.psi)
        assert np.allclose(prof3.epsilon, prof.epsilon)
        assert p3.gauge is Gauge.DRIVE_PHASE

    def test_state_transform_preserves_moduli(self):
        rng = np.random.default_rng(7)
        n = 12
        alpha = rng.normal(size=n) + 1j * rng.normal(size=n)
        G = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        G = G + G.conj().T
        F = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        F = F + F.T
        theta = np.arange(1, n + 1) * 0.7
        a2, G2, F2 = transform_state_gauge(alpha, G, F, theta)
        assert np.allclose(np.abs(a2), np.abs(alpha))
        assert np.allclose(np.abs(G2), np.abs(G))
        assert np.allclose(np.abs(F2), np.abs(F))
        assert np.allclose(np.diagonal(G2), np.diagonal(G))


class TestEffectiveQuadratic:
    def test_zero_mean_field(self):
        p = make_params()
        eq = effective_quadratic(p, np.zeros(40, dtype=complex))
        prof = build_profiles(p)
        assert np.allclose(eq.delta_tilde, prof.delta + p.U)
        assert np.all(eq.g == 0)

    def test_linear_chain(self):
        p = make_params(U=0.0)
        alpha = np.full(40, 3.0 - 2.0j)
        eq = effective_quadratic(p, alpha)
        assert np.allclose(eq.delta_tilde, build_profiles(p).delta)
        assert np.all(eq.g == 0)

    def test_direct_formula(self):
        p = make_params(U=-2e-4)
        alpha = np.full(40, 100.0 + 0.0j)
        eq = effective_quadratic(p, alpha)
        prof = build_profiles(p)
        assert np.allclose(eq.delta_tilde, prof.delta - 8.0 + p.U)
        assert np.allclose(eq.g, -2.0)

    def test_pointwise_local(self):
        p = make_params()
        rng = np.random.default_rng(3)
        alpha = rng.normal(size=40) + 1j * rng.normal(size=40)
        base = effective_quadratic(p, alpha)
        alpha2 = alpha.copy()
        alpha2[17] += 1.0
        bumped = effective_quadratic(p, alpha2)
        changed = np.flatnonzero(~np.isclose(base.delta_tilde, bumped.delta_tilde))
        assert list(changed) == [17]
        changed_g = np.flatnonzero(~np.isclose(base.g, bumped.g))
        assert list(changed_g) == [17]

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            effective_quadratic(make_params(), np.zeros(39, dtype=complex))
