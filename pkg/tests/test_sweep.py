import math

import numpy as np
import pytest

from kerrchain.dynamics import Outcome
from kerrchain.errors import ResolutionError
from kerrchain.model import ChainParams, Profile
from kerrchain.sweep import (
    Phase,
    PhasePoint,
    classify_phase,
    cpu_workers,
    critical_drive_scan,
    density_split,
    phase_diagram,
    phase_point,
    winding_density_window,
)
from kerrchain.topology import winding_number
from kerrchain.errors import GapClosingError


def paper_chain(**kw):
    defaults = dict(N=40, delta_base=0.5, epsilon_base=40.0, phi=np.pi / 3,
                    U=-2e-4, kappa=1.0, N0=5, profile=Profile.TANH_BORDER)
    defaults.update(kw)
    return ChainParams(**defaults)


def fake_point(nu, mean_density, outcome=Outcome.CONVERGED, n=40):
    profile = np.zeros(n)
    return PhasePoint(
        delta=0.5, epsilon=40.0, outcome=outcome, mean_density=mean_density,
        max_fluct=0.0, nu_profile=np.asarray(nu), phase=Phase.UNSTABLE,
        density_profile=profile, fluct_profile=profile, alpha_abs=profile,
    )


class TestDensityWindow:
    def test_window_matches_direct_winding(self):
        # the analytic window edges must agree with the winding number
        # computed from the Bloch determinant at the self-consistent bulk point
        p = paper_chain()
        lo, hi = winding_density_window(0.5, p)
        for x, expected in [(0.8 * lo, 0), (1.1 * lo, 1), (0.9 * hi, 1), (1.2 * hi, 0)]:
            dt = 0.5 + p.U + 4 * p.U * x
            g = p.U * x  # |g| = |U| x for any mean-field phase
            try:
                nu = winding_number(dt, g, p)
            except GapClosingError:
                continue
            assert nu == expected, f"x={x}"

    def test_no_window_for_linear_chain(self):
        p = paper_chain(U=0.0)
        assert winding_density_window(0.5, p) is None
        assert density_split(0.5, p) == math.inf

    def test_split_between_phase_densities(self):
        p = paper_chain()
        split = density_split(0.5, p)
        assert 200 < split < 4000  # between phase-I (~150) and phase-III (~4900)


class TestClassification:
    def test_unconverged_is_unstable(self):
        pt = fake_point(np.zeros(40, dtype=int), 100.0, outcome=Outcome.OSCILLATING)
        assert classify_phase(pt, paper_chain()) == Phase.UNSTABLE

    def test_bulk_winding_forces_coexistence(self):
        nu = np.zeros(40, dtype=int)
        nu[15:20] = 1
        assert classify_phase(fake_point(nu, 1e6), paper_chain()) == Phase.II

    def test_edge_winding_does_not_count(self):
        nu = np.zeros(40, dtype=int)
        nu[2] = 1   # inside the border, outside the bulk
        nu[38] = 1
        assert classify_phase(fake_point(nu, 10.0), paper_chain()) == Phase.I

    def test_density_split_decides_i_vs_iii(self):
        p = paper_chain()
        zeros = np.zeros(40, dtype=int)
        assert classify_phase(fake_point(zeros, 150.0), p) == Phase.I
        assert classify_phase(fake_point(zeros, 4900.0), p) == Phase.III


class TestPhaseDiagram:
    def test_single_cell_equals_phase_point(self):
        p = paper_chain(N=4, N0=1, U=0.0, epsilon_base=1.0)
        lone = phase_point(0.3, 2.0, p)
        diagram = phase_diagram([0.3], [2.0], p, workers=1)
        pt = diagram.points[0][0]
        assert pt.phase == lone.phase
        assert pt.mean_density == pytest.approx(lone.mean_density)
        assert np.array_equal(pt.nu_profile, lone.nu_profile)

    def test_worker_count_independence(self):
        p = paper_chain(N=4, N0=1, U=0.0, epsilon_base=1.0)
        d1 = phase_diagram([0.2, 0.6], [1.0, 3.0], p, workers=1)
        d2 = phase_diagram([0.2, 0.6], [1.0, 3.0], p, workers=2)
        for r1, r2 in zip(d1.points, d2.points):
            for p1, p2 in zip(r1, r2):
                assert p1.mean_density == p2.mean_density
                assert p1.phase == p2.phase

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            phase_diagram([], [1.0], paper_chain(), workers=1)

    def test_grid_ordering(self):
        p = paper_chain(N=4, N0=1, U=0.0, epsilon_base=1.0)
        d = phase_diagram([0.1, 0.9], [1.0, 2.0], p, workers=2)
        assert [pt.delta for pt in d.flat()] == [0.1, 0.1, 0.9, 0.9]
        assert [pt.epsilon for pt in d.flat()] == [1.0, 2.0, 1.0, 2.0]


class TestCriticalScan:
    def test_flat_response_raises_resolution_error(self):
        # a linear chain has no transition anywhere in the window
        p = paper_chain(N=8, N0=2, U=0.0)
        with pytest.raises(ResolutionError):
            critical_drive_scan(0.5, (1.0, 4.0), 0.5, p, workers=1)


class TestWorkers:
    def test_explicit_request_wins(self):
        assert cpu_workers(3) == 3

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("KERRCHAIN_WORKERS", "5")
        assert cpu_workers() == 5

    def test_auto_detect(self, monkeypatch):
        monkeypatch.delenv("KERRCHAIN_WORKERS", raising=False)
        assert cpu_workers() >= 1
