"""Load sweeps, maximum-power search, and parameter scans."""

import numpy as np
import pytest

from qdmcell import (BoundaryMaximumError, DegenerateSteadyStateError,
                     DomainError, GridSpec,
                     ModelParams, apply_band_alignment, build_qdm_generator,
                     efficiency_vs_distance, gamma_grid_scan, iv_curve,
                     max_power_point, open_circuit_voltage,
                     phonon_assisted_comparison, relative_current_gain,
                     short_circuit_current, solve_steady)
from qdmcell.model import IDX_P11, IDX_P55

GUIMARD_SQD = ModelParams(E12=920.0, gamma1=0.19, gamma_c=100.0,
                          gamma_v=0.05)
GUIMARD_QDM = GUIMARD_SQD.replace(delta_e=0.0, delta_h=0.0,
                                  gamma2=0.19).with_distance(2.0)


class TestGridSpec:
    def test_defaults(self):
        vals = GridSpec().values()
        assert len(vals) == 200
        assert vals[0] == pytest.approx(1e-6)
        assert vals[-1] == pytest.approx(1e6)

    def test_minimum_resolution_enforced(self):
        with pytest.raises(DomainError):
            GridSpec(n=10)
        with pytest.raises(DomainError):
            GridSpec(gamma_min=1.0, gamma_max=0.1)


class TestIvCurve:
    def test_curve_invariants(self):
        curve = iv_curve(ModelParams(), kind="qdm")
        gammas = curve.column("Gamma")
        assert len(curve.points) + curve.n_dropped == 200
        assert len(curve.points) >= 50
        assert (np.diff(gammas) > 0).all()
        for name in ("j", "V", "P", "coh13", "coh24"):
            assert np.isfinite(curve.column(name)).all()

    def test_molecule_outperforms_single_dot(self):
        qdm = iv_curve(ModelParams().with_distance(2.0), kind="qdm")
        sqd = iv_curve(ModelParams(), kind="sqd")
        assert short_circuit_current(qdm).value > \
            short_circuit_current(sqd).value

    def test_wide_barrier_approaches_single_dot(self):
        # The molecule's advantage decays with the barrier width.
        jsc = {d: short_circuit_current(
            iv_curve(ModelParams().with_distance(float(d)), kind="qdm")).value
            for d in (2, 4, 6, 10)}
        assert jsc[2] > jsc[4] > jsc[6] > jsc[10]
        j_sqd = short_circuit_current(iv_curve(ModelParams(),
                                               kind="sqd")).value
        assert abs(jsc[10] - j_sqd) / j_sqd < 0.01
        assert abs(jsc[2] - j_sqd) / j_sqd > 0.05

    def test_dark_cell_carries_no_current(self):
        curve = iv_curve(ModelParams(kTs=1e-2), kind="qdm")
        assert (curve.column("j") <= 1e-12).all()
        # Points with an empty conduction contact are dropped.
        assert curve.n_dropped > 0
        assert len(curve.points) + curve.n_dropped == 200

    def test_deterministic_bit_identical(self):
        a = iv_curve(ModelParams(), kind="qdm")
        b = iv_curve(ModelParams(), kind="qdm")
        assert (a.column("j") == b.column("j")).all()
        assert (a.column("V") == b.column("V")).all()


class TestMaxPowerPoint:
    def test_single_dot_reference(self):
        mpp = max_power_point(GUIMARD_SQD, kind="sqd")
        assert mpp.P_m == pytest.approx(13.66, rel=0.10)
        assert mpp.eta == pytest.approx(mpp.V_mpp / 920.0, rel=1e-12)

    def test_molecule_reference(self):
        mpp = max_power_point(GUIMARD_QDM, kind="qdm")
        assert mpp.P_m > max_power_point(GUIMARD_SQD, kind="sqd").P_m

    def test_dark_cell_has_no_interior_maximum(self):
        with pytest.raises(BoundaryMaximumError):
            max_power_point(ModelParams(kTs=1e-2), kind="qdm")

    def test_refinement_improves_on_grid(self):
        coarse = iv_curve(ModelParams(), kind="qdm", grid=GridSpec(n=50))
        mpp = max_power_point(curve=coarse)
        assert mpp.P_m >= coarse.column("P").max()

    def test_requires_params_or_curve(self):
        with pytest.raises(DomainError):
            max_power_point()


class TestOpenCircuitVoltage:
    def test_single_dot_reference(self):
        voc = open_circuit_voltage(GUIMARD_SQD, kind="sqd")
        assert voc.value == pytest.approx(871.0, rel=0.02)
        assert not voc.extrapolated

    def test_a2_alignment_dominates_reference_configuration(self):
        # The resonant-conduction alignment carries more current at
        # every shared operating voltage, hence more power.
        p0 = ModelParams().with_distance(2.0)
        pa = apply_band_alignment(ModelParams(), "A2").with_distance(2.0)
        c0 = iv_curve(p0, kind="qdm")
        ca = iv_curve(pa, kind="qdm")
        # Compare over the operating range; within ~kTc/2 of A2's
        # (3 mV lower) open-circuit voltage both currents cut off
        # exponentially and the ordering flips trivially.
        v_top = open_circuit_voltage(pa, kind="qdm").value - 10.0
        v0, j0 = c0.column("V")[::-1], c0.column("j")[::-1]
        va, ja = ca.column("V")[::-1], ca.column("j")[::-1]
        vs = np.linspace(max(v0[0], va[0]), v_top, 100)
        assert (np.interp(vs, va, ja) >= np.interp(vs, v0, j0)).all()
        assert max_power_point(curve=ca).P_m > max_power_point(curve=c0).P_m


class TestShortCircuitCurrent:
    def test_single_dot_reference(self):
        jsc = short_circuit_current(iv_curve(GUIMARD_SQD, kind="sqd"))
        assert jsc.value == pytest.approx(0.018, rel=0.10)

    def test_reference_point_is_flagged_tail_value(self):
        # At the reference operating point V = 0 is only reached at
        # absurdly large loads; the tail value is a saturated lower
        # bound.
        jsc = short_circuit_current(iv_curve(ModelParams(), kind="qdm"))
        assert not jsc.from_crossing
        curve = iv_curve(ModelParams(), kind="qdm",
                         grid=GridSpec(gamma_max=1e5))
        assert jsc.value == pytest.approx(
            short_circuit_current(curve).value, rel=1e-4)


class TestRelativeCurrentGain:
    def test_reference_rate_sets(self):
        slow = relative_current_gain(
            ModelParams(gamma_c=100.0, gamma_v=0.05).with_distance(2.0))
        fast = relative_current_gain(
            ModelParams(gamma_c=50.0, gamma_v=5.0).with_distance(2.0))
        assert slow.delta_j == pytest.approx(0.07, abs=0.03)
        assert fast.delta_j == pytest.approx(0.31, abs=0.03)
        assert slow.delta_Pm == pytest.approx(0.09, abs=0.03)
        assert fast.delta_Pm == pytest.approx(0.32, abs=0.03)

    def test_degenerate_molecule_carries_no_current(self):
        # Cutting both tunnelings breaks the photocurrent cycle (which
        # spans both dots), so the degenerate molecule cannot deliver
        # power: the only stationary current is zero.
        p = ModelParams(Te=0.0, Th=0.0, gamma2=0.0)
        ss = solve_steady(build_qdm_generator(p), block_of=IDX_P11)
        assert abs(p.Gamma * ss.x[IDX_P55]) <= 1e-12
        # Sweeps refuse the degenerate build outright rather than
        # reporting a meaningless gain.
        with pytest.raises(DegenerateSteadyStateError):
            max_power_point(p, kind="qdm")


class TestGammaGridScan:
    def test_small_scan_structure(self):
        gc = np.logspace(1, 2, 4)
        gv = np.logspace(-2, 1, 5)
        scan = gamma_grid_scan(ModelParams().with_distance(2.0),
                               gamma_c_grid=gc, gamma_v_grid=gv,
                               grid=GridSpec(n=60))
        assert scan.delta_j.shape == (5, 4)
        assert not scan.failures
        assert np.isfinite(scan.delta_j).all()
        # Fast valence relaxation and much faster conduction escape is
        # where the molecule pays off most.
        assert scan.delta_j[-1, -1] == scan.delta_j.max()
        assert 0.10 <= scan.delta_j.max() <= 0.33

    def test_gain_band_contains_ten_to_twenty_percent(self):
        gc = np.logspace(1.5, np.log10(500.0), 6)
        gv = np.logspace(-2, np.log10(20.0), 6)
        scan = gamma_grid_scan(ModelParams().with_distance(2.0),
                               gamma_c_grid=gc, gamma_v_grid=gv,
                               grid=GridSpec(n=60))
        band = scan.delta_j[(scan.delta_j >= 0.10) & (scan.delta_j <= 0.20)]
        assert band.size > 0

    def test_sqd_cache_reused_across_scans(self):
        gc = np.logspace(1, 2, 3)
        gv = np.logspace(-1, 0, 3)
        cache = {}
        a = gamma_grid_scan(ModelParams().with_distance(2.0),
                            gamma_c_grid=gc, gamma_v_grid=gv,
                            grid=GridSpec(n=60), sqd_cache=cache)
        assert len(cache) == 9
        b = gamma_grid_scan(ModelParams().with_distance(10.0),
                            gamma_c_grid=gc, gamma_v_grid=gv,
                            grid=GridSpec(n=60), sqd_cache=cache)
        assert len(cache) == 9  # single-dot results do not depend on d
        assert (a.delta_j >= b.delta_j - 1e-9).all()

    def test_deterministic_regardless_of_threading(self, monkeypatch):
        gc = np.logspace(1, 2, 3)
        gv = np.logspace(-1, 0, 3)
        p = ModelParams().with_distance(2.0)
        monkeypatch.setenv("QDM_THREADS", "1")
        serial = gamma_grid_scan(p, gamma_c_grid=gc, gamma_v_grid=gv,
                                 grid=GridSpec(n=60))
        monkeypatch.setenv("QDM_THREADS", "4")
        threaded = gamma_grid_scan(p, gamma_c_grid=gc, gamma_v_grid=gv,
                                   grid=GridSpec(n=60))
        assert (serial.delta_j == threaded.delta_j).all()


class TestEfficiencyVsDistance:
    def test_alignment_sweep_rows(self):
        rows = efficiency_vs_distance(ModelParams(), d_grid=(2.0, 10.0),
                                      grid=GridSpec(n=100))
        assert len(rows) == 10  # 5 alignments x 2 distances
        assert all(0.0 < r.eta < 0.9482 for r in rows)
        for d in (2.0, 10.0):
            best = max((r for r in rows if r.d == d), key=lambda r: r.P_m)
            assert best.alignment == "A2"

    def test_a2_valence_coherence_strongly_suppressed(self):
        rows = efficiency_vs_distance(ModelParams(), d_grid=(2.0,),
                                      alignments=("0", "A2"),
                                      grid=GridSpec(n=100))
        by_tag = {r.alignment: r for r in rows}
        assert by_tag["A2"].max_coh24 < 1e-3
        assert by_tag["A2"].max_coh24 < by_tag["0"].max_coh24 / 1000.0


class TestPhononAssistedComparison:
    def test_zero_rate_bit_identical_to_baseline(self):
        p = ModelParams(gamma_c=100.0, gamma_v=0.05).with_distance(2.0)
        base = max_power_point(p, kind="qdm")
        same = max_power_point(p.replace(gamma_13=0.0, gamma_24=0.0),
                               kind="qdm")
        assert base == same

    def test_assisted_channels_help_weak_tunneling_most(self):
        rows = phonon_assisted_comparison(ModelParams(), rates=(0.001,),
                                          rate_sets=((100.0, 0.05),),
                                          grid=GridSpec(n=100))
        gains = {r.d: r.delta_Pm for r in rows if r.gamma_13 > 0.0}
        assert gains[2.0] > 0.0
        assert gains[10.0] > gains[2.0]

    def test_fast_relaxation_set_unaffected_at_strong_tunneling(self):
        rows = phonon_assisted_comparison(ModelParams(), rates=(0.001,),
                                          rate_sets=((50.0, 5.0),),
                                          distances=(2.0,),
                                          grid=GridSpec(n=100))
        gain = next(r.delta_Pm for r in rows if r.gamma_13 > 0.0)
        assert abs(gain) < 0.01
