import numpy as np
import pytest

from floatnorm import surrogate as sg
from floatnorm.surrogate import (BiasGrid, CggParams, CurveVector, IdParams,
                                 Simulator, SurrogateError, scale_curve,
                                 simulate_cgg, simulate_id, simulate_id_vd,
                                 unscale_curve)

MID_ID = IdParams(CIT=5e-3, U0=2.75e-2, UA=1.5, EU=3, ETA0=3, CDSCD=0.35,
                  VSAT=1e5, KSATIV=5, RDSW=175, PCLM=6.5e-2, MEXP=6,
                  PHIG=4.5)

CGG_RANGES = [(4.2, 4.8), (5e-11, 5e-10), (5e-10, 5e-9), (-10, 10),
              (0.01, 2), (5e-11, 5e-10)]
ID_RANGES = [(1e-4, 1e-2), (5e-3, 5e-2), (3e-2, 3), (1, 5), (6e-2, 6),
             (7e-5, 7e-1), (5e4, 1.5e5), (0.1, 10), (50, 300),
             (1.3e-3, 1.3e-1), (2.01, 10)]


def random_cgg(rng):
    return CggParams.from_array([rng.uniform(a, b) for a, b in CGG_RANGES])


def random_id(rng):
    return IdParams.from_array([rng.uniform(a, b) for a, b in ID_RANGES],
                               rng.uniform(4.2, 4.8))


class TestBiasGrid:
    def test_defaults(self):
        g = BiasGrid()
        assert len(g.cgg_vg) == 15
        assert g.cgg_vg[0] == pytest.approx(-0.7, abs=1e-12)
        assert g.cgg_vg[-1] == pytest.approx(0.7, abs=1e-12)
        assert np.allclose(np.diff(g.cgg_vg), 0.1, atol=1e-12)
        assert len(g.id_vg) == 8
        assert g.id_vd_conditions == (0.05, 0.7)

    def test_bad_grid_rejected(self):
        with pytest.raises(SurrogateError):
            BiasGrid(cgg_vg=np.linspace(-0.7, 0.7, 14))


class TestSimulateCgg:
    def test_hand_value_at_threshold(self):
        # independently hand-evaluated closed form at Vg = Vth_c = 0
        p = CggParams(4.5, 1e-10, 1e-9, 0, 1, 1e-10)
        c = simulate_cgg(p)
        assert c.values[7] == pytest.approx(4.953e-17, rel=1e-12)

    def test_zero_quantum_correction(self):
        p0 = CggParams(4.4, 2e-10, 2e-9, 0.0, 1.0, 1e-10)
        # QMFACTOR=0 means EOT_q == EOT; compare against manual formula
        vg = BiasGrid().cgg_vg
        vth = 4.4 - 4.5
        expected = (sg.W * 2e-10
                    + sg.W * 1e-10 * sg.sigmoid(5.0 * (vth - vg))
                    + sg.A * (sg.EPS_HK / 2e-9)
                    * sg.sigmoid((vg - vth) / (1.5 * sg.VT)))
        assert np.allclose(simulate_cgg(p0).values, expected, rtol=1e-14)

    def test_negative_vg_limit(self):
        # far below threshold the curve tends to W*(CFS + CGSL)
        p = CggParams(4.8, 3e-10, 1e-9, 0, 1, 4e-10)
        grid = BiasGrid()
        v = simulate_cgg(p, grid).values[0]   # Vg=-0.7, Vth=0.3
        assert v == pytest.approx(sg.W * (3e-10 + 4e-10), rel=1e-3)

    def test_positive_everywhere(self):
        rng = np.random.default_rng(0)
        for _ in range(2000):
            assert np.all(simulate_cgg(random_cgg(rng)).values > 0)

    def test_channel_term_increasing(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            p = random_cgg(rng)
            vg = BiasGrid().cgg_vg
            vth = p.PHIG - 4.5
            term = sg.sigmoid((vg - vth) / (1.5 * sg.VT))
            assert np.all(np.diff(term) > 0)

    def test_nonfinite_rejected(self):
        with pytest.raises(SurrogateError):
            simulate_cgg(CggParams(np.nan, 1e-10, 1e-9, 0, 1, 1e-10))


class TestSimulateId:
    def test_golden_midrange(self):
        # pinned by an independent scalar-math oracle before this module
        # was written
        c = simulate_id(MID_ID)
        assert c.values[15] == pytest.approx(1.0599880897552705e-4, rel=1e-12)

    def test_block_layout(self):
        c = simulate_id(MID_ID)
        assert c.values.shape == (16,)
        # Vd=0.7 block never below the Vd=0.05 block
        assert np.all(c.values[8:] >= c.values[:8])

    def test_vd_ordering_random(self):
        rng = np.random.default_rng(2)
        for _ in range(2000):
            v = simulate_id(random_id(rng)).values
            assert np.all(v[8:] >= v[:8] - 1e-18)

    def test_floor(self):
        rng = np.random.default_rng(3)
        for _ in range(2000):
            assert np.all(simulate_id(random_id(rng)).values >= sg.I_FLOOR)

    def test_monotone_in_vg_midrange(self):
        v = simulate_id(MID_ID).values
        assert np.all(np.diff(v[:8]) > 0)
        assert np.all(np.diff(v[8:]) > 0)

    def test_dibl_sign(self):
        # raising ETA0 lowers the threshold and raises subthreshold Id at
        # Vd=0.7; above threshold the mobility term can reverse the sign,
        # so only the low-Vg points are asserted
        rng = np.random.default_rng(4)
        for _ in range(300):
            p = random_id(rng)
            hi = IdParams(**{**p.__dict__, "ETA0": min(p.ETA0 * 1.5, 6.0)})
            assert np.all(simulate_id(hi).values[8:10]
                          >= simulate_id(p).values[8:10] - 1e-18)

    def test_no_overflow_at_max_mexp(self):
        p = IdParams(**{**MID_ID.__dict__, "MEXP": 10.0, "KSATIV": 0.1})
        v = simulate_id(p).values
        assert np.all(np.isfinite(v))

    def test_pclm_zero(self):
        p0 = IdParams(**{**MID_ID.__dict__, "PCLM": 1.3e-3})
        v = simulate_id(p0).values
        assert np.all(np.isfinite(v)) and np.all(v > 0)

    def test_smooth_in_parameters(self):
        # central-difference derivative w.r.t. each parameter is finite
        h_rel = 1e-6
        base = MID_ID.__dict__
        for name in sg.ID_PARAM_NAMES + ("PHIG",):
            h = abs(base[name]) * h_rel or h_rel
            up = simulate_id(IdParams(**{**base, name: base[name] + h}))
            dn = simulate_id(IdParams(**{**base, name: base[name] - h}))
            d = (up.values - dn.values) / (2 * h)
            assert np.all(np.isfinite(d))

    def test_nonfinite_rejected(self):
        with pytest.raises(SurrogateError):
            simulate_id(IdParams(**{**MID_ID.__dict__, "U0": np.inf}))


class TestSimulateIdVd:
    def test_consistency_with_id_vg(self):
        fam = simulate_id_vd(MID_ID, BiasGrid().id_vg, [0.05])
        assert np.allclose(fam[:, 0], simulate_id(MID_ID).values[:8],
                           rtol=1e-14)

    def test_monotone_in_vd(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            fam = simulate_id_vd(random_id(rng), [0.2, 0.4, 0.7])
            assert np.all(np.diff(fam, axis=1) >= -1e-20)

    def test_gd_positive_midrange(self):
        h = 1e-4
        up = simulate_id_vd(MID_ID, [0.7], [0.7 + h])[0, 0]
        dn = simulate_id_vd(MID_ID, [0.7], [0.7 - h])[0, 0]
        assert (up - dn) / (2 * h) > 0


class TestScaling:
    def test_cgg_example(self):
        c = CurveVector("Cgg", np.full(15, 4.953e-17))
        assert scale_curve(c)[0] == pytest.approx(0.4953, rel=1e-12)

    def test_id_decades(self):
        c = CurveVector("Id", np.full(16, 1e-14))
        assert np.allclose(scale_curve(c), 0.0)
        c = CurveVector("Id", np.full(16, 1e-2))
        assert np.allclose(scale_curve(c), 1.0)

    def test_round_trip(self):
        rng = np.random.default_rng(6)
        for _ in range(500):
            cgg = simulate_cgg(random_cgg(rng))
            back = unscale_curve(scale_curve(cgg), "Cgg")
            assert np.allclose(back.values, cgg.values, rtol=1e-12)
            idc = simulate_id(random_id(rng))
            back = unscale_curve(scale_curve(idc), "Id")
            assert np.allclose(back.values, idc.values, rtol=1e-12)

    def test_kind_mismatch(self):
        with pytest.raises(SurrogateError):
            unscale_curve(np.zeros(15), "Cv")
        with pytest.raises(SurrogateError):
            CurveVector("Cgg", np.zeros(16))


class TestSimulatorInterface:
    def test_call_counting(self):
        sim = Simulator()
        sim.simulate_cgg(CggParams(4.5, 1e-10, 1e-9, 0, 1, 1e-10))
        sim.simulate_id(MID_ID)
        assert sim.call_count == 2
