import numpy as np
import pytest

from dremnet.excitation import (
    DeltaTrace,
    find_certificate,
    local_pe_check,
    single_sensor_pe,
)
from dremnet.harness import delta_traces
from dremnet.topology import StaticGraph, ring


def oracle_min_window(neighborhood_sums, H, start):
    """Brute-force minimum window sum, written independently of the scanner."""
    K = len(neighborhood_sums)
    return min(sum(neighborhood_sums[k : k + H]) for k in range(start, K - H + 1))


@pytest.fixture(scope="module")
def sec5_trace(sec5):
    return delta_traces(sec5, horizon=200)


class TestValidation:
    def test_trace_shape_and_finiteness(self):
        with pytest.raises(ValueError):
            DeltaTrace(values=np.zeros(5))
        with pytest.raises(ValueError):
            DeltaTrace(values=np.array([[np.inf, 0.0]]))
        with pytest.raises(ValueError):
            DeltaTrace(values=np.zeros((2, 5)), d=0)

    def test_window_args(self):
        trace = DeltaTrace(values=np.ones((1, 10)), d=1)
        g = StaticGraph(n=1, edges=())
        with pytest.raises(ValueError):
            local_pe_check(trace, g, H=0, omega=1.0)
        with pytest.raises(ValueError):
            local_pe_check(trace, g, H=1, omega=0.0)
        with pytest.raises(ValueError):
            local_pe_check(trace, g, H=5, omega=1.0, horizon=3)
        with pytest.raises(ValueError):
            local_pe_check(trace, g, H=1, omega=1.0, horizon=11)
        with pytest.raises(ValueError):
            single_sensor_pe(trace, 2, H=1, omega=1.0)
        with pytest.raises(ValueError):
            find_certificate(trace, g, omega=1.0, max_h=0)


class TestHandTraces:
    def test_alternating_single_sensor(self):
        # 0,1,0,1,...: H=2 windows always sum to 1; H=1 hits a zero
        trace = DeltaTrace(values=np.array([[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]]), d=1)
        ok2, margin2 = single_sensor_pe(trace, 1, H=2, omega=1.0)
        assert ok2 and margin2 == 1.0
        ok1, margin1 = single_sensor_pe(trace, 1, H=1, omega=1.0)
        assert not ok1 and margin1 == 0.0

    def test_all_zero_trace_never_satisfies(self):
        trace = DeltaTrace(values=np.zeros((2, 30)), d=1)
        g = ring(2)
        for H in (1, 3, 10):
            cert = local_pe_check(trace, g, H, omega=0.5)
            assert cert.satisfied == (False, False)
            assert cert.margin == (0.0, 0.0)
        found = find_certificate(trace, g, omega=0.5, max_h=10)
        assert found == {1: None, 2: None}

    def test_warm_up_window_excluded(self):
        # zero at step 0 only; with d=2 the scan starts at step 1 and passes
        trace = DeltaTrace(values=np.array([[0.0, 1.0, 1.0, 1.0, 1.0]]), d=2)
        ok, margin = single_sensor_pe(trace, 1, H=1, omega=1.0)
        assert ok and margin == 1.0
        # same trace with d=1 must include the dead step
        trace1 = DeltaTrace(values=trace.values, d=1)
        ok1, margin1 = single_sensor_pe(trace1, 1, H=1, omega=1.0)
        assert not ok1 and margin1 == 0.0

    def test_neighbor_serves_silent_sensor(self):
        # sensor 2 is silent but receives sensor 1's excited trace
        vals = np.array([[1.0, 1.0, 1.0, 1.0], [0.0, 0.0, 0.0, 0.0]])
        trace = DeltaTrace(values=vals, d=1)
        g = StaticGraph(n=2, edges=((1, 2),))
        cert = local_pe_check(trace, g, H=1, omega=1.0)
        assert cert.satisfied == (True, True)
        ok_single, _ = single_sensor_pe(trace, 2, H=1, omega=1.0)
        assert not ok_single

    def test_singleton_matches_single_sensor(self):
        rng = np.random.default_rng(7)
        trace = DeltaTrace(values=rng.uniform(-1, 1, size=(3, 40)), d=2)
        g = StaticGraph(n=3, edges=())
        for H in (1, 2, 5):
            cert = local_pe_check(trace, g, H, omega=0.3)
            for i in (1, 2, 3):
                ok, margin = single_sensor_pe(trace, i, H, omega=0.3)
                assert cert.margin[i - 1] == margin
                assert cert.satisfied[i - 1] == ok

    def test_margin_matches_bruteforce(self):
        rng = np.random.default_rng(8)
        vals = rng.uniform(-1, 1, size=(2, 25))
        trace = DeltaTrace(values=vals, d=2)
        g = ring(2)
        sq = vals ** 2
        for H in (1, 3, 7):
            cert = local_pe_check(trace, g, H, omega=0.5)
            for i in (1, 2):
                sums = sq[0] + sq[1]  # ring(2): both neighborhoods are {1, 2}
                assert cert.margin[i - 1] == pytest.approx(
                    oracle_min_window(sums, H, start=1), rel=1e-12
                )


class TestMonotonicity:
    def test_margin_grows_with_window(self):
        rng = np.random.default_rng(9)
        trace = DeltaTrace(values=rng.uniform(-1, 1, size=(4, 60)), d=2)
        g = ring(4)
        prev = None
        for H in range(1, 8):
            cert = local_pe_check(trace, g, H, omega=1.0)
            if prev is not None:
                # nonneg summands: the min H-window grows with H
                assert all(m >= p for m, p in zip(cert.margin, prev))
            prev = cert.margin

    def test_bigger_neighborhood_never_hurts(self):
        rng = np.random.default_rng(10)
        vals = rng.uniform(-1, 1, size=(3, 40))
        trace = DeltaTrace(values=vals, d=1)
        sparse = StaticGraph(n=3, edges=((1, 2),))
        dense = StaticGraph(n=3, edges=((1, 2), (3, 2), (2, 1)))
        for H in (1, 4):
            c_sparse = local_pe_check(trace, sparse, H, omega=1.0)
            c_dense = local_pe_check(trace, dense, H, omega=1.0)
            assert all(md >= ms for md, ms in zip(c_dense.margin, c_sparse.margin))


class TestBuiltinScenario:
    def test_certificates(self, sec5_trace, sec5):
        found = find_certificate(sec5_trace, sec5.graph, omega=1.0, max_h=8)
        assert found == {1: 1, 2: 1, 3: 2, 4: 2}

    def test_wide_window_margins(self, sec5_trace, sec5):
        cert = local_pe_check(sec5_trace, sec5.graph, H=8, omega=1.0)
        assert cert.satisfied == (True, True, True, True)
        np.testing.assert_allclose(cert.margin, [8.0, 12.0, 8.0, 4.0], rtol=1e-9)

    def test_single_sensor_results(self, sec5_trace):
        # sensor 1 alternates +-1: every window sums exactly to H
        ok, margin = single_sensor_pe(sec5_trace, 1, H=1, omega=1.0)
        assert ok and margin == 1.0
        # sensor 3's trace vanishes on even steps, needs H=2
        ok1, _ = single_sensor_pe(sec5_trace, 3, H=1, omega=1.0)
        assert not ok1
        ok2, margin2 = single_sensor_pe(sec5_trace, 3, H=2, omega=1.0)
        assert ok2 and margin2 == pytest.approx(1.0, rel=1e-9)

    def test_sensor4_alone_is_never_excited(self, sec5_trace):
        # constant regressor: delta_bar identically zero, no window helps
        for H in (1, 10, 50):
            ok, margin = single_sensor_pe(sec5_trace, 4, H, omega=1.0)
            assert not ok and margin == 0.0

    def test_certificate_consistency(self, sec5_trace, sec5):
        found = find_certificate(sec5_trace, sec5.graph, omega=1.0, max_h=8)
        for i, H in found.items():
            cert = local_pe_check(sec5_trace, sec5.graph, H, omega=1.0)
            assert cert.satisfied[i - 1]
            if H > 1:
                below = local_pe_check(sec5_trace, sec5.graph, H - 1, omega=1.0)
                assert not below.satisfied[i - 1]
