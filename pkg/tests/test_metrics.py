import numpy as np
import pytest

from conftest import random_pattern
from ppbary.core import Params, PointPattern
from ppbary.metrics import (
    ospa_distance,
    rtt_distance,
    spike_time_distance,
    tt_distance,
    tt_distance_bruteforce,
)

P12 = Params(penalty=1.0, order=2.0)


class TestTTDistance:
    def test_identical_patterns(self, rng):
        pat = random_pattern(rng, min_n=1)
        perm = rng.permutation(len(pat))
        shuffled = PointPattern(pat.points[perm])
        assert tt_distance(pat, shuffled, P12).value == 0.0

    def test_empty_vs_two_points(self):
        eta = PointPattern([[0.3, 0.3], [0.6, 0.6]])
        res = tt_distance(PointPattern.empty(2), eta, P12)
        assert res.value == pytest.approx(np.sqrt(2.0), abs=1e-12)
        assert res.matching == [(None, 0), (None, 1)]

    def test_far_singletons_prefer_deletion(self):
        # match cost 3 vs delete+add cost 2C
        params = Params(penalty=1.0, order=1.0)
        xi = PointPattern([[0.0]])
        eta = PointPattern([[3.0]])
        assert tt_distance(xi, eta, params).value == pytest.approx(2.0, abs=1e-12)

    def test_both_empty(self):
        res = tt_distance(PointPattern.empty(2), PointPattern.empty(2), P12)
        assert res.value == 0.0
        assert res.matching == []

    def test_symmetry_is_exact(self, rng):
        for _ in range(50):
            xi, eta = random_pattern(rng), random_pattern(rng)
            a = tt_distance(xi, eta, P12).value
            b = tt_distance(eta, xi, P12).value
            assert a == b

    def test_value_matches_matching_decomposition(self, rng):
        # value^p = sum over matched pairs of d'^p plus C^p per unmatched point
        params = Params(penalty=0.5, order=2.0)
        for _ in range(30):
            xi, eta = random_pattern(rng, min_n=1), random_pattern(rng, min_n=1)
            res = tt_distance(xi, eta, params)
            total = 0.0
            for i, j in res.matching:
                if i is None or j is None:
                    total += params.penalty**2
                else:
                    d = np.linalg.norm(xi.points[i] - eta.points[j])
                    total += min(d, params.cutoff) ** 2
            assert res.value**2 == pytest.approx(total, abs=1e-9)

    def test_scale_bound(self, rng):
        for c, p in [(0.1, 1.0), (1.0, 2.0), (2.0, 1.0)]:
            params = Params(penalty=c, order=p)
            xi, eta = random_pattern(rng), random_pattern(rng)
            value = tt_distance(xi, eta, params).value
            assert value**p <= (len(xi) + len(eta)) * c**p + 1e-9


class TestBruteforceOracle:
    def test_zero_distance_singletons(self):
        pat = PointPattern([[0.2, 0.8]])
        assert tt_distance_bruteforce(pat, pat, P12).value == 0.0

    def test_exact_overlay(self):
        params = Params(penalty=0.1, order=1.0)
        xi = PointPattern([[0.0], [1.0]])
        eta = PointPattern([[0.0], [1.0]])
        assert tt_distance_bruteforce(xi, eta, params).value == 0.0

    def test_agrees_with_assignment_path(self, rng):
        for _ in range(100):
            xi = random_pattern(rng, max_n=5)
            eta = random_pattern(rng, max_n=5)
            c = float(rng.uniform(0.05, 2.0))
            p = float(rng.choice([1.0, 2.0]))
            params = Params(penalty=c, order=p)
            ref = tt_distance_bruteforce(xi, eta, params).value
            got = tt_distance(xi, eta, params).value
            assert got == pytest.approx(ref, abs=1e-9)

    def test_size_guard(self, rng):
        big = PointPattern(rng.random((9, 2)))
        with pytest.raises(ValueError):
            tt_distance_bruteforce(big, big, P12)


class TestRTTDistance:
    def test_empty_vs_n_points_is_penalty(self, rng):
        for p in (1.0, 2.0):
            params = Params(penalty=0.8, order=p)
            eta = random_pattern(rng, min_n=1)
            assert rtt_distance(PointPattern.empty(2), eta, params).value == pytest.approx(
                0.8, abs=1e-12
            )

    def test_identity(self, rng):
        pat = random_pattern(rng, min_n=1)
        assert rtt_distance(pat, pat, P12).value == 0.0

    def test_half_matched_pair(self):
        # {0} vs {0, 10}: one exact match plus one penalty, averaged over 2
        xi = PointPattern([[0.0]])
        eta = PointPattern([[0.0], [10.0]])
        res = rtt_distance(xi, eta, P12)
        assert res.value == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-12)

    def test_both_empty(self):
        assert rtt_distance(PointPattern.empty(2), PointPattern.empty(2), P12).value == 0.0

    def test_relation_to_tt_exact(self, rng):
        for _ in range(30):
            xi, eta = random_pattern(rng), random_pattern(rng)
            n = max(len(xi), len(eta))
            if n == 0:
                continue
            tt = tt_distance(xi, eta, P12).value
            rtt = rtt_distance(xi, eta, P12).value
            assert rtt == tt / n ** (1.0 / 2.0)


class TestOSPA:
    def test_identity(self, rng):
        pat = random_pattern(rng, min_n=1)
        assert ospa_distance(pat, pat, Params(penalty=2.0, order=2.0)) == 0.0

    def test_empty_vs_points_is_penalty(self, rng):
        params = Params(penalty=2.0, order=1.0)
        eta = random_pattern(rng, min_n=1)
        assert ospa_distance(PointPattern.empty(2), eta, params) == pytest.approx(2.0)

    def test_equals_rtt_under_diameter_bound(self, rng):
        params = Params(penalty=2.0, order=2.0)
        for _ in range(100):
            xi, eta = random_pattern(rng), random_pattern(rng)
            got = ospa_distance(xi, eta, params)
            ref = rtt_distance(xi, eta, params).value
            assert got == pytest.approx(ref, abs=1e-9)

    def test_warns_when_diameter_exceeds_cutoff(self):
        params = Params(penalty=0.1, order=2.0)
        xi = PointPattern([[0.0, 0.0]])
        eta = PointPattern([[5.0, 0.0]])
        with pytest.warns(UserWarning):
            ospa_distance(xi, eta, params)

    def test_cutoff_at_penalty_convention(self):
        params = Params(penalty=0.5, order=1.0)
        xi = PointPattern([[0.0, 0.0]])
        eta = PointPattern([[5.0, 0.0]])
        assert ospa_distance(xi, eta, params, cutoff_at_penalty=True) == pytest.approx(0.5)


class TestSpikeTime:
    def test_identity(self, rng):
        pat = random_pattern(rng, min_n=1)
        assert spike_time_distance(pat, pat, p_add=1.0, p_delete=1.0) == 0.0

    def test_equals_tt_with_equal_penalties(self, rng):
        for _ in range(50):
            xi, eta = random_pattern(rng), random_pattern(rng)
            c = float(rng.uniform(0.1, 2.0))
            got = spike_time_distance(xi, eta, p_add=c, p_delete=c)
            ref = tt_distance(xi, eta, Params(penalty=c, order=1.0)).value
            assert got == pytest.approx(ref, abs=1e-12)

    def test_move_beats_delete_add(self):
        xi = PointPattern([[0.0]])
        eta = PointPattern([[1.0]])
        assert spike_time_distance(xi, eta, p_add=10.0, p_delete=10.0) == pytest.approx(1.0)

    def test_asymmetric_penalties(self):
        # adding two points costs 2 * p_add regardless of p_delete
        eta = PointPattern([[0.0], [1.0]])
        got = spike_time_distance(PointPattern.empty(1), eta, p_add=0.25, p_delete=9.0)
        assert got == pytest.approx(0.5)
        # deletions priced separately
        got = spike_time_distance(eta, PointPattern.empty(1), p_add=9.0, p_delete=0.25)
        assert got == pytest.approx(0.5)

    def test_move_scale(self):
        xi = PointPattern([[0.0]])
        eta = PointPattern([[1.0]])
        # moving costs 3 per unit; deleting + adding costs 2.5 -> cheaper
        got = spike_time_distance(xi, eta, p_add=1.0, p_delete=1.5, move_scale=3.0)
        assert got == pytest.approx(2.5)

    def test_agrees_with_asymmetric_bruteforce(self, rng):
        for _ in range(50):
            xi = random_pattern(rng, max_n=4, dim=1)
            eta = random_pattern(rng, max_n=4, dim=1)
            pa, pd = float(rng.uniform(0.1, 1.0)), float(rng.uniform(0.1, 1.0))
            got = spike_time_distance(xi, eta, p_add=pa, p_delete=pd)
            params = Params(penalty=min(pa, pd), order=1.0, add_penalty=pa, delete_penalty=pd)
            ref = tt_distance_bruteforce(xi, eta, params).value
            assert got == pytest.approx(ref, abs=1e-9)

    def test_rejects_bad_penalties(self):
        pat = PointPattern([[0.0]])
        with pytest.raises(ValueError):
            spike_time_distance(pat, pat, p_add=0.0, p_delete=1.0)
        with pytest.raises(ValueError):
            spike_time_distance(pat, pat, p_add=1.0, p_delete=1.0, move_scale=0.0)


class TestMetricAxioms:
    def test_axioms_on_random_triples(self, rng):
        # smaller version of the acceptance sweep
        for c, p in [(0.1, 1.0), (1.0, 2.0), (2.0, 2.0)]:
            params = Params(penalty=c, order=p)
            for _ in range(60):
                xi = random_pattern(rng, max_n=6)
                eta = random_pattern(rng, max_n=6)
                zeta = random_pattern(rng, max_n=6)
                for dist in (tt_distance, rtt_distance):
                    dxy = dist(xi, eta, params).value
                    dyx = dist(eta, xi, params).value
                    assert dxy == dyx
                    dxz = dist(xi, zeta, params).value
                    dzy = dist(zeta, eta, params).value
                    assert dxy <= dxz + dzy + 1e-9
                assert (tt_distance(xi, eta, params).value == 0.0) == (xi == eta)
