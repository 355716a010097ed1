import math
import random
from fractions import Fraction
from functools import lru_cache
from math import comb

import pytest
from hypothesis import given, strategies as st

from flagforge.constructions import (
    DP_LIMIT,
    PartTree,
    balanced_tree,
    base_case_holds,
    build_bipartite_B,
    build_t_rec,
    f32_certify,
    f32_profile,
    f32_profile_optimize,
    fact22_check,
    fact22_grid,
    optimal_tree,
    parse_tree,
    recursive_bound_rhs,
    s2_complete_tripartite,
    s2_rec,
    simplex_grid,
    stability_budget,
    t_rec_2,
    t_rec_2_balanced,
    t_rec_limit_estimate,
    top_partition,
)
from flagforge.errors import InputError
from flagforge.families import family_from_keywords, is_family_free, make_k4_minus
from flagforge.hypergraph import complete_partite, count_s2, is_isomorphic, lp_norm


@lru_cache(maxsize=None)
def t_oracle(n):
    """Every ordered split, no symmetry tricks."""
    if n < 3:
        return 0
    return max(a * b * (n - a - b) * n + t_oracle(a) + t_oracle(b) + t_oracle(n - a - b)
               for a in range(1, n) for b in range(1, n - a))


def random_tree(rng, n):
    if n <= 2 or rng.random() < 0.25:
        return PartTree(n)
    a = rng.randint(1, n - 2)
    b = rng.randint(1, n - a - 1)
    return PartTree(n, tuple(random_tree(rng, s) for s in (a, b, n - a - b)))


class TestRecurrence:
    def test_examples(self):
        assert t_rec_2(3) == (3, (1, 1, 1))
        assert t_rec_2(5) == (20, (1, 2, 2))
        assert t_rec_2(6) == (48, (2, 2, 2))
        assert t_rec_2(2) == (0, None)

    def test_matches_oracle(self):
        for n in range(0, 41):
            assert t_rec_2(n)[0] == t_oracle(n)

    def test_split_is_sorted_and_optimal(self):
        for n in range(3, 60):
            t, (a, b, c) = t_rec_2(n)
            assert a <= b <= c and a + b + c == n
            assert a * b * c * n + t_rec_2(a)[0] + t_rec_2(b)[0] + t_rec_2(c)[0] == t

    def test_split_is_lexicographically_smallest_optimum(self):
        for n in range(3, 40):
            t, split = t_rec_2(n)
            optima = [(a, b, n - a - b) for a in range(1, n) for b in range(a, n - a)
                      if b <= n - a - b and
                      a * b * (n - a - b) * n + t_oracle(a) + t_oracle(b) + t_oracle(n - a - b) == t]
            assert split == min(optima)

    def test_limit(self):
        est = t_rec_limit_estimate(4)
        assert abs(float(est) - 1 / 26) < 1e-4
        assert t_rec_limit_estimate(1) == Fraction(1, 27)
        assert t_rec_limit_estimate(2) == Fraction(t_rec_2(9)[0], 6561)

    def test_geometric_series_bound(self):
        for k in range(1, 6):
            assert abs(t_rec_limit_estimate(k) - Fraction(1, 26)) <= Fraction(1, 26) * Fraction(1, 27 ** k)

    def test_balanced_is_lower_bound(self):
        for n in range(0, 120):
            assert t_rec_2_balanced(n) <= t_rec_2(n)[0]
        for k in range(1, 6):
            assert t_rec_2_balanced(3 ** k) == t_rec_2(3 ** k)[0]

    def test_limits(self):
        with pytest.raises(InputError):
            t_rec_2(DP_LIMIT + 1)
        with pytest.raises(InputError):
            t_rec_2(-1)
        with pytest.raises(InputError):
            t_rec_limit_estimate(0)

    def test_s2_recurrence_matches_built_graph(self):
        for n in range(0, 13):
            best = 0
            rng = random.Random(n)
            for _ in range(30):
                best = max(best, count_s2(build_t_rec(random_tree(rng, n))))
            assert best <= s2_rec(n)


class TestTrees:
    def test_parse_and_print(self):
        t = parse_tree("(9: (3: 1 1 1) 3 3)")
        assert str(t) == "(9: (3: 1 1 1) 3 3)"
        assert len(build_t_rec(t)) == 28

    @pytest.mark.parametrize("text", ["(9: 3 3)", "(9: 3 3 4)", "(3: 1 1 1", "(3 1 1 1)", "3 4", "(3: 1 1 x)"])
    def test_malformed(self, text):
        with pytest.raises(InputError):
            parse_tree(text)

    def test_small_trees(self):
        assert build_t_rec(parse_tree("(3: 1 1 1)")).edges == ((0, 1, 2),)
        K = build_t_rec(parse_tree("(6: 2 2 2)"))
        assert len(K) == 8 and is_isomorphic(K, complete_partite(3, (2, 2, 2)))

    def test_balanced_nine(self):
        assert len(build_t_rec(balanced_tree(9))) == 30

    def test_norm_matches_recurrence(self):
        for n in range(0, 13):
            assert lp_norm(build_t_rec(optimal_tree(n)), 2) == t_rec_2(n)[0]

    def test_top_partition(self):
        assert top_partition(parse_tree("(5: 1 2 2)")) == (1, 2, 2, 3, 3)
        with pytest.raises(InputError):
            top_partition(PartTree(2))

    def test_freeness_of_random_trees(self):
        fam = family_from_keywords("k4m,c5m,c7m,c8m")
        rng = random.Random(2)
        for _ in range(25):
            T = build_t_rec(random_tree(rng, rng.randint(3, 10)))
            assert is_family_free(T, fam)


class TestBipartite:
    def test_examples(self):
        assert build_bipartite_B(2, 1).edges == ((0, 1, 2),)
        B = build_bipartite_B(3, 1)
        assert is_isomorphic(B, make_k4_minus()) and lp_norm(B, 2) == 15
        assert len(build_bipartite_B(4, 2)) == 12

    @given(st.integers(0, 8), st.integers(0, 5))
    def test_edge_count(self, a, b):
        assert len(build_bipartite_B(a, b)) == comb(a, 2) * b


class TestF32Profile:
    def test_closed_form(self):
        for k in range(0, 101):
            a = Fraction(k, 100)
            assert f32_profile(a) == a * a * (1 - a) ** 2 / 2 + a ** 3 * (1 - a)
            assert f32_profile(a) == a * a * (1 - a * a) / 2

    def test_values(self):
        assert f32_profile(Fraction(1, 2)) == Fraction(3, 32)
        assert abs(f32_profile(math.sqrt(2) / 2) - 1 / 8) < 1e-15

    def test_optimum(self):
        a, v = f32_profile_optimize(Fraction(1, 1000))
        assert abs(a - math.sqrt(2) / 2) <= 1e-6
        assert abs(v - 1 / 8) <= 1e-9
        assert abs(a / (1 - a) - (math.sqrt(2) + 1)) < 1e-5

    def test_certify(self):
        a, v = f32_certify(math.sqrt(2) / 2)
        assert isinstance(v, Fraction) and v <= Fraction(1, 8)
        assert Fraction(1, 8) - v < Fraction(1, 10 ** 12)


class TestFact22:
    def test_centre_is_equality(self):
        third = Fraction(1, 3)
        r = fact22_check((third, third, third))
        assert r.lhs1 == Fraction(1, 26) and r.holds1
        assert r.lhs3 == r.rhs3 == Fraction(1, 26) and r.holds3
        f = fact22_check((1 / 3, 1 / 3, 1 / 3))
        assert abs(f.lhs1 - 1 / 26) < 1e-12 and abs(f.lhs3 - f.rhs3) < 1e-12

    def test_strict_point(self):
        r = fact22_check((Fraction(1, 5), Fraction(2, 5), Fraction(2, 5)))
        assert r.lhs1 < Fraction(1, 26) and r.lhs3 < r.rhs3

    def test_domains(self):
        r = fact22_check((Fraction(1), Fraction(0), Fraction(0)))
        assert r.holds1 is None and r.holds3 is None
        r = fact22_check((Fraction(1, 10), Fraction(1, 2), Fraction(2, 5)))
        assert r.holds1 and r.holds3 is None

    def test_bad_points(self):
        with pytest.raises(InputError):
            fact22_check((Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)))
        with pytest.raises(InputError):
            fact22_check((Fraction(-1, 2), Fraction(1), Fraction(1, 2)))

    def test_grid_points(self):
        pts = list(simplex_grid(4))
        assert len(pts) == 15 and all(sum(p) == 1 for p in pts)

    def test_exact_grid(self):
        res = fact22_grid(Fraction(1, 60), exact=True)
        assert res["failures"] == []

    @given(st.integers(1, 400), st.integers(1, 400), st.integers(1, 400))
    def test_random_rational_points(self, a, b, c):
        s = a + b + c
        r = fact22_check((Fraction(a, s), Fraction(b, s), Fraction(c, s)))
        assert r.holds1
        assert r.holds3 in (True, None)


class TestRecursiveBound:
    def test_tripartite_counts(self):
        assert s2_complete_tripartite((1, 1, 2)) == 1
        for sizes in [(1, 1, 2), (2, 2, 2), (1, 3, 2), (3, 3, 3)]:
            assert s2_complete_tripartite(sizes) == count_s2(complete_partite(3, sizes))
        m = 4
        assert s2_complete_tripartite((m, m, m)) == 3 * m * m * comb(m, 2) <= m ** 3 * 3 * m / 2

    def test_rhs(self):
        assert recursive_bound_rhs(6, (2, 2, 2), (0, 0, 0), 0, 0, 0) == 24
        assert recursive_bound_rhs(6, (2, 2, 2), (1, 2, 3), 0, 18, 10) == 30 - 2
        assert recursive_bound_rhs(3, (1, 1, 1), (0, 0, 0), Fraction(1, 3), 0, 0) == Fraction(3, 2) + 27

    def test_inconsistent_sizes(self):
        with pytest.raises(InputError):
            recursive_bound_rhs(7, (2, 2, 2), (0, 0, 0), 0, 0, 0)


class TestBudget:
    def test_constants(self):
        eps = Fraction(1, 10)
        b = stability_budget(eps)
        assert b.delta == eps ** 13 / 1200
        assert b.edge_slack == 25 * eps and b.inner_slack == 2400 * eps
        assert abs(b.part_slack - 6 * math.sqrt(0.1)) < 1e-15
        assert b.chain_ok and b.step_coefficient == 250 and b.inner_scaling_ok
        assert b.removal_budget(100, 5) == 600 * b.delta / eps ** 12 * 125 + eps * 100 ** 2 * 5 / 6

    @pytest.mark.parametrize("eps", [0, 1, Fraction(3, 2), -1])
    def test_bad_eps(self, eps):
        with pytest.raises(InputError):
            stability_budget(eps)

    @given(st.integers(1, 99), st.integers(10, 2000), st.data())
    def test_base_case(self, k, n, data):
        eps = Fraction(k, 100)
        bound = math.ceil(eps * n)
        if bound == 0:
            return
        m = data.draw(st.integers(0, bound - 1))
        assert base_case_holds(eps, n, m)
