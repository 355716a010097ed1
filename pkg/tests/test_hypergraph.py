import random
from fractions import Fraction
from itertools import combinations, permutations, product
from math import comb

import pytest
from hypothesis import given, strategies as st

from conftest import hypergraphs, random_graph
from flagforge.errors import InputError, UnsupportedUniformity
from flagforge.families import make_k4, make_k4_minus, make_s2, make_tight_cycle_minus
from flagforge.generate import all_classes
from flagforge.hypergraph import (
    Hypergraph,
    blowup,
    canonical_form,
    codegree,
    complete_partite,
    contains,
    count_s2,
    format_hypergraph,
    homomorphism_exists,
    induced_density,
    is_isomorphic,
    link,
    lp_norm,
    parse_hypergraph,
    shadow,
)

EDGE = Hypergraph(3, 3, ((0, 1, 2),))
K4 = make_k4()
S2 = make_s2()


def s2_oracle(H):
    # any two triples inside a 4-set share a pair
    return sum(comb(sum(1 for t in combinations(q, 3) if t in H.edge_set), 2)
               for q in combinations(range(H.n), 4))


def aut_oracle(H):
    return sum(1 for p in permutations(range(H.n)) if H.relabel(p).edge_set == H.edge_set)


def hom_oracle(F, G):
    for phi in product(range(G.n), repeat=F.n):
        if all(len({phi[v] for v in e}) == F.r and tuple(sorted(phi[v] for v in e)) in G.edge_set
               for e in F.edges):
            return True
    return False


class TestConstruction:
    def test_edges_are_sorted_and_normalized(self):
        H = Hypergraph(3, 4, ((3, 1, 0), (2, 1, 0)))
        assert H.edges == ((0, 1, 2), (0, 1, 3))

    @pytest.mark.parametrize("edges", [((0, 0, 1),), ((0, 1, 5),), ((0, 1),)])
    def test_bad_edges_rejected(self, edges):
        with pytest.raises(InputError):
            Hypergraph(3, 4, edges)

    def test_duplicates_collapse(self):
        assert len(Hypergraph(3, 4, ((0, 1, 2), (2, 1, 0)))) == 1

    def test_bad_uniformity(self):
        with pytest.raises(InputError):
            Hypergraph(4, 5, ())


class TestShadowCodegreeLink:
    def test_shadow_single_edge(self):
        assert shadow(EDGE) == {(0, 1), (0, 2), (1, 2)}

    def test_shadow_k4(self):
        assert shadow(K4) == set(combinations(range(4), 2))

    def test_shadow_s2(self):
        assert shadow(S2) == {(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)}

    def test_codegrees(self):
        assert codegree(K4, (0, 1)) == 2
        assert codegree(EDGE, (0, 1)) == 1
        assert codegree(Hypergraph(3, 4, ((0, 1, 2),)), (0, 3)) == 0

    def test_codegree_malformed(self):
        with pytest.raises(InputError):
            codegree(EDGE, (0, 0))
        with pytest.raises(InputError):
            codegree(EDGE, (0, 7))

    def test_links(self):
        assert link(EDGE, 0) == {(1, 2)}
        assert link(K4, 0) == {(1, 2), (1, 3), (2, 3)}
        assert link(Hypergraph(3, 5), 3) == frozenset()


class TestNorms:
    def test_examples(self):
        assert lp_norm(EDGE, 2) == 3
        assert lp_norm(K4, 2) == 24
        assert lp_norm(S2, 2) == 8
        assert count_s2(EDGE) == 0
        assert count_s2(K4) == 6
        assert count_s2(S2) == 1

    def test_s2_requires_3_graph(self):
        with pytest.raises(UnsupportedUniformity):
            count_s2(Hypergraph(2, 3, ((0, 1),)))

    def test_lp_requires_positive_p(self):
        with pytest.raises(InputError):
            lp_norm(EDGE, 0)

    @given(hypergraphs(max_n=9))
    def test_s2_identity(self, H):
        assert 2 * count_s2(H) == lp_norm(H, 2) - 3 * len(H)

    @given(hypergraphs(max_n=8))
    def test_l1_is_three_times_edges(self, H):
        assert lp_norm(H, 1) == 3 * len(H)

    @given(hypergraphs(max_n=7))
    def test_s2_matches_four_set_oracle(self, H):
        assert count_s2(H) == s2_oracle(H)


class TestInducedDensity:
    def test_examples(self):
        assert induced_density(EDGE, K4) == 1
        assert induced_density(S2, K4) == 0
        assert induced_density(S2, complete_partite(3, (1, 1, 2))) == 1

    @given(hypergraphs(min_n=4, max_n=7), st.randoms(use_true_random=False))
    def test_isomorphism_invariant(self, H, rnd):
        perm = list(range(H.n))
        rnd.shuffle(perm)
        assert induced_density(S2, H) == induced_density(S2, H.relabel(perm))

    @given(hypergraphs(min_n=4, max_n=7))
    def test_densities_sum_to_one(self, H):
        classes = all_classes(4)
        assert sum(induced_density(F, H) for F in classes) == 1

    def test_too_large_pattern_is_zero_or_error(self):
        val = None
        try:
            val = induced_density(K4, EDGE)
        except InputError:
            return
        assert val == Fraction(0)


class TestBlowup:
    def test_single_edge(self):
        B = blowup(EDGE, 2)
        assert B.n == 6 and len(B) == 8
        assert is_isomorphic(B, complete_partite(3, (2, 2, 2)))

    def test_identity(self):
        assert is_isomorphic(blowup(S2, 1), S2)

    def test_s2(self):
        B = blowup(S2, 2)
        assert (B.n, len(B)) == (8, 16)

    def test_bad_factor(self):
        with pytest.raises(InputError):
            blowup(EDGE, 0)


class TestHomomorphisms:
    def test_examples(self):
        assert homomorphism_exists(make_tight_cycle_minus(5), make_k4_minus())
        assert homomorphism_exists(make_tight_cycle_minus(7), make_tight_cycle_minus(5))
        assert not homomorphism_exists(K4, make_tight_cycle_minus(5))

    def test_agrees_with_blowup_and_brute_force(self):
        rng = random.Random(5)
        for _ in range(40):
            F = random_graph(rng, rng.randint(3, 5), 0.4)
            G = random_graph(rng, rng.randint(3, 4), 0.6)
            want = hom_oracle(F, G)
            assert homomorphism_exists(F, G) == want
            assert contains(blowup(G, F.n), F) == want


class TestCanonicalForm:
    def test_automorphism_counts(self):
        assert canonical_form(EDGE).automorphism_count == 6
        assert canonical_form(make_k4_minus()).automorphism_count == 6
        assert canonical_form(S2).automorphism_count == 4

    def test_relabeling_is_applied(self):
        H = make_tight_cycle_minus(5)
        cf = canonical_form(H)
        assert H.relabel(cf.relabeling).edges == cf.canonical_edges

    def test_random_relabelings(self):
        rng = random.Random(11)
        for _ in range(200):
            n = rng.randint(1, 8)
            H = random_graph(rng, n, rng.random())
            perm = list(range(n))
            rng.shuffle(perm)
            assert canonical_form(H).canonical_edges == canonical_form(H.relabel(perm)).canonical_edges

    def test_aut_matches_brute_force(self):
        rng = random.Random(3)
        for _ in range(60):
            H = random_graph(rng, rng.randint(1, 6), rng.random())
            assert canonical_form(H).automorphism_count == aut_oracle(H)

    def test_non_isomorphic_codes_differ(self):
        classes = all_classes(5)
        codes = {canonical_form(G).canonical_edges for G in classes}
        assert len(codes) == len(classes) == 34


class TestTextFormat:
    def test_round_trip(self):
        H = Hypergraph(3, 5, ((0, 1, 2), (1, 3, 4)), colors=(1, 2, 3, 1, 2))
        text = format_hypergraph(H, parts=(1, 1, 2, 3, 3))
        G, extras = parse_hypergraph(text)
        assert G == H and extras["parts"] == (1, 1, 2, 3, 3)

    def test_comments_and_whitespace(self):
        H, _ = parse_hypergraph("# a comment\n  3 4 1  \n0   1 3 # tail\n\n")
        assert H.edges == ((0, 1, 3),)

    @pytest.mark.parametrize("text", ["", "3 4\n", "3 4 2\n0 1 2\n", "3 4 1\n0 1 x\n", "3 4 1\n0 1 2\nfoo: 1\n"])
    def test_malformed(self, text):
        with pytest.raises(InputError):
            parse_hypergraph(text)
