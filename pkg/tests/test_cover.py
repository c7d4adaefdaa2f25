import itertools
import math

import numpy as np
import pytest

from shiftpress.cover import (
    CylinderTree,
    build_tree,
    enumerate_cover_costs,
    is_antichain_cover,
    optimal_cover_dp,
)
from shiftpress.errors import Infeasible
from shiftpress.targets import FrequencyWindow, Full, Subshift, word_count


def all_covers(word, k, depth):
    """Every antichain cover of the subtree at ``word``, as sets of words."""
    if len(word) == depth:
        return [frozenset([word])]
    out = [frozenset([word])]
    kids = [all_covers(word + (j,), k, depth) for j in range(1, k + 1)]
    for combo in itertools.product(*kids):
        out.append(frozenset().union(*combo))
    return out


def random_weights(rng, k, depth):
    return {w: float(rng.uniform(0.01, 1.0)) for d in range(depth + 1) for w in itertools.product(range(1, k + 1), repeat=d)}


class TestExplicitTrees:
    def test_single_node(self):
        sol = optimal_cover_dp(CylinderTree.explicit(2, 0, {(): 0.7}))
        assert sol.cost == pytest.approx(0.7, rel=1e-15)
        assert sol.witness == ((),)

    def test_geometric_weights_are_additive(self):
        tree = CylinderTree.explicit(2, 2, lambda w: 2.0 ** -len(w))
        sol = optimal_cover_dp(tree)
        assert sol.cost == pytest.approx(1.0, rel=1e-15)
        leaves = list(itertools.product((1, 2), repeat=2))
        assert is_antichain_cover(sol.witness, leaves)

    def test_cover_count_depth_five(self):
        tree = CylinderTree.explicit(2, 5, lambda w: 1.0)
        assert len(enumerate_cover_costs(tree)) == 458_330

    @pytest.mark.parametrize("k,depth", [(2, 3), (3, 2), (2, 4)])
    def test_enumerator_matches_set_oracle(self, rng, k, depth):
        wts = random_weights(rng, k, depth)
        covers = all_covers((), k, depth)
        expect = sorted(sum(wts[w] for w in c) for c in covers)
        got = sorted(enumerate_cover_costs(CylinderTree.explicit(k, depth, wts)))
        assert len(got) == len(expect)
        np.testing.assert_allclose(got, expect, rtol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_dp_matches_set_oracle(self, seed):
        rng = np.random.default_rng(seed)
        wts = random_weights(rng, 2, 4)
        best = min(sum(wts[w] for w in c) for c in all_covers((), 2, 4))
        sol = optimal_cover_dp(CylinderTree.explicit(2, 4, wts))
        assert sol.cost == pytest.approx(best, rel=1e-12)
        assert sum(wts[w] for w in sol.witness) == pytest.approx(best, rel=1e-12)

    def test_min_depth(self):
        tree = CylinderTree.explicit(2, 3, lambda w: 2.0 ** -len(w) if len(w) else 0.1)
        assert optimal_cover_dp(tree).cost == pytest.approx(0.1)
        sol = optimal_cover_dp(tree, min_depth=2)
        assert sol.cost == pytest.approx(1.0)
        assert all(len(w) >= 2 for w in sol.witness)

    def test_infeasible(self):
        tree = CylinderTree.explicit(2, 1, {(): math.inf, (1,): 1.0, (2,): math.inf})
        with pytest.raises(Infeasible):
            optimal_cover_dp(tree)

    def test_witness_limit(self):
        tree = CylinderTree.explicit(2, 3, lambda w: 1.0 if len(w) == 3 else 9.0)
        sol = optimal_cover_dp(tree, witness_limit=0)
        assert sol.witness is None and sol.witness_size == 8


class TestBuiltTrees:
    @pytest.mark.parametrize(
        "Z", [Full(), Subshift(("11",)), FrequencyWindow({1: (0.3, 0.6)})], ids=["full", "no11", "freq"]
    )
    def test_leaf_count(self, geo2, Z):
        D = 9
        tree = build_tree(geo2, Z, D)
        assert tree.n_leaves == word_count(geo2, Z, D)

    def test_lumping_is_lossless(self, geo2, no11):
        a = build_tree(geo2, no11, 8, lump=True)
        b = build_tree(geo2, no11, 8, lump=False)
        assert a.n_classes < b.n_classes
        for tree in (a, b):
            tree.set_weights(lambda d, lv: np.full(lv.size, -0.7 * d))
        assert optimal_cover_dp(a).log_cost == pytest.approx(optimal_cover_dp(b).log_cost, abs=1e-12)

    def test_empty_target(self, geo2):
        Z = Subshift(("11", "12", "21", "22"))
        tree = build_tree(geo2, Z, 3)
        assert tree.empty
        assert optimal_cover_dp(tree).cost == 0.0
