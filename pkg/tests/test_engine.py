import copy
import random
from fractions import Fraction

import pytest

from dynmatch.engine import Engine
from dynmatch.errors import DuplicateEdge, MissingEdge, SelfLoop
from dynmatch.graph import matching_is_valid
from dynmatch.sampler import sample_probability


def state(eng):
    return (
        sorted(eng.graph.edges()),
        list(eng.partition.level),
        dict(eng.partition.edge_level),
        sorted(eng.kernel.H_edges),
        sorted(eng.matcher.current.edges),
        eng.matcher.epoch_budget,
    )


def test_empty_engine():
    eng = Engine(16)
    assert len(eng.current_matching()) == 0
    assert eng.validate()


def test_first_insert_sampled_with_certainty():
    eng = Engine(64)
    K = eng.params.K
    # the first edge sits at the floor level; w * d >= 1 for the derived d
    assert sample_probability(eng.params.beta**-K, eng.d_auto) == 1
    rep = eng.insert(3, 7)
    assert rep.C == 1 and rep.kernel_added == 1
    assert eng.matching_size() == 1 and rep.matching_size == 1


def test_duplicate_insert_is_atomic():
    eng = Engine(16, seed=2)
    for u, v in [(0, 1), (1, 2), (2, 3)]:
        eng.insert(u, v)
    before = state(eng)
    with pytest.raises(DuplicateEdge):
        eng.insert(2, 1)
    with pytest.raises(SelfLoop):
        eng.insert(4, 4)
    with pytest.raises(MissingEdge):
        eng.delete(0, 5)
    assert state(eng) == before


def test_delete_lone_edge():
    eng = Engine(8)
    eng.insert(0, 1)
    rep = eng.delete(1, 0)
    assert rep.matching_size == 0 and eng.matching_size() == 0


def test_triangle():
    eng = Engine(3)
    for u, v in [(0, 1), (1, 2), (0, 2)]:
        eng.insert(u, v)
    assert eng.matching_size() == 1


def random_updates(rng, n, steps, p_delete=0.4, max_live=None, bipartite=False):
    live, present = [], set()
    for _ in range(steps):
        if live and (rng.random() < p_delete or (max_live and len(live) >= max_live)):
            e = live.pop(rng.randrange(len(live)))
            present.discard(e)
            yield "-", e
            continue
        while True:
            if bipartite:
                u, v = rng.randrange(0, n, 2), rng.randrange(1, n, 2)
            else:
                u, v = rng.sample(range(n), 2)
            e = (min(u, v), max(u, v))
            if e not in present:
                break
        present.add(e)
        live.append(e)
        yield "+", e


def test_mixed_updates_validated_every_step():
    rng = random.Random(1)
    eng = Engine(64, seed=5)
    for kind, e in random_updates(rng, 64, 1500, max_live=200):
        rep = eng.insert(*e) if kind == "+" else eng.delete(*e)
        assert rep.C >= 1 and rep.kernel_added + rep.kernel_removed <= 3 * rep.C
        v = eng.validate()
        assert v.ok, v


def test_small_d_validated_every_step():
    rng = random.Random(2)
    eng = Engine(48, seed=6, d_override=3)
    assert eng.whp_void
    for kind, e in random_updates(rng, 48, 1500, max_live=150):
        eng.insert(*e) if kind == "+" else eng.delete(*e)
        v = eng.validate()
        assert v.ok, v
        assert max(eng.kernel.deg_H) <= eng.config.cap


def test_whp_flag_auto():
    assert not Engine(200).whp_void
    assert Engine(200, d_override=8).whp_void


def test_non_kernel_deletion_leaves_matching():
    rng = random.Random(3)
    eng = Engine(40, seed=1, d_override=2)
    for kind, e in random_updates(rng, 40, 300, p_delete=0.1):
        eng.insert(*e) if kind == "+" else eng.delete(*e)
    outside = [e for e in eng.graph.edges() if e not in eng.kernel.H_edges]
    assert outside
    quiet = 0
    for e in outside:
        trial = copy.deepcopy(eng)
        before = set(trial.current_matching().edges)
        rep = trial.delete(*e)
        if rep.kernel_added == rep.kernel_removed == 0:
            quiet += 1
            assert set(trial.current_matching().edges) == before
    assert quiet > 0


def test_stream_then_inverse_empties():
    rng = random.Random(4)
    eng = Engine(32, seed=9)
    ops = list(random_updates(rng, 32, 600))
    for kind, e in ops:
        eng.insert(*e) if kind == "+" else eng.delete(*e)
    for kind, e in reversed(ops):
        eng.delete(*e) if kind == "+" else eng.insert(*e)
    assert eng.graph.m == 0 and eng.matching_size() == 0
    assert not eng.kernel.H_edges and all(lvl == eng.params.K for lvl in eng.partition.level)


def test_same_seed_same_trajectory():
    def run(seed):
        rng = random.Random(5)
        eng = Engine(40, seed=seed, d_override=4)
        sizes = []
        for kind, e in random_updates(rng, 40, 800):
            rep = eng.insert(*e) if kind == "+" else eng.delete(*e)
            sizes.append((rep.matching_size, rep.kernel_added, rep.kernel_removed))
        return sizes, sorted(eng.current_matching().edges)

    assert run(1) == run(1)


def test_matching_always_inside_graph():
    rng = random.Random(6)
    eng = Engine(100, Fraction(1, 4), seed=3, d_override=5)
    for kind, e in random_updates(rng, 100, 1000, bipartite=True):
        eng.insert(*e) if kind == "+" else eng.delete(*e)
        assert matching_is_valid(eng.graph, eng.current_matching().edges)
