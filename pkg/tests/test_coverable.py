# pylint: disable=redefined-outer-name, missing-function-docstring
import importlib.resources as pkg_resources
import json
from itertools import product
from random import Random

import pytest

from edgecsp.coverable import CoverOracle, CoverableSolver, GcFunction, \
    build_restricted_instance, cover_coindependent, cover_compact, \
    cover_identified, cover_interference_free, cover_product, \
    even_neighbors, even_zebra_cover_search, find_general_augmenting_walk, \
    gc_ones_count, is_coindependent, is_compact_like, is_even_zebra, \
    is_gap2_free, lift_general, normalize_tag, oracle_map_for, \
    reachable_set, solve_coverable, verify_cover
from edgecsp.dmatroid import Relation, contains_interference_minor, \
    direct_product, even_part, identify, interference_matroid, \
    is_delta_matroid, ones
from edgecsp.errors import CoverError, InstanceError, SolverRefusal
from edgecsp.generators import random_coindependent, random_compact, \
    random_coverable_instance, random_delta_matroid, \
    random_even_delta_matroid
from edgecsp.instance import EdgeLabeling, Instance, brute_force_optimum, \
    inconsistency_count, initial_labeling, is_valid
from edgecsp.utils import FIXTURES
from edgecsp.walks import is_augmenting

from . import templates


def load_template(name):
    return Instance.from_dict(
        json.loads(pkg_resources.read_text(templates, name)))


@pytest.fixture
def interference():
    '''Returns the ternary interference Δ-matroid'''
    return interference_matroid()


@pytest.fixture
def odd_pair():
    '''Returns a co-independent constraint facing the constant 11'''
    return load_template('odd_pair.json')


def bits_of(*texts):
    return {tuple(int(c) for c in text) for text in texts}


def test_even_neighbors(interference):
    assert even_neighbors(interference, (0, 0, 0)) == \
        bits_of('110', '101', '011')
    assert even_neighbors(interference, (1, 1, 1)) == set()
    with pytest.raises(CoverError):
        even_neighbors(interference, (1, 0, 0))


def test_reachable_set(interference):
    assert reachable_set(interference, (0, 0, 0)) == \
        bits_of('000', '110', '101', '011')
    assert reachable_set(interference, (1, 1, 1)) == bits_of('111')


@pytest.mark.parametrize('alpha', ['000', '111'])
def test_listed_interference_covers(interference, alpha):
    tuples = FIXTURES['interference_covers'][alpha]
    cover = Relation.from_strings(interference.scope, tuples)
    assert verify_cover(interference, tuple(map(int, alpha)), cover) == []


def test_verify_cover_reports_items(interference):
    alpha = (0, 0, 0)
    assert {v.item for v in verify_cover(interference, alpha,
                                         interference)} == {1}
    missing = verify_cover(interference, alpha,
                           Relation.from_strings(interference.scope,
                                                 ['000']))
    assert [v.item for v in missing] == [2, 2, 2]
    renamed = Relation.from_strings(('x', 'y', 'z'), ['000'])
    assert verify_cover(interference, alpha, renamed)[0].item == 1

    single = Relation.from_strings(('a', 'b'), ['00'])
    loose = Relation.from_strings(('a', 'b'), ['00', '11'])
    assert [v.item for v in verify_cover(single, (0, 0), loose)] == [3]
    tight = Relation.from_strings(('a', 'b'), ['00', '01', '10'])
    assert verify_cover(tight, (0, 0), loose) == []


def test_coindependent(interference):
    assert is_coindependent(interference)
    matching = Relation.from_strings(('a', 'b', 'c'), ['100', '010', '001'])
    assert not is_coindependent(matching)
    assert not is_coindependent(Relation(('a',), ()))

    cover = cover_coindependent(interference, (0, 0, 0))
    assert cover == even_part(interference)
    with pytest.raises(CoverError):
        cover_coindependent(matching, (1, 0, 0))
    with pytest.raises(CoverError):
        cover_coindependent(interference, (1, 0, 0))


def test_gc_functions():
    assert gc_ones_count((1, 0, 1)) == 2
    assert gc_ones_count.check_axioms(4) == []
    doubled = GcFunction('doubled', lambda bits: 2 * ones(bits))
    assert doubled.check_axioms(3)
    assert gc_ones_count.check_axioms(12, samples=16, seed=3) == []


@pytest.mark.parametrize('values, expected', [
    ([0, 1, 3], True),
    ([1, 3, 5], True),
    ([0, 3], False),
    ([], True),
    ([2], True),
])
def test_is_gap2_free(values, expected):
    assert is_gap2_free(values) is expected


def test_compact():
    scope = ('a', 'b', 'c')
    relation = Relation.from_strings(scope, ['000', '100', '010', '001',
                                             '111'])
    assert is_compact_like(relation, gc_ones_count, [0, 1, 3])
    assert not is_compact_like(relation, gc_ones_count, [0, 1])
    with pytest.raises(CoverError):
        is_compact_like(relation, gc_ones_count, [0, 3])

    even_cover = cover_compact(relation, gc_ones_count, [0, 1, 3],
                               (0, 0, 0))
    assert set(even_cover.tuples) == bits_of('000', '110', '101', '011')
    assert verify_cover(relation, (0, 0, 0), even_cover) == []
    odd_cover = cover_compact(relation, gc_ones_count, [0, 1, 3],
                              (1, 1, 1))
    assert set(odd_cover.tuples) == bits_of('100', '010', '001', '111')
    assert verify_cover(relation, (1, 1, 1), odd_cover) == []

    with pytest.raises(CoverError):
        cover_compact(relation, gc_ones_count, [0, 1], (0, 0, 0))


def test_interference_free(interference):
    relation = Relation.from_strings(('a', 'b'), ['00', '01', '10'])
    cover = cover_interference_free(relation, (0, 0))
    assert cover.tuples == ((0, 0),)
    assert verify_cover(relation, (0, 0), cover) == []
    matching = Relation.from_strings(('a', 'b', 'c'), ['100', '010', '001'])
    assert cover_interference_free(matching, (0, 1, 0)) == matching
    with pytest.raises(CoverError):
        cover_interference_free(interference, (0, 0, 0))
    with pytest.raises(CoverError):
        cover_interference_free(
            Relation.from_strings(('a', 'b', 'c'), ['000', '111']),
            (0, 0, 0))


def test_zebra_search(interference):
    assert even_zebra_cover_search(interference, (0, 0, 0)) == \
        even_part(interference)
    assert even_zebra_cover_search(interference, (1, 1, 1)).tuples == \
        ((1, 1, 1),)
    assert is_even_zebra(interference)
    with pytest.raises(CoverError):
        even_zebra_cover_search(interference, (0, 0, 0), max_arity=2)


def test_zebra_search_can_fail():
    relation = Relation.from_strings(('a', 'b', 'c', 'd'),
                                     ['0000', '1111'])
    assert even_zebra_cover_search(relation, (0, 0, 0, 0)) is None
    assert not is_even_zebra(relation)


@pytest.mark.parametrize('seed', range(10))
def test_zebra_covers_verify(seed):
    rng = Random(seed)
    relation = random_delta_matroid(rng, 3)
    for alpha in relation:
        cover = even_zebra_cover_search(relation, alpha)
        if cover is not None:
            assert verify_cover(relation, alpha, cover) == []


def test_zebra_search_fails_on_a_product():
    relation = Relation.from_strings(('a', 'b', 'c', 'd'),
                                     ['0000', '1111'])
    squared = direct_product(relation, relation.rename(
        {'a': 'e', 'b': 'f', 'c': 'g', 'd': 'h'}))
    assert even_zebra_cover_search(squared, (0,) * 8) is None


def test_cover_product(interference):
    single = Relation.from_strings(('w',), ['1'])
    cover = cover_product(even_part(interference), single)
    joined = direct_product(interference, single)
    assert verify_cover(joined, (0, 0, 0, 1), cover) == []


def test_cover_identified(interference):
    oracle = CoverOracle('coindependent')
    cover = cover_identified(interference, 'v1', 'v2', (0,), oracle)
    assert cover.scope == ('v3',)
    assert cover.tuples == ((0,),)
    assert cover_identified(interference, 'v1', 'v2', (0,),
                            lambda rel, bits: even_part(rel)) == cover
    matching = Relation.from_strings(('a', 'b', 'c'), ['100', '010', '001'])
    with pytest.raises(CoverError):
        cover_identified(matching, 'a', 'b', (0,), oracle)


@pytest.mark.parametrize('tag, expected', [
    ('interferenceFree', 'interference_free'),
    ('interference-free', 'interference_free'),
    ('interference_free', 'interference_free'),
    ('co-independent', 'coindependent'),
    ('CoIndependent', 'coindependent'),
    ('Compact', 'compact'),
])
def test_normalize_tag(tag, expected):
    assert normalize_tag(tag) == expected


def test_cover_oracle_configuration(interference):
    assert CoverOracle.from_config('even').tag == 'even'
    oracle = CoverOracle.from_config({'class': 'compact',
                                      'params': {'gc': 'ones', 'S': [1]}})
    assert oracle.to_dict() == {'class': 'compact',
                                'params': {'gc': 'ones', 'S': [1]}}
    assert oracle.gc() is gc_ones_count
    with pytest.raises(CoverError):
        CoverOracle('bogus')
    with pytest.raises(CoverError):
        CoverOracle.from_config({'params': {}})
    with pytest.raises(CoverError):
        CoverOracle('compact').cover(interference, (0, 0, 0))
    with pytest.raises(CoverError):
        CoverOracle('even').cover(interference, (0, 0, 0))


def test_custom_oracle(interference):
    oracle = CoverOracle('custom',
                         {'covers': FIXTURES['interference_covers']})
    assert oracle.cover(interference, (1, 1, 1)).tuples == ((1, 1, 1),)
    with pytest.raises(CoverError):
        oracle.cover(interference, (1, 1, 0))
    direct = CoverOracle('custom', function=lambda rel, bits: even_part(rel))
    assert direct.cover(interference, (0, 0, 0)) == even_part(interference)


def test_oracle_map_for(odd_pair, interference):
    oracles = oracle_map_for(odd_pair)
    assert oracles['A'].tag == 'coindependent'
    assert oracles['B'].tag == 'even'
    bare = Instance.from_relations([('A', interference),
                                    ('B', interference)])
    with pytest.raises(SolverRefusal):
        oracle_map_for(bare)


def test_build_restricted_instance(odd_pair):
    labeling = initial_labeling(odd_pair)
    oracles = oracle_map_for(odd_pair)
    chosen = Relation.from_strings(('a', 'b'), ['01'])
    restricted = build_restricted_instance(odd_pair, labeling, 'A', chosen,
                                           oracles)
    assert restricted.relation('A').tuples == ((0, 1),)
    assert restricted.relation('B').tuples == ((1, 1),)
    with pytest.raises(InstanceError):
        build_restricted_instance(odd_pair, labeling, 'A',
                                  Relation.from_strings(('a', 'b'), ['11']),
                                  oracles)


def test_restriction_refuses_bad_covers(odd_pair):
    labeling = initial_labeling(odd_pair)
    oracles = {'A': CoverOracle('custom', {'covers': {'00': ['00', '01']}}),
               'B': CoverOracle('even')}
    chosen = Relation.from_strings(('a', 'b'), ['11'])
    with pytest.raises(SolverRefusal):
        build_restricted_instance(odd_pair, labeling, 'B', chosen, oracles)
    oracles['A'] = CoverOracle('custom', {'covers': {'00': ['00', '11']}})
    restricted = build_restricted_instance(odd_pair, labeling, 'B', chosen,
                                           oracles)
    assert set(restricted.relation('A').tuples) == bits_of('00', '11')


def test_general_augmenting_walk(odd_pair):
    labeling = initial_labeling(odd_pair)
    better = EdgeLabeling.from_tuples(odd_pair, {'A': (0, 1), 'B': (1, 1)})
    walk = find_general_augmenting_walk(odd_pair, labeling, better)
    assert walk.half_integral
    assert str(walk) == 'b -A'
    assert is_augmenting(odd_pair, labeling, walk)

    lifted = lift_general(odd_pair, labeling, 'A', (0, 1), better)
    assert lifted == walk
    with pytest.raises(InstanceError):
        lift_general(odd_pair, labeling, 'A', (1, 0), better)


def test_solver_uses_half_integral_walks(odd_pair):
    solver = CoverableSolver()
    labeling, count = solver.optimize(odd_pair)
    assert count == 1
    assert is_valid(odd_pair, labeling)
    assert solver.stats['half_integral'] == 1
    assert solver.stats['rounds'] == 1
    assert count == brute_force_optimum(odd_pair)[0]


def test_solver_on_mixed_instance():
    instance = load_template('coverable.json')
    labeling, count = solve_coverable(instance)
    assert count == 0
    assert inconsistency_count(instance, labeling) == 0


def test_solver_refuses_missing_oracle(interference):
    bare = Instance.from_relations([('A', interference),
                                    ('B', interference)])
    with pytest.raises(SolverRefusal):
        solve_coverable(bare)


@pytest.mark.parametrize('seed', range(15))
def test_random_coverable_instances_agree_with_oracle(seed):
    instance = random_coverable_instance(Random(seed), max_constraints=4)
    labeling, count = solve_coverable(instance)
    assert is_valid(instance, labeling)
    assert count == brute_force_optimum(instance)[0]


@pytest.mark.parametrize('seed', [8, 73, 199])
def test_exchange_partners_come_from_the_difference(seed):
    instance = random_coverable_instance(Random(seed))
    labeling, count = solve_coverable(instance)
    assert is_valid(instance, labeling)
    assert count == brute_force_optimum(instance)[0]


@pytest.mark.slow
def test_coverable_sweep_agrees_with_oracle():
    for seed in range(200):
        instance = random_coverable_instance(Random(seed))
        labeling, count = solve_coverable(instance)
        assert is_valid(instance, labeling)
        assert count == brute_force_optimum(instance)[0], seed


@pytest.mark.slow
def test_parallel_scan_matches_serial():
    instance = random_coverable_instance(Random(7))
    serial = solve_coverable(instance)
    assert solve_coverable(instance, nprocs=2) == serial


@pytest.mark.slow
def test_interference_square_is_not_an_even_zebra(interference):
    square = direct_product(interference, interference.rename(
        {'v1': 'w1', 'v2': 'w2', 'v3': 'w3'}))
    assert even_zebra_cover_search(square, (0, 0, 0, 1, 1, 1)) is None


def coindependent_pair(seed):
    rng = Random(seed)
    return (random_coindependent(rng, 2, ('a', 'b')),
            random_coindependent(rng, 2, ('c', 'd')))


@pytest.mark.parametrize('seed', range(100))
def test_products_keep_covers_and_reachability(seed):
    left, right = coindependent_pair(seed)
    joined = direct_product(left, right)
    for alpha, beta in product(left.tuples, right.tuples):
        cover = cover_product(cover_coindependent(left, alpha),
                              cover_coindependent(right, beta))
        assert verify_cover(joined, alpha + beta, cover) == []
        for bits in reachable_set(joined, alpha + beta):
            assert bits[:2] in reachable_set(left, alpha)
            assert bits[2:] in reachable_set(right, beta)


@pytest.mark.parametrize('seed', range(100))
def test_identification_keeps_covers(seed):
    left, right = coindependent_pair(seed)
    joined = direct_product(left, right)

    def cover_of_product(relation, bits):
        return cover_product(cover_coindependent(left, bits[:2]),
                             cover_coindependent(right, bits[2:]))

    merged = identify(joined, 'b', 'c')
    for alpha in merged:
        cover = cover_identified(joined, 'b', 'c', alpha, cover_of_product)
        assert verify_cover(merged, alpha, cover) == []


def small_delta_matroids():
    '''Yields every Δ-matroid of arity 1 to 3 over (a, b, c)'''
    for arity in range(1, 4):
        cube = list(product((0, 1), repeat=arity))
        for mask in range(1, 2 ** len(cube)):
            relation = Relation(('a', 'b', 'c')[:arity],
                                tuple(bits for i, bits in enumerate(cube)
                                      if mask >> i & 1))
            if is_delta_matroid(relation):
                yield relation


def builtin_covers(relation, values=None):
    '''Yields the cover constructions of every built-in class holding M'''
    if is_coindependent(relation):
        yield cover_coindependent
    values = {ones(bits) for bits in relation} if values is None else values
    if is_gap2_free(values) and \
            is_compact_like(relation, gc_ones_count, values):
        yield lambda rel, alpha: cover_compact(rel, gc_ones_count, values,
                                               alpha)
    if not contains_interference_minor(relation):
        yield cover_interference_free


def sampled_class_members():
    '''Yields (relation, values) for co-independent, compact and
    interference-free relations of arity 4 and 5'''
    for seed in range(60):
        rng = Random(seed)
        for arity in (4, 5):
            yield random_coindependent(rng, arity), None
            yield random_compact(rng, arity)
            yield random_even_delta_matroid(rng, arity), None


@pytest.mark.slow
def test_builtin_oracles_build_verified_covers():
    cases = 0
    members = [(r, None) for r in small_delta_matroids()]
    for relation, values in members + list(sampled_class_members()):
        for build in builtin_covers(relation, values):
            for alpha in relation:
                cover = build(relation, alpha)
                assert verify_cover(relation, alpha, cover) == [], \
                    (relation, alpha)
                cases += 1
    assert cases >= 1000
