# pylint: disable=redefined-outer-name, missing-function-docstring
from itertools import permutations
from random import Random

import pytest

from edgecsp.dmatroid import EVEN_RELATIONS, Relation, complement, contains, \
    contains_interference_minor, d_transform, direct_product, even_part, \
    even_relation, exchange_repairs, fixture_relation, flip_bits, \
    flip_values, format_bits, identify, interference_matroid, \
    is_delta_matroid, is_even, is_even_delta_matroid, is_isomorphic_by_flips, \
    is_self_complementary, minor_fix, odd_part, parity_class, parse_bits, \
    planar_tractability_report
from edgecsp.errors import RelationError
from edgecsp.generators import random_even_delta_matroid


@pytest.fixture
def interference():
    '''Returns the ternary interference Δ-matroid'''
    return interference_matroid()


@pytest.fixture
def matching3():
    '''Returns M_3 over (a, b, c)'''
    return Relation.from_strings(('a', 'b', 'c'), ['100', '010', '001'])


def test_parse_and_format_bits():
    assert parse_bits('0110', 4) == (0, 1, 1, 0)
    assert format_bits((1, 0, 1)) == '101'
    assert flip_bits((0, 0, 1), {0, 2}) == (1, 0, 0)
    assert complement((1, 0)) == (0, 1)


@pytest.mark.parametrize('text, arity', [('011', 2), ('0a1', 3), ('', 1)])
def test_parse_bits_rejects(text, arity):
    with pytest.raises(RelationError):
        parse_bits(text, arity)


def test_relation_is_canonical():
    relation = Relation.from_strings(('a', 'b'), ['11', '00', '11'])
    assert relation.tuples == ((0, 0), (1, 1))
    assert len(relation) == 2
    assert (1, 1) in relation
    assert contains(relation, [0, 0])


def test_relation_rejects_repeated_scope():
    with pytest.raises(RelationError):
        Relation(('a', 'a'), ((0, 0),))


def test_relation_rejects_arity_mismatch():
    with pytest.raises(RelationError):
        Relation(('a', 'b'), ((0, 0, 1),))


def test_contains_rejects_wrong_arity(matching3):
    with pytest.raises(RelationError):
        contains(matching3, (1, 0))


def test_relation_document(interference):
    document = interference.to_dict()
    assert document['scope'] == ['v1', 'v2', 'v3']
    assert document['tuples'] == ['000', '011', '101', '110', '111']
    assert Relation.from_dict(document) == interference


def test_reorder_and_rename(matching3):
    moved = Relation.from_strings(('a', 'b'), ['10']).reorder(('b', 'a'))
    assert moved.tuples == ((0, 1),)
    renamed = matching3.rename({'a': 'x'})
    assert renamed.scope == ('x', 'b', 'c')
    assert renamed.tuples == matching3.tuples
    with pytest.raises(RelationError):
        matching3.reorder(('a', 'b'))


@pytest.mark.parametrize('scope, tuples, expected', [
    (('v1', 'v2', 'v3'), ['000', '110', '101', '011', '111'], True),
    (('a', 'b'), ['00', '11'], True),
    (('a',), ['0', '1'], True),
    (('a', 'b', 'c'), ['000', '111'], False),
    (('a', 'b', 'c', 'd'), ['0000', '1111'], False),
    (('a', 'b', 'c'), ['100', '010', '001'], True),
])
def test_is_delta_matroid(scope, tuples, expected):
    assert is_delta_matroid(Relation.from_strings(scope, tuples)) is expected


def test_is_delta_matroid_rejects_empty():
    with pytest.raises(RelationError):
        is_delta_matroid(Relation(('a',), ()))


def test_evenness(interference, matching3):
    assert not is_even(interference)
    assert is_even(matching3)
    assert is_even_delta_matroid(matching3)
    assert not is_even_delta_matroid(interference)
    assert not is_even_delta_matroid(Relation(('a',), ()))


@pytest.mark.parametrize('name', ['x', 'y', 'counterexample'])
def test_fixture_relations_are_even_delta_matroids(name):
    assert is_even_delta_matroid(fixture_relation(name))


def test_unknown_fixture_relation():
    with pytest.raises(RelationError):
        fixture_relation('nope')


def test_direct_product(matching3):
    single = Relation.from_strings(('d',), ['1'])
    product = direct_product(matching3, single)
    assert product.scope == ('a', 'b', 'c', 'd')
    assert len(product) == 3
    assert is_even_delta_matroid(product)
    with pytest.raises(RelationError):
        direct_product(matching3, matching3)


def test_identify(interference):
    merged = identify(interference, 'v1', 'v2')
    assert merged.scope == ('v3',)
    assert merged.tuples == ((0,), (1,))
    with pytest.raises(RelationError):
        identify(interference, 'v1', 'v1')


def test_identify_may_be_empty():
    relation = Relation.from_strings(('a', 'b'), ['10', '01'])
    merged = identify(relation, 'a', 'b')
    assert merged.is_empty()
    assert merged.scope == ()


def test_minor_fix(interference):
    minor = minor_fix(interference, 'v1', 1)
    assert minor.scope == ('v2', 'v3')
    assert set(minor.tuples) == {(1, 0), (0, 1), (1, 1)}


def test_flip_values(interference):
    flipped = flip_values(interference, ['v1'])
    assert set(flipped.tuples) == {(1, 0, 0), (0, 1, 0), (0, 0, 1),
                                   (1, 1, 1), (0, 1, 1)}
    assert flip_values(interference, [0]) == flipped
    assert is_isomorphic_by_flips(interference, flipped)
    assert not is_isomorphic_by_flips(interference,
                                      parity_class(('a', 'b', 'c'), 0))


@pytest.mark.parametrize('seed', range(10))
def test_flips_and_permutations_keep_even_delta_matroids(seed):
    rng = Random(seed)
    relation = random_even_delta_matroid(rng, 4)
    mask = [i for i in range(4) if rng.random() < 0.5]
    assert is_even_delta_matroid(flip_values(relation, mask))
    for order in list(permutations(relation.scope))[:6]:
        assert is_even_delta_matroid(relation.reorder(order))


def test_interference_minor(interference, matching3):
    assert contains_interference_minor(interference)
    assert not contains_interference_minor(matching3)
    padded = direct_product(interference, Relation.from_strings(('w',),
                                                                ['0']))
    assert contains_interference_minor(padded)
    assert contains_interference_minor(flip_values(interference, ['v2']))


def test_d_transform_and_self_complement():
    relation = Relation.from_strings(('a', 'b'), ['00', '11'])
    assert d_transform(relation).tuples == ((0, 0),)
    assert is_self_complementary(relation)
    assert not is_self_complementary(interference_matroid())
    with pytest.raises(RelationError):
        d_transform(Relation.from_strings(('a',), ['0']))


def test_parity_classes(interference):
    assert len(parity_class(('a', 'b', 'c', 'd'), 1)) == 8
    assert set(even_part(interference).tuples) == {
        (0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)}
    assert odd_part(interference).tuples == ((1, 1, 1),)
    assert len(even_relation(3)) == 4
    assert sorted(EVEN_RELATIONS) == ['EVEN_1', 'EVEN_2', 'EVEN_3']
    assert EVEN_RELATIONS['EVEN_1'].tuples == ((0,),)


def test_exchange_repairs():
    assert exchange_repairs(frozenset({(0, 0), (1, 1)}), 2) is None
    repairs = exchange_repairs(frozenset({(0, 0, 0, 0), (1, 1, 1, 1)}), 4)
    assert set(repairs) == {(1, 1, 0, 0), (1, 0, 1, 0), (1, 0, 0, 1)}


def test_planar_report_holds():
    relation = Relation.from_strings(('a', 'b'), ['00', '11'])
    report = planar_tractability_report([relation])
    assert report.holds
    assert report.entries[0].d_even_delta_matroid
    document = report.to_dict()
    assert document['condition_holds'] is True
    assert set(document['even_relations']) == set(EVEN_RELATIONS)


def test_planar_report_fails_and_flags_unary(interference):
    unary = Relation.from_strings(('a',), ['0', '1'])
    report = planar_tractability_report([interference, unary])
    assert not report.holds
    assert report.entries[0].passes is False
    assert report.entries[1].arity_one
    assert report.entries[1].passes is None
    frame = report.to_frame()
    assert list(frame.index) == [0, 1]
    assert not frame.loc[0, 'passes']


def test_planar_report_needs_relations():
    with pytest.raises(RelationError):
        planar_tractability_report([])
