# pylint: disable=redefined-outer-name, missing-function-docstring
import importlib.resources as pkg_resources
import json
from itertools import product
from random import Random

import pytest

from edgecsp.blossom import optimize
from edgecsp.dmatroid import Relation, fixture_relation, \
    interference_matroid
from edgecsp.errors import InstanceError, ParseError, RelationError
from edgecsp.generators import graph_corpus
from edgecsp.instance import Instance, brute_force_optimum
from edgecsp.matching import SimpleGraph, admissible_pairs, \
    check_pair_decomposition, complete_graph, counterexample_arity6, \
    cycle_graph, fixture_graph, graph_to_instance, has_perfect_matching, \
    matching_relation, maximum_matching_size, petersen_graph, realize
from edgecsp.utils import FIXTURES

from . import templates


@pytest.fixture
def x_graph():
    '''Returns the gadget graph realizing the relation X'''
    return SimpleGraph.from_dict(
        json.loads(pkg_resources.read_text(templates, 'x_graph.json')))


def test_graph_validation():
    with pytest.raises(InstanceError):
        SimpleGraph(('a',), (('a', 'a'),))
    with pytest.raises(InstanceError):
        SimpleGraph(('a',), (('a', 'b'),))
    with pytest.raises(InstanceError):
        SimpleGraph(('a', 'a'))
    with pytest.raises(ParseError):
        SimpleGraph.from_dict({'edges': []})


def test_graph_document(x_graph):
    assert SimpleGraph.from_dict(x_graph.to_dict()) == x_graph
    assert x_graph.pins == ('1', '2', '3', '4', '5')
    assert x_graph.degree('2') == 3
    smaller = x_graph.delete(['2', '5'])
    assert '2' not in smaller.nodes
    assert smaller.edges == (('3', 'a'), ('4', 'b'))
    assert smaller.pins == ('1', '3', '4')


def test_matching_relation():
    assert matching_relation(3) == Relation.from_strings(
        ('x1', 'x2', 'x3'), ['100', '010', '001'])
    assert matching_relation(2, ('a', 'b')).scope == ('a', 'b')
    with pytest.raises(RelationError):
        matching_relation(0)


def test_graph_to_instance():
    instance = graph_to_instance(fixture_graph('k3'))
    assert instance.constraint_ids == ('p', 'q', 'r')
    assert instance.variables == ('e0', 'e1', 'e2')
    assert instance.scope('p') == ('e0', 'e2')
    with pytest.raises(InstanceError):
        graph_to_instance(SimpleGraph(('a', 'b', 'c'), (('a', 'b'),)))


@pytest.mark.parametrize('graph, size', [
    (complete_graph(3), 1),
    (complete_graph(4), 2),
    (cycle_graph(5), 2),
    (petersen_graph(), 5),
    (SimpleGraph(()), 0),
])
def test_maximum_matching_size(graph, size):
    assert maximum_matching_size(graph) == size
    assert has_perfect_matching(graph) is (2 * size == len(graph.nodes))


@pytest.mark.parametrize('name', ['k3', 'k4', 'example'])
def test_fixture_graphs(name):
    _, count, _ = optimize(graph_to_instance(fixture_graph(name)))
    assert count == FIXTURES['expected'][name]


def test_merged_example():
    instance = Instance.from_dict(FIXTURES['instances']['example_merged'])
    _, count, _ = optimize(instance)
    assert count == FIXTURES['expected']['example_merged']
    assert brute_force_optimum(instance)[0] == count


def test_realize_x(x_graph):
    relation = realize(x_graph, scope=('x1', 'x2', 'x3', 'x4', 's'))
    assert relation == fixture_relation('x')


def test_realize_y():
    relation = realize(fixture_graph('y'), scope=('y1', 'y2', 's'))
    assert relation == fixture_relation('y')


def test_realize_in_parallel(x_graph):
    assert realize(x_graph, nprocs=2) == realize(x_graph)


def test_realize_checks_pins(x_graph):
    with pytest.raises(InstanceError):
        realize(x_graph, pins=['1', '1'])
    with pytest.raises(InstanceError):
        realize(x_graph, pins=['1', 'z'])


def test_counterexample_admissible_pairs():
    relation = counterexample_arity6()
    everything = (1,) * 6
    pairs = admissible_pairs(relation, (0,) * 6, everything)
    assert pairs == [tuple(p) for p in FIXTURES['admissible_pairs']]
    assert check_pair_decomposition(relation, (0,) * 6, everything) is None


def test_realizable_relations_decompose():
    relation = fixture_relation('x')
    for f, g in product(relation.tuples, repeat=2):
        assert check_pair_decomposition(relation, f, g) is not None
    assert check_pair_decomposition(relation, (1, 0, 0, 0, 0),
                                    (0, 1, 0, 0, 0)) == [('x1', 'x2')]


def test_pair_checks_reject_bad_tuples():
    interference = interference_matroid()
    with pytest.raises(RelationError):
        admissible_pairs(interference, (0, 0, 0), (1, 1, 1))
    with pytest.raises(RelationError):
        admissible_pairs(interference, (0, 0, 0), (1, 0, 0))


@pytest.mark.parametrize('seed', range(3))
def test_solver_counts_unmatched_nodes(seed):
    for graph in graph_corpus(Random(seed), 12, max_nodes=8):
        _, count, _ = optimize(graph_to_instance(graph))
        assert count == len(graph.nodes) - 2 * maximum_matching_size(graph)


@pytest.mark.slow
def test_solver_counts_unmatched_nodes_on_a_full_corpus():
    corpus = graph_corpus(Random(11), 200)
    assert len(corpus) == 200
    for graph in corpus:
        _, count, _ = optimize(graph_to_instance(graph))
        assert count == len(graph.nodes) - 2 * maximum_matching_size(graph)
        assert (count == 0) is has_perfect_matching(graph)
