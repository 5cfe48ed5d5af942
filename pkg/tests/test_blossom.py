# pylint: disable=redefined-outer-name, missing-function-docstring
import json
from random import Random

import pytest

from edgecsp.blossom import BlossomSolver, Improved, Optimal, \
    SolverObserver, check_contraction, find_augmenting_walk, has_solution, \
    improve, optimize
from edgecsp.dmatroid import Relation, interference_matroid, \
    is_even_delta_matroid
from edgecsp.errors import InstanceError, NotImprovingError, SolverRefusal
from edgecsp.generators import random_even_instance
from edgecsp.instance import EdgeLabeling, Instance, brute_force_optimum, \
    inconsistency_count, initial_labeling, is_valid
from edgecsp.matching import complete_graph, cycle_graph, graph_to_instance, \
    petersen_graph
from edgecsp.walks import is_augmenting


class CountingObserver(SolverObserver):
    '''Counts the checkpoints it is called at'''

    def __init__(self):
        self.calls = {'on_forest': 0, 'on_star': 0, 'on_contract': 0,
                      'on_lift_dag': 0}

    def on_forest(self, instance, labeling, dag):
        self.calls['on_forest'] += 1

    def on_star(self, instance, labeling, dag):
        self.calls['on_star'] += 1

    def on_contract(self, record):
        self.calls['on_contract'] += 1

    def on_lift_dag(self, instance, labeling, dag):
        self.calls['on_lift_dag'] += 1


class ContractionChecker(SolverObserver):
    '''Checks every contraction and counts them'''

    def __init__(self):
        self.contractions = 0

    def on_contract(self, record):
        check_contraction(record)
        before, after = record.instance, record.contracted_instance
        assert len(after.variables) <= len(before.variables)
        for cid in record.blossom.members:
            assert is_even_delta_matroid(after.relation(cid))
        self.contractions += 1


@pytest.fixture
def twins():
    '''Returns two equality constraints on (a, b), labelled 11 and 00'''
    equal = Relation.from_strings(('a', 'b'), ['00', '11'])
    instance = Instance.from_relations([('P', equal), ('Q', equal)])
    labeling = EdgeLabeling.from_tuples(instance, {'P': (1, 1),
                                                   'Q': (0, 0)})
    return instance, labeling


@pytest.mark.parametrize('graph, expected', [
    (complete_graph(3), 1),
    (complete_graph(4), 0),
    (cycle_graph(5), 1),
    (cycle_graph(6), 0),
    (cycle_graph(7), 1),
    (petersen_graph(), 0),
])
def test_matching_instances(graph, expected):
    labeling, count, _ = BlossomSolver(check_invariants=True).optimize(
        graph_to_instance(graph))
    assert count == expected
    assert is_valid(graph_to_instance(graph), labeling)


def test_small_graphs_agree_with_oracle():
    for graph in (complete_graph(3), complete_graph(4), cycle_graph(5)):
        instance = graph_to_instance(graph)
        assert optimize(instance)[1] == brute_force_optimum(instance)[0]


@pytest.mark.parametrize('seed', range(40))
def test_random_instances_agree_with_oracle(seed):
    instance = random_even_instance(Random(seed))
    labeling, count, _ = BlossomSolver(check_invariants=True).optimize(
        instance)
    assert is_valid(instance, labeling)
    assert inconsistency_count(instance, labeling) == count
    assert count == brute_force_optimum(instance)[0]


def test_improve_removes_two(twins):
    instance, labeling = twins
    outcome = improve(instance, labeling)
    assert isinstance(outcome, Improved)
    assert inconsistency_count(instance, outcome.labeling) == 0


def test_improve_certifies_optimum():
    instance = graph_to_instance(complete_graph(3))
    outcome = improve(instance, initial_labeling(instance))
    assert isinstance(outcome, Optimal)


def test_improve_needs_valid_labeling(twins):
    instance, labeling = twins
    with pytest.raises(InstanceError):
        improve(instance, labeling.flip([('a', 'P')]))


def test_find_augmenting_walk(twins):
    instance, labeling = twins
    better = EdgeLabeling.from_tuples(instance, {'P': (0, 0), 'Q': (0, 0)})
    walk = find_augmenting_walk(instance, labeling, better)
    assert is_augmenting(instance, labeling, walk)
    assert walk.variables in (['a', 'b'], ['b', 'a'])
    assert find_augmenting_walk(instance, labeling, better,
                                avoid='a').start == 'b'
    with pytest.raises(NotImprovingError):
        find_augmenting_walk(instance, better, labeling)


def test_optimize_from_given_labeling(twins):
    instance, labeling = twins
    better, count, trace = optimize(instance, labeling)
    assert count == 0
    assert is_valid(instance, better)
    assert trace.augmentations == 1


def test_solver_refuses_odd_relations():
    relation = interference_matroid(('a', 'b', 'c'))
    instance = Instance.from_relations([('A', relation), ('B', relation)])
    with pytest.raises(SolverRefusal):
        optimize(instance)


def test_solver_rejects_relaxed_instances():
    instance = Instance.from_relations([
        ('A', Relation.from_strings(('a', 'b'), ['00', '11'])),
        ('B', Relation.from_strings(('b',), ['0', '1'])),
    ])
    with pytest.raises(InstanceError):
        optimize(instance)


def test_has_solution():
    assert has_solution(graph_to_instance(complete_graph(4)))
    assert not has_solution(graph_to_instance(complete_graph(3)))


def test_observer_sees_every_contraction():
    observer = CountingObserver()
    solver = BlossomSolver(observer=observer)
    for graph in (petersen_graph(), cycle_graph(7), complete_graph(5)):
        solver.optimize(graph_to_instance(graph))
    assert observer.calls['on_forest'] > 0
    assert observer.calls['on_contract'] == solver.trace.contractions
    assert solver.trace.lifts <= solver.trace.contractions


def test_trace():
    solver = BlossomSolver()
    _, count, trace = solver.optimize(graph_to_instance(petersen_graph()))
    assert count == 0
    stats = trace.stats()
    assert set(stats) == {'improve_calls', 'augmentations', 'contractions',
                          'lifts', 'max_depth'}
    assert stats['improve_calls'] == stats['augmentations'] + 1
    events = [json.loads(line) for line in trace.to_jsonl().splitlines()]
    assert len(events) == len(trace.events)
    assert events[-1]['event'] == 'optimal'
    assert all('event' in e for e in events)


@pytest.mark.slow
def test_random_sweep_exercises_blossoms():
    contracted = nested = 0
    for seed in range(500):
        instance = random_even_instance(Random(seed))
        checker = ContractionChecker()
        solver = BlossomSolver(observer=checker)
        labeling, count, trace = solver.optimize(instance)
        assert is_valid(instance, labeling)
        assert count == brute_force_optimum(instance)[0]
        assert checker.contractions == trace.contractions
        contracted += trace.contractions > 0
        nested += trace.max_depth >= 2
    assert contracted >= 50
    assert nested >= 5
