# -*- coding: utf-8 -*-
"""
Seeded random relations, instances and graphs. Every generator takes a
``random.Random`` so corpora are reproducible from a seed.
"""

from itertools import product
from random import Random
from typing import Callable, List, Optional, Sequence, Tuple

from .dmatroid import Relation, exchange_repairs, is_delta_matroid, ones
from .errors import InstanceError
from .instance import Constraint, Instance
from .matching import SimpleGraph, complete_graph, cycle_graph, \
    petersen_graph


def _scope(arity: int, scope: Optional[Sequence[str]]) -> Tuple[str, ...]:
    return tuple(scope) if scope else tuple(f"v{i}"
                                            for i in range(1, arity + 1))


def random_even_delta_matroid(rng: Random, arity: int,
                              scope: Optional[Sequence[str]] = None,
                              density: float = 0.3) -> Relation:
    """Random tuples of one parity, closed under repairs of failed
    exchanges chosen at random."""
    parity = rng.randint(0, 1)
    cube = [t for t in product((0, 1), repeat=arity) if ones(t) % 2 == parity]
    members = {rng.choice(cube)}
    members.update(t for t in cube if rng.random() < density)
    while True:
        options = exchange_repairs(frozenset(members), arity)
        if options is None:
            return Relation(_scope(arity, scope), tuple(members))
        members.add(rng.choice(options))


def random_coindependent(rng: Random, arity: int,
                         scope: Optional[Sequence[str]] = None,
                         density: float = 0.3) -> Relation:
    """The cube minus a random set of tuples no two of which are
    neighbours."""
    removed = set()
    for bits in rng.sample(list(product((0, 1), repeat=arity)), 2 ** arity):
        if rng.random() < density and \
                all(sum(a != b for a, b in zip(bits, r)) != 1
                    for r in removed):
            removed.add(bits)
    return Relation(_scope(arity, scope),
                    tuple(t for t in product((0, 1), repeat=arity)
                          if t not in removed))


def random_gap2_free(rng: Random, arity: int) -> List[int]:
    """A random non-empty subset of ``0..arity`` without a gap of two."""
    low = rng.randint(0, arity)
    high = rng.randint(low, arity)
    values = set(range(low, high + 1))
    inner = list(range(low + 1, high))
    rng.shuffle(inner)
    for x in inner:
        if x - 1 in values and x + 1 in values and rng.random() < 0.5:
            values.discard(x)
    return sorted(values)


def random_compact(rng: Random, arity: int,
                   scope: Optional[Sequence[str]] = None) \
        -> Tuple[Relation, List[int]]:
    """Tuples whose ones-count lies in a random gap-free set, with that
    set."""
    values = random_gap2_free(rng, arity)
    return Relation(_scope(arity, scope),
                    tuple(t for t in product((0, 1), repeat=arity)
                          if ones(t) in values)), values


def random_delta_matroid(rng: Random, arity: int,
                         scope: Optional[Sequence[str]] = None,
                         accept: Callable[[Relation], bool] = None,
                         tries: int = 1000) -> Relation:
    """Rejection sampling of random tuple sets that are Δ-matroids and
    pass ``accept``."""
    cube = list(product((0, 1), repeat=arity))
    for _ in range(tries):
        relation = Relation(_scope(arity, scope),
                            tuple(t for t in cube if rng.random() < 0.5))
        if relation.is_empty() or not is_delta_matroid(relation):
            continue
        if accept is None or accept(relation):
            return relation
    raise InstanceError(f"No accepted Δ-matroid of arity {arity} in "
                        f"{tries} tries.")


def random_scopes(rng: Random, num_constraints: int, max_arity: int,
                  tries: int = 200) -> List[List[str]]:
    """Scopes in which every variable occurs in exactly two constraints and
    never twice in one scope."""
    for _ in range(tries):
        arities = [rng.randint(1, max_arity) for _ in range(num_constraints)]
        if sum(arities) % 2:
            bump = [i for i, a in enumerate(arities) if a < max_arity]
            if bump:
                arities[rng.choice(bump)] += 1
            else:
                arities[rng.randrange(num_constraints)] -= 1
        if min(arities) < 1 or sum(arities) == 0:
            continue
        slots = [k for k, a in enumerate(arities) for _ in range(a)]
        rng.shuffle(slots)
        pairs = list(zip(slots[0::2], slots[1::2]))
        if any(a == b for a, b in pairs):
            continue
        scopes: List[List[str]] = [[] for _ in arities]
        for index, (a, b) in enumerate(pairs):
            scopes[a].append(f"x{index}")
            scopes[b].append(f"x{index}")
        return scopes
    raise InstanceError("Could not place the variables.")


def random_even_instance(rng: Random, max_constraints: int = 6,
                         max_arity: int = 4) -> Instance:
    """Random instance of even Δ-matroid constraints."""
    count = rng.randint(2, max(2, max_constraints))
    scopes = random_scopes(rng, count, max_arity)
    return Instance([Constraint(f"C{k}", random_even_delta_matroid(
        rng, len(scope), scope)) for k, scope in enumerate(scopes)])


def random_coverable_instance(rng: Random, max_constraints: int = 5,
                              max_arity: int = 3) -> Instance:
    """Random instance mixing co-independent, compact and even constraints,
    each carrying its oracle configuration."""
    count = rng.randint(2, max(2, max_constraints))
    scopes = random_scopes(rng, count, max_arity)
    constraints = []
    for k, scope in enumerate(scopes):
        kind = rng.choice(('coindependent', 'compact', 'even'))
        if kind == 'coindependent':
            relation = random_coindependent(rng, len(scope), scope)
            oracle = {'class': 'coindependent', 'params': {}}
        elif kind == 'compact':
            relation, values = random_compact(rng, len(scope), scope)
            oracle = {'class': 'compact',
                      'params': {'gc': 'ones', 'S': values}}
        else:
            relation = random_even_delta_matroid(rng, len(scope), scope)
            oracle = None
        constraints.append(Constraint(f"C{k}", relation, oracle))
    return Instance(constraints)


def random_graph(rng: Random, num_nodes: int, p: float = 0.4) \
        -> SimpleGraph:
    """G(n, p) with an extra random edge at every isolated node."""
    nodes = [str(i) for i in range(num_nodes)]
    edges = [(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1:]
             if rng.random() < p]
    for node in nodes:
        if num_nodes > 1 and not any(node in e for e in edges):
            other = rng.choice([n for n in nodes if n != node])
            edges.append((node, other))
    return SimpleGraph(tuple(nodes), tuple(edges))


def graph_corpus(rng: Random, count: int, max_nodes: int = 10) \
        -> List[SimpleGraph]:
    """Named graphs (K3, K4, Petersen, odd cycles) followed by random
    graphs on 2 to ``max_nodes`` nodes."""
    corpus = [complete_graph(3), complete_graph(4), petersen_graph(),
              cycle_graph(5), cycle_graph(7)]
    while len(corpus) < count:
        corpus.append(random_graph(rng, rng.randint(2, max_nodes),
                                   rng.uniform(0.2, 0.7)))
    return corpus[:count]
