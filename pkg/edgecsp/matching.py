# -*- coding: utf-8 -*-
# pylint: disable=logging-fstring-interpolation
"""
Perfect matchings as edge CSPs: the matching relations M_n, the graph to
instance encoding, matching-realizable relations and the pairing test that
every realizable relation passes.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from multiprocessing import Pool
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx
from tqdm import tqdm

from .blossom import BlossomSolver
from .dmatroid import Bits, Relation, fixture_relation, flip_bits, \
    format_bits
from .errors import InstanceError, InvariantBreach, ParseError, \
    RelationError
from .instance import Constraint, Instance
from .utils import FIXTURES

logger = logging.getLogger(__name__)

Edge = Tuple[str, str]


@dataclass(frozen=True)
class SimpleGraph:
    """An undirected graph without loops; parallel edges are kept.

    ``pins`` optionally lists the nodes whose deletion patterns define a
    realized relation.
    """

    nodes: Tuple[str, ...]
    edges: Tuple[Edge, ...] = ()
    pins: Tuple[str, ...] = ()

    def __post_init__(self):
        nodes = tuple(str(n) for n in self.nodes)
        if len(set(nodes)) != len(nodes):
            raise InstanceError("Graph node list repeats a node.")
        edges = tuple((str(u), str(v)) for u, v in self.edges)
        known = set(nodes)
        for u, v in edges:
            if u == v:
                raise InstanceError(f"Loop at {u}.")
            if u not in known or v not in known:
                raise InstanceError(f"Edge {u}-{v} leaves the graph.")
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'edges', edges)
        object.__setattr__(self, 'pins', tuple(str(p) for p in self.pins))

    @classmethod
    def from_dict(cls, data: dict):
        """Build a graph from ``{"nodes": [...], "edges": [[u, v], ...]}``
        with optional ``"pins"``."""
        try:
            return cls(tuple(data['nodes']),
                       tuple(tuple(e) for e in data.get('edges', ())),
                       tuple(data.get('pins', ())))
        except (KeyError, TypeError, ValueError) as err:
            raise ParseError(f"Malformed graph document: {err}") from err

    def to_dict(self) -> dict:
        """Inverse of :meth:`from_dict`."""
        out = {'nodes': list(self.nodes),
               'edges': [list(e) for e in self.edges]}
        if self.pins:
            out['pins'] = list(self.pins)
        return out

    def incident(self, node: str) -> List[int]:
        """Indices of the edges at a node."""
        return [i for i, e in enumerate(self.edges) if node in e]

    def degree(self, node: str) -> int:
        """Number of edge ends at a node."""
        return len(self.incident(node))

    def delete(self, nodes) -> 'SimpleGraph':
        """The graph with some nodes and their edges removed."""
        gone = set(nodes)
        return SimpleGraph(tuple(n for n in self.nodes if n not in gone),
                           tuple(e for e in self.edges
                                 if e[0] not in gone and e[1] not in gone),
                           tuple(p for p in self.pins if p not in gone))

    def to_networkx(self) -> nx.Graph:
        """Simple networkx graph with the same nodes and adjacency."""
        graph = nx.Graph()
        graph.add_nodes_from(self.nodes)
        graph.add_edges_from(self.edges)
        return graph


def complete_graph(n: int) -> SimpleGraph:
    """K_n on nodes ``0 .. n-1``."""
    graph = nx.complete_graph(n)
    return SimpleGraph(tuple(str(v) for v in graph.nodes),
                       tuple((str(u), str(v)) for u, v in graph.edges))


def cycle_graph(n: int) -> SimpleGraph:
    """C_n on nodes ``0 .. n-1``."""
    graph = nx.cycle_graph(n)
    return SimpleGraph(tuple(str(v) for v in graph.nodes),
                       tuple((str(u), str(v)) for u, v in graph.edges))


def petersen_graph() -> SimpleGraph:
    """The Petersen graph."""
    graph = nx.petersen_graph()
    return SimpleGraph(tuple(str(v) for v in graph.nodes),
                       tuple((str(u), str(v)) for u, v in graph.edges))


def fixture_graph(name: str) -> SimpleGraph:
    """One of the graphs shipped with the package."""
    return SimpleGraph.from_dict(FIXTURES['graphs'][name])


def matching_relation(n: int, scope: Optional[Sequence[str]] = None) \
        -> Relation:
    """M_n: exactly one entry is one.

    Raises:
        RelationError: for n < 1
    """
    if n < 1:
        raise RelationError("Matching relations start at arity 1.")
    scope = tuple(scope) if scope else tuple(f"x{i}" for i in range(1, n + 1))
    return Relation(scope, tuple(tuple(int(i == j) for i in range(n))
                                 for j in range(n)))


def edge_variable(index: int) -> str:
    """Variable name of the edge with the given index."""
    return f"e{index}"


def graph_to_instance(graph: SimpleGraph) -> Instance:
    """One variable per edge, one M_deg(v) constraint per node.

    Raises:
        InstanceError: if some node has no edge
    """
    constraints = []
    for node in graph.nodes:
        incident = graph.incident(node)
        if not incident:
            raise InstanceError(f"Node {node} is isolated.")
        scope = [edge_variable(i) for i in incident]
        constraints.append(Constraint(node, matching_relation(len(scope),
                                                              scope)))
    return Instance(constraints,
                    [edge_variable(i) for i in range(len(graph.edges))])


def maximum_matching_size(graph: SimpleGraph) -> int:
    """ν(G) by exhaustive search: the first open node is either left
    unmatched or matched to one of its open neighbours."""
    order = {n: k for k, n in enumerate(graph.nodes)}
    neighbours: Dict[str, set] = {n: set() for n in graph.nodes}
    for u, v in graph.edges:
        neighbours[u].add(v)
        neighbours[v].add(u)

    @lru_cache(maxsize=None)
    def best(open_nodes: FrozenSet[str]) -> int:
        if not open_nodes:
            return 0
        node = min(open_nodes, key=order.get)
        rest = open_nodes - {node}
        size = best(rest)
        for other in neighbours[node] & rest:
            size = max(size, 1 + best(rest - {other}))
        return size

    return best(frozenset(graph.nodes))


def has_perfect_matching(graph: SimpleGraph) -> bool:
    """Perfect matching test through networkx; the empty graph has one."""
    if not graph.nodes:
        return True
    if len(graph.nodes) % 2:
        return False
    matching = nx.max_weight_matching(graph.to_networkx(),
                                      maxcardinality=True)
    return 2 * len(matching) == len(graph.nodes)


def _solver_decides(graph: SimpleGraph) -> bool:
    if not graph.nodes:
        return True
    if any(graph.degree(n) == 0 for n in graph.nodes):
        return False
    _, count, _ = BlossomSolver(logger_name=__name__).optimize(
        graph_to_instance(graph))
    return count == 0


def _decide(graph: SimpleGraph) -> bool:
    by_networkx = has_perfect_matching(graph)
    by_solver = _solver_decides(graph)
    if by_networkx != by_solver:
        raise InvariantBreach(
            f"Matchers disagree on {graph.to_dict()}: networkx "
            f"{by_networkx}, edge CSP solver {by_solver}.")
    return by_solver


def realize(graph: SimpleGraph, pins: Optional[Sequence[str]] = None,
            scope: Optional[Sequence[str]] = None, nprocs: int = 1,
            progress: bool = False) -> Relation:
    """The relation of pin-deletion patterns leaving a perfectly matchable
    graph.

    Each pattern is decided twice, by networkx and by the edge CSP solver on
    the encoded instance, and the answers must agree.

    Args:
        graph: the graph
        pins: ordered pins, the graph's own pins by default
        scope: variable names of the relation, the pins by default
        nprocs: worker processes over the deletion patterns
        progress: show a progress bar

    Raises:
        InstanceError: if the pins repeat or are not nodes of the graph
    """
    pins = tuple(pins) if pins is not None else graph.pins
    if len(set(pins)) != len(pins):
        raise InstanceError("Pins repeat a node.")
    unknown = set(pins) - set(graph.nodes)
    if unknown:
        raise InstanceError(f"Pins {sorted(unknown)} are not graph nodes.")

    patterns = list(product((0, 1), repeat=len(pins)))
    subgraphs = [graph.delete(p for p, bit in zip(pins, t) if bit)
                 for t in patterns]
    if nprocs > 1:
        with Pool(nprocs) as pool:
            decided = list(tqdm(pool.imap(_decide, subgraphs),
                                total=len(subgraphs), disable=not progress))
    else:
        decided = [_decide(g) for g in tqdm(subgraphs, disable=not progress)]

    relation = Relation(tuple(scope) if scope else pins,
                        tuple(t for t, ok in zip(patterns, decided) if ok))
    logger.debug(f"Realized {len(relation)} of {len(patterns)} patterns")
    return relation


def _difference(relation: Relation, f: Bits, g: Bits) -> List[int]:
    f, g = tuple(f), tuple(g)
    for bits in (f, g):
        if bits not in relation:
            raise RelationError(f"{format_bits(bits)} is not in {relation}.")
    diff = [i for i in range(relation.arity) if f[i] != g[i]]
    if len(diff) % 2:
        raise RelationError("The two tuples differ in an odd number of "
                            "places.")
    return diff


def admissible_pairs(relation: Relation, f: Bits, g: Bits) \
        -> List[Tuple[str, str]]:
    """Pairs P inside f △ g with both f ⊕ P and g ⊕ P in M."""
    diff = _difference(relation, f, g)
    return [(relation.scope[a], relation.scope[b])
            for k, a in enumerate(diff) for b in diff[k + 1:]
            if flip_bits(tuple(f), {a, b}) in relation
            and flip_bits(tuple(g), {a, b}) in relation]


def check_pair_decomposition(relation: Relation, f: Bits, g: Bits) \
        -> Optional[List[Tuple[str, str]]]:
    """A partition of f △ g into admissible pairs, or None.

    A None answer shows that M is not matching realizable.

    Raises:
        RelationError: if f or g is not in M, or f △ g is odd
    """
    admissible = set(admissible_pairs(relation, f, g))
    names = [relation.scope[i] for i in _difference(relation, f, g)]

    def pair_up(rest: List[str]) -> Optional[List[Tuple[str, str]]]:
        if not rest:
            return []
        first = rest[0]
        for other in rest[1:]:
            if (first, other) in admissible:
                tail = pair_up([v for v in rest[1:] if v != other])
                if tail is not None:
                    return [(first, other)] + tail
        return None

    return pair_up(names)


def counterexample_arity6() -> Relation:
    """An even Δ-matroid of arity 6 that is not matching realizable."""
    return fixture_relation('counterexample')
