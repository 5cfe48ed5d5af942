# -*- coding: utf-8 -*-
"""
Walks in the constraint graph, the f ⊕ q update, and timestamped f-DAGs
with a validator for their six defining properties.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, \
    Set, Tuple, Union

import networkx as nx

from .dmatroid import flip_bits
from .errors import InstanceError
from .instance import EdgeLabeling, HalfEdge, Instance, check_labeling, \
    is_consistent


@dataclass(frozen=True)
class Walk:
    """An alternating sequence ``q0 C1 q1 ... Ck qk``, optionally closed by
    a trailing constraint ``C(k+1)`` (a half-integral walk).

    ``steps`` holds ``(constraint, next variable)`` pairs; ``tail`` holds the
    trailing constraint of a half-integral walk.
    """

    start: str
    steps: Tuple[Tuple[str, str], ...] = ()
    tail: Optional[str] = None

    @classmethod
    def from_nodes(cls, nodes: Sequence[str]):
        """Walk from a node sequence ``[v0, C1, v1, ..., Ck, vk(, Ck+1)]``."""
        if not nodes:
            raise InstanceError("A walk has at least one variable.")
        start, rest = nodes[0], list(nodes[1:])
        tail = rest.pop() if len(rest) % 2 == 1 else None
        steps = tuple(zip(rest[0::2], rest[1::2]))
        return cls(start, steps, tail)

    @property
    def variables(self) -> List[str]:
        """Visited variables, endpoints included."""
        return [self.start] + [var for _, var in self.steps]

    @property
    def constraints(self) -> List[str]:
        """Visited constraints, the tail included."""
        out = [cid for cid, _ in self.steps]
        if self.tail is not None:
            out.append(self.tail)
        return out

    @property
    def end(self) -> str:
        """Last variable of the walk."""
        return self.steps[-1][1] if self.steps else self.start

    @property
    def half_integral(self) -> bool:
        """True when the walk ends in a constraint."""
        return self.tail is not None

    @property
    def length(self) -> float:
        """Number of steps, plus one half for a trailing constraint."""
        return len(self.steps) + (0.5 if self.half_integral else 0)

    def half_edges(self) -> List[HalfEdge]:
        """Traversed half-edges in walk order."""
        out = []
        prev = self.start
        for cid, var in self.steps:
            out.append((prev, cid))
            out.append((var, cid))
            prev = var
        if self.tail is not None:
            out.append((prev, self.tail))
        return out

    def prefix(self, i: int):
        """Integral prefix ``q[0, i]``."""
        return Walk(self.start, self.steps[:i])

    def integral(self):
        """The walk without its trailing constraint."""
        return Walk(self.start, self.steps)

    def extend(self, cid: str, var: str):
        """Walk with one more step ``C var``."""
        if self.half_integral:
            raise InstanceError("Cannot extend a half-integral walk.")
        return Walk(self.start, self.steps + ((cid, var),))

    def close(self, cid: str):
        """Half-integral walk ending in ``cid``."""
        if self.half_integral:
            raise InstanceError("Walk already ends in a constraint.")
        return Walk(self.start, self.steps, cid)

    def inverse(self):
        """``qk Ck ... q1 C1 q0``."""
        if self.half_integral:
            raise InstanceError("A half-integral walk has no inverse.")
        nodes = [self.start]
        for cid, var in self.steps:
            nodes.extend([cid, var])
        return Walk.from_nodes(nodes[::-1])

    def concat(self, other):
        """``pq`` where p ends where q starts."""
        if self.half_integral or self.end != other.start:
            raise InstanceError(
                f"Cannot concatenate {self} with {other}.")
        return Walk(self.start, self.steps + other.steps, other.tail)

    def __str__(self):
        text = self.start
        for cid, var in self.steps:
            text += f" -{cid}- {var}"
        if self.tail is not None:
            text += f" -{self.tail}"
        return text


def check_walk(instance: Instance, walk: Walk) -> bool:
    """Structural walk conditions: scopes respected, each half-edge at most
    once, no interior variable repeated."""
    prev = walk.start
    if prev not in instance.occurrences:
        return False
    for cid, var in walk.steps:
        if cid not in instance.constraint_ids:
            return False
        scope = instance.scope(cid)
        if prev not in scope or var not in scope or prev == var:
            return False
        prev = var
    if walk.tail is not None:
        if walk.tail not in instance.constraint_ids or \
                prev not in instance.scope(walk.tail):
            return False
    edges = walk.half_edges()
    if len(set(edges)) != len(edges):
        return False
    interior = walk.variables[1:]
    if walk.steps and walk.end == walk.start:
        interior = interior[:-1]
    return len(set(interior)) == len(interior) and walk.start not in interior


def apply_walk(labeling: EdgeLabeling, walk: Walk) -> EdgeLabeling:
    """``f ⊕ q``: flip every half-edge the walk traverses.

    Raises:
        InstanceError: if the walk repeats a half-edge
    """
    edges = walk.half_edges()
    if len(set(edges)) != len(edges):
        raise InstanceError(f"Walk {walk} repeats a half-edge.")
    return labeling.flip(edges)


def apply_half_edges(labeling: EdgeLabeling,
                     edges: Iterable[HalfEdge]) -> EdgeLabeling:
    """Flip an arbitrary set of half-edges."""
    return labeling.flip(set(edges))


def can_flip(instance: Instance, labeling: EdgeLabeling, cid: str,
             *variables: str) -> bool:
    """True iff ``f(C)`` with the given variables flipped is in C."""
    relation = instance.relation(cid)
    bits = labeling.tuple_at(instance, cid)
    return flip_bits(bits, {relation.position(v) for v in variables}) \
        in relation


def _constraint_ok(instance: Instance, labeling: EdgeLabeling,
                   cid: str) -> bool:
    return labeling.tuple_at(instance, cid) in instance.relation(cid)


def is_f_walk(instance: Instance, labeling: EdgeLabeling,
              walk: Walk) -> bool:
    """Interior variables consistent, every integral prefix (and the whole
    walk when it ends in a constraint) keeps the labeling valid."""
    check_labeling(instance, labeling)
    if not check_walk(instance, walk):
        return False
    if walk.steps and walk.start == walk.end and not walk.half_integral:
        return False
    if not all(_constraint_ok(instance, labeling, c)
               for c in instance.constraint_ids):
        return False

    interior = walk.variables[1:] if walk.half_integral \
        else walk.variables[1:-1]
    if not all(is_consistent(instance, labeling, v) for v in interior):
        return False

    current = labeling
    prev = walk.start
    for cid, var in walk.steps:
        current = current.flip([(prev, cid), (var, cid)])
        if not _constraint_ok(instance, current, cid):
            return False
        prev = var
    if walk.tail is not None:
        current = current.flip([(prev, walk.tail)])
        if not _constraint_ok(instance, current, walk.tail):
            return False
    return True


def is_augmenting(instance: Instance, labeling: EdgeLabeling,
                  walk: Walk) -> bool:
    """An f-walk from an inconsistent variable to a different inconsistent
    variable, or from an inconsistent variable into a constraint."""
    if not is_f_walk(instance, labeling, walk):
        return False
    if is_consistent(instance, labeling, walk.start):
        return False
    if walk.half_integral:
        return True
    return bool(walk.steps) and walk.end != walk.start and \
        not is_consistent(instance, labeling, walk.end)


class ConstraintNode(NamedTuple):
    """A timestamped copy ``C^t`` of a constraint."""

    constraint: str
    timestamp: int

    def __str__(self):
        return f"{self.constraint}^{self.timestamp}"


Node = Union[str, ConstraintNode]


class Violation(NamedTuple):
    """A failed f-DAG property: the item number and a description."""

    item: int
    detail: str


class FDag:
    """A directed graph over variables and timestamped constraint copies.

    Edges are stored in insertion order as ``(tail, head)`` pairs where
    exactly one side is a :class:`ConstraintNode`.
    """

    def __init__(self):
        self.variables: Dict[str, None] = {}
        self.constraint_nodes: Dict[ConstraintNode, None] = {}
        self.edges: Dict[Tuple[Node, Node], None] = {}

    def copy(self):
        """Shallow structural copy."""
        other = FDag()
        other.variables = dict(self.variables)
        other.constraint_nodes = dict(self.constraint_nodes)
        other.edges = dict(self.edges)
        return other

    def add_node(self, node: Node):
        """Add a variable or a constraint node."""
        if isinstance(node, ConstraintNode):
            self.constraint_nodes[node] = None
        else:
            self.variables[node] = None

    def add_edge(self, tail: Node, head: Node):
        """Add an edge together with its endpoints."""
        self.add_node(tail)
        self.add_node(head)
        self.edges[(tail, head)] = None

    def remove_edge(self, tail: Node, head: Node):
        """Remove one edge."""
        del self.edges[(tail, head)]

    def remove_node(self, node: Node):
        """Remove a node and its incident edges."""
        self.variables.pop(node, None)
        self.constraint_nodes.pop(node, None)
        for edge in [e for e in self.edges if node in e]:
            del self.edges[edge]

    def in_edges(self, node: Node) -> List[Tuple[Node, Node]]:
        """Edges entering a node."""
        return [e for e in self.edges if e[1] == node]

    def out_edges(self, node: Node) -> List[Tuple[Node, Node]]:
        """Edges leaving a node."""
        return [e for e in self.edges if e[0] == node]

    def incident(self, node: Node) -> List[Tuple[Node, Node]]:
        """Edges touching a node."""
        return [e for e in self.edges if node in e]

    @staticmethod
    def half_edge(edge: Tuple[Node, Node]) -> HalfEdge:
        """The constraint-graph edge ``(v, C)`` behind a DAG edge."""
        tail, head = edge
        if isinstance(tail, ConstraintNode):
            return head, tail.constraint
        return tail, head.constraint

    def half_edges(self) -> Set[HalfEdge]:
        """All constraint-graph edges used by the DAG."""
        return {self.half_edge(e) for e in self.edges}

    @classmethod
    def from_paths(cls, *paths: Sequence[Node]):
        """DAG made of directed node paths."""
        dag = cls()
        for path in paths:
            for node in path:
                dag.add_node(node)
            for tail, head in zip(path, path[1:]):
                dag.add_edge(tail, head)
        return dag

    def __len__(self):
        return len(self.edges)


def validate_fdag(instance: Instance, labeling: EdgeLabeling,
                  dag: FDag) -> List[Violation]:
    """Check the six f-DAG properties by direct enumeration.

    Returns:
        the violated properties; an empty list means the DAG is an f-DAG
    """
    violations: List[Violation] = []

    # 1: edges project to edges of the constraint graph
    for tail, head in dag.edges:
        if isinstance(tail, ConstraintNode) == isinstance(head,
                                                          ConstraintNode):
            violations.append(Violation(1, f"{tail}->{head} is not "
                                           f"variable-constraint"))
            continue
        var, cid = FDag.half_edge((tail, head))
        if cid not in instance.constraint_ids or \
                var not in instance.scope(cid):
            violations.append(Violation(1, f"{var}-{cid} is not an edge"))
    if violations:
        return violations

    # 2: one timestamped copy and one direction per half-edge
    seen: Dict[HalfEdge, Tuple[Node, Node]] = {}
    for edge in dag.edges:
        half = FDag.half_edge(edge)
        if half in seen:
            violations.append(Violation(
                2, f"{half[0]}-{half[1]} used by "
                   f"{seen[half][0]}->{seen[half][1]} and "
                   f"{edge[0]}->{edge[1]}"))
        seen[half] = edge

    # 3: at most one incoming edge per variable
    for var in dag.variables:
        if len(dag.in_edges(var)) > 1:
            violations.append(Violation(3, f"{var} has several parents"))

    # 4: distinct timestamps and an order extending edges and timestamps
    stamps = [node.timestamp for node in dag.constraint_nodes]
    if len(set(stamps)) != len(stamps):
        violations.append(Violation(4, "timestamps repeat"))
    graph = nx.DiGraph()
    graph.add_nodes_from(dag.variables)
    graph.add_nodes_from(dag.constraint_nodes)
    graph.add_edges_from(dag.edges)
    ordered = sorted(dag.constraint_nodes, key=lambda n: n.timestamp)
    graph.add_edges_from(zip(ordered, ordered[1:]))
    if not nx.is_directed_acyclic_graph(graph):
        violations.append(Violation(4, "no order extends edges and "
                                       "timestamps"))

    # 5 and 6: exchanges inside one copy, no shortcuts across copies
    incoming: Dict[ConstraintNode, List[str]] = {}
    touching: Dict[ConstraintNode, List[str]] = {}
    for edge in dag.edges:
        var, _ = FDag.half_edge(edge)
        node = edge[1] if isinstance(edge[1], ConstraintNode) else edge[0]
        touching.setdefault(node, []).append(var)
        if edge[1] == node:
            incoming.setdefault(node, []).append(var)

    for node, sources in incoming.items():
        relation = instance.relation(node.constraint)
        scope = relation.scope
        base = labeling.tuple_at(instance, node.constraint)
        for u in sources:
            for v in touching[node]:
                if u != v and flip_bits(base, {scope.index(u),
                                               scope.index(v)}) \
                        not in relation:
                    violations.append(Violation(
                        5, f"{u},{v} at {node} is not an exchange"))

        for later, others in touching.items():
            if later.constraint != node.constraint or \
                    later.timestamp <= node.timestamp:
                continue
            for u in sources:
                for v in others:
                    if u != v and flip_bits(base, {scope.index(u),
                                                   scope.index(v)}) \
                            in relation:
                        violations.append(Violation(
                            6, f"shortcut {u}@{node} to {v}@{later}"))

    return violations


def _degree_maps(dag: FDag):
    indeg: Dict[Node, int] = {}
    outdeg: Dict[Node, int] = {}
    for tail, head in dag.edges:
        outdeg[tail] = outdeg.get(tail, 0) + 1
        indeg[head] = indeg.get(head, 0) + 1
    return indeg, outdeg


def dag_shape(dag: FDag) -> Optional[str]:
    """``"path"`` for a single directed path ending in a variable,
    ``"two_paths"`` for two directed paths meeting at their final
    constraint node, None otherwise."""
    nodes = list(dag.variables) + list(dag.constraint_nodes)
    if not dag.edges:
        return None
    graph = nx.DiGraph()
    graph.add_nodes_from(nodes)
    graph.add_edges_from(dag.edges)
    if not nx.is_weakly_connected(graph) or \
            not nx.is_directed_acyclic_graph(graph):
        return None

    indeg, outdeg = _degree_maps(dag)
    sources = [n for n in nodes if indeg.get(n, 0) == 0]
    sinks = [n for n in nodes if outdeg.get(n, 0) == 0]
    if any(outdeg.get(n, 0) > 1 for n in nodes) or \
            any(isinstance(s, ConstraintNode) for s in sources):
        return None
    if len(sinks) != 1:
        return None
    sink = sinks[0]
    if any(indeg.get(n, 0) > 1 for n in nodes if n != sink):
        return None
    if len(sources) == 1 and not isinstance(sink, ConstraintNode) \
            and indeg.get(sink, 0) == 1:
        return 'path'
    if len(sources) == 2 and isinstance(sink, ConstraintNode) \
            and indeg.get(sink, 0) == 2:
        return 'two_paths'
    return None


def apply_dag(labeling: EdgeLabeling, dag: FDag) -> EdgeLabeling:
    """``f ⊕ T`` for a single path or two paths meeting at a constraint.

    Raises:
        InstanceError: if the DAG has neither shape
    """
    if dag_shape(dag) is None:
        raise InstanceError("DAG is neither a path nor two meeting paths.")
    return labeling.flip(dag.half_edges())


def _min_constraint_node(dag: FDag) -> ConstraintNode:
    if not dag.constraint_nodes:
        raise InstanceError("DAG has no constraint node.")
    return min(dag.constraint_nodes, key=lambda n: n.timestamp)


def shorten_dag(labeling: EdgeLabeling, dag: FDag) \
        -> Tuple[EdgeLabeling, FDag]:
    """Drop the earliest constraint node when it sits on a dangling
    ``u -> C^s -> v`` pair; returns ``(f ⊕ uCv, T*)``.

    Raises:
        InstanceError: if the earliest node does not have that shape
    """
    node = _min_constraint_node(dag)
    ins, outs = dag.in_edges(node), dag.out_edges(node)
    if len(ins) != 1 or len(outs) != 1:
        raise InstanceError(f"{node} is not a u->C->v pair.")
    u, v = ins[0][0], outs[0][1]
    if len(dag.incident(u)) != 1:
        raise InstanceError(f"{u} has other incident edges.")
    shorter = dag.copy()
    shorter.remove_node(node)
    shorter.remove_node(u)
    return labeling.flip([(u, node.constraint), (v, node.constraint)]), \
        shorter


def shorten_dag_reversing(labeling: EdgeLabeling, dag: FDag,
                          target: Optional[str] = None) \
        -> Tuple[EdgeLabeling, FDag]:
    """Drop the dangling source ``u`` of the earliest constraint node and
    reverse one outgoing edge ``C^s -> v`` into ``v -> C^s``.

    Raises:
        InstanceError: if the earliest node does not have that shape
    """
    node = _min_constraint_node(dag)
    ins, outs = dag.in_edges(node), dag.out_edges(node)
    if len(ins) != 1 or not outs:
        raise InstanceError(f"{node} has no single parent and a child.")
    u = ins[0][0]
    if len(dag.incident(u)) != 1:
        raise InstanceError(f"{u} has other incident edges.")
    v = target if target is not None else outs[0][1]
    if (node, v) not in dag.edges:
        raise InstanceError(f"{node} has no edge to {v}.")
    shorter = dag.copy()
    shorter.remove_node(u)
    shorter.remove_edge(node, v)
    shorter.add_edge(v, node)
    return labeling.flip([(u, node.constraint), (v, node.constraint)]), \
        shorter
