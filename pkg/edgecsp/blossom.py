# -*- coding: utf-8 -*-
# pylint: disable=logging-fstring-interpolation
"""
Optimal edge labelings for edge CSP instances whose constraints are even
Δ-matroids.

The solver grows a forest of timestamped constraint copies from the
inconsistent variables. Two trees touching give an augmenting walk; a tree
touching itself gives a blossom, which is contracted into a smaller
instance, solved there, and lifted back.
"""

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional, Set, Tuple, Union

from .dmatroid import Relation, is_even_delta_matroid
from .errors import InstanceError, InvariantBreach, NotImprovingError, \
    SolverRefusal
from .instance import Constraint, EdgeLabeling, HalfEdge, Instance, \
    check_labeling, inconsistency_count, inconsistent_variables, \
    initial_labeling, is_consistent, is_valid, require_valid_instance
from .utils import get_logger, setting
from .walks import ConstraintNode, FDag, Node, Walk, apply_dag, apply_walk, \
    can_flip, validate_fdag


def _names(nodes: List[Node]) -> List[str]:
    return [n.constraint if isinstance(n, ConstraintNode) else n
            for n in nodes]


class Forest:
    """The search forest of one improve call.

    Variables enter at most once, constraints once per expansion. The
    frontier is a FIFO of half-edges in the order their variable entered,
    then in instance order of the constraints.
    """

    def __init__(self, instance: Instance, labeling: EdgeLabeling):
        self.instance = instance
        self.labeling = labeling
        self.dag = FDag()
        self.parent: Dict[Node, Optional[Node]] = {}
        self.roots: Dict[str, str] = {}
        self.used: Dict[HalfEdge, ConstraintNode] = {}
        self.frontier: Deque[HalfEdge] = deque()
        self.timestamp = 1
        self._order = {cid: k for k, cid in enumerate(instance.constraint_ids)}
        for var in inconsistent_variables(instance, labeling):
            self.add_variable(var)

    def add_variable(self, var: str, parent: Optional[ConstraintNode] = None):
        """Add a root, or a child of a constraint node."""
        self.dag.add_node(var)
        self.parent[var] = parent
        if parent is None:
            self.roots[var] = var
        else:
            self.dag.add_edge(parent, var)
            self.used[(var, parent.constraint)] = parent
            self.roots[var] = self.root_of(parent)
        for cid in sorted(self.instance.occurrences[var],
                          key=self._order.get):
            self.frontier.append((var, cid))

    def add_constraint(self, var: str, cid: str) -> ConstraintNode:
        """Add ``C^t`` under ``var`` with the current timestamp."""
        node = ConstraintNode(cid, self.timestamp)
        self.dag.add_edge(var, node)
        self.parent[node] = var
        self.used[(var, cid)] = node
        return node

    def next_edge(self) -> Optional[HalfEdge]:
        """Pop the next unexplored half-edge, if any."""
        while self.frontier:
            edge = self.frontier.popleft()
            if edge not in self.used:
                return edge
        return None

    def __contains__(self, var: str) -> bool:
        return var in self.roots

    def root_of(self, node: Node) -> str:
        """Root variable of the tree holding a node."""
        if isinstance(node, ConstraintNode):
            node = self.parent[node]
        return self.roots[node]

    def path(self, node: Node) -> List[Node]:
        """Nodes of walk(node), from its root down to the node."""
        out = [node]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])
        return out[::-1]

    def lowest_common_ancestor(self, first: Node, second: Node) -> Node:
        """Deepest node on both root paths.

        Raises:
            InstanceError: if the nodes sit in different trees
        """
        ancestors = set(self.path(first))
        for node in reversed(self.path(second)):
            if node in ancestors:
                return node
        raise InstanceError(f"{first} and {second} are in different trees.")

    def star(self, node: ConstraintNode, var: str) -> FDag:
        """The forest with the out-edges of ``node`` replaced by
        ``var -> node``."""
        dag = self.dag.copy()
        for edge in dag.out_edges(node):
            dag.remove_edge(*edge)
        dag.add_edge(var, node)
        return dag


@dataclass(frozen=True)
class BlossomData:
    """A blossom walk ``b0 C1 b1 ... Ck bk`` with ``b0 = bk``.

    ``ell`` is the position of the meeting constraint (the one with the
    largest timestamp) and ``timestamps[i - 1]`` the forest timestamp of
    ``C_i``. ``stem`` is walk(r) when the labeling was re-routed first.
    """

    walk: Walk
    ell: int
    timestamps: Tuple[int, ...]
    stem: Optional[Walk] = None

    @property
    def k(self) -> int:
        """Number of constraint visits."""
        return len(self.walk.steps)

    @property
    def variables(self) -> List[str]:
        """``b0 .. bk``."""
        return self.walk.variables

    @property
    def constraints(self) -> List[str]:
        """``C1 .. Ck``."""
        return self.walk.constraints

    @property
    def members(self) -> Tuple[str, ...]:
        """Distinct blossom constraints in order of first visit."""
        return tuple(dict.fromkeys(self.constraints))

    @property
    def removed(self) -> Set[str]:
        """Variables deleted by contraction."""
        return set(self.variables[1:])

    def node(self, i: int) -> ConstraintNode:
        """Timestamped copy of ``C_i`` (1-based)."""
        return ConstraintNode(self.constraints[i - 1], self.timestamps[i - 1])

    def dag(self) -> FDag:
        """The two directed paths ``b0 -> ... -> C_ell`` and
        ``bk -> Ck -> ... -> C_ell``."""
        b = self.variables
        first: List[Node] = []
        for i in range(1, self.ell + 1):
            first.extend([b[i - 1], self.node(i)])
        second: List[Node] = []
        for i in range(self.k, self.ell, -1):
            second.extend([b[i], self.node(i)])
        second.extend([b[self.ell], self.node(self.ell)])
        return FDag.from_paths(first, second)

    def to_dict(self) -> dict:
        """JSON form used in traces."""
        return {'walk': str(self.walk), 'ell': self.ell,
                'timestamps': list(self.timestamps),
                'stem': None if self.stem is None else str(self.stem)}


@dataclass(frozen=True)
class ContractionRecord:
    """Everything needed to lift an improvement of the contracted instance."""

    instance: Instance
    labeling: EdgeLabeling
    blossom: BlossomData
    contracted_instance: Instance
    contracted_labeling: EdgeLabeling
    junction: str
    contracted_vars: Dict[str, str]

    @property
    def entry_variable(self) -> str:
        """``v_{C1}``, the inconsistent variable of the junction."""
        return self.contracted_vars[self.blossom.constraints[0]]


@dataclass(frozen=True)
class Improved:
    """A strictly better labeling."""

    labeling: EdgeLabeling


@dataclass(frozen=True)
class Optimal:
    """Certificate that the labeling given to improve is optimal."""

    depth: int = 0


@dataclass(frozen=True)
class _BlossomHit:
    forest: Forest
    var: str
    node: ConstraintNode
    other: str


class SolverObserver:
    """Hooks called at the checkpoints of a solve. Every hook is a no-op."""

    def on_forest(self, instance: Instance, labeling: EdgeLabeling,
                  dag: FDag):
        """After the forest gains a node."""

    def on_star(self, instance: Instance, labeling: EdgeLabeling, dag: FDag):
        """When two branches touch: the forest plus the closing edge."""

    def on_contract(self, record: ContractionRecord):
        """After a blossom has been contracted."""

    def on_lift_dag(self, instance: Instance, labeling: EdgeLabeling,
                    dag: FDag):
        """Before the DAG that lifts an improvement is applied."""


class InvariantObserver(SolverObserver):
    """Raise InvariantBreach whenever a checkpoint structure is not an
    f-DAG or a contraction breaks its bookkeeping."""

    def _check(self, what, instance, labeling, dag):
        violations = validate_fdag(instance, labeling, dag)
        if violations:
            raise InvariantBreach(f"{what} is not an f-DAG: {violations}")

    def on_forest(self, instance, labeling, dag):
        self._check('forest', instance, labeling, dag)

    def on_star(self, instance, labeling, dag):
        self._check('closed forest', instance, labeling, dag)

    def on_contract(self, record):
        self._check('blossom', record.instance, record.labeling,
                    record.blossom.dag())
        check_contraction(record)

    def on_lift_dag(self, instance, labeling, dag):
        self._check('lift', instance, labeling, dag)


def check_contraction(record: ContractionRecord):
    """Sizes, validity, counts and even Δ-matroid relations of a contraction.

    Raises:
        InvariantBreach: on the first broken property
    """
    before, after = record.instance, record.contracted_instance
    if len(after.variables) > len(before.variables):
        raise InvariantBreach("Contraction added variables.")
    if len(after.constraints) != len(before.constraints) + 1:
        raise InvariantBreach("Contraction must add exactly one constraint.")
    if not is_valid(after, record.contracted_labeling):
        raise InvariantBreach("Contracted labeling is not valid.")
    if inconsistency_count(after, record.contracted_labeling) != \
            inconsistency_count(before, record.labeling):
        raise InvariantBreach("Contraction changed the inconsistency count.")
    for cid in record.blossom.members:
        if not is_even_delta_matroid(after.relation(cid)):
            raise InvariantBreach(
                f"Contracted {cid} is not an even Δ-matroid.")


def extract_blossom(forest: Forest, labeling: EdgeLabeling, var: str,
                    node: ConstraintNode, other: str) \
        -> Tuple[EdgeLabeling, BlossomData]:
    """Read the blossom closed by ``var -> node`` and ``other``.

    When the branches split at a variable, that variable is a root and the
    labeling is kept. When they split at a constraint ``R^s``, the labeling
    is re-routed along walk(r) for the child r of ``R^s`` above ``var`` so
    that r becomes the inconsistent base.

    Returns:
        (f', blossom)

    Raises:
        InstanceError: if the two variables are in different trees
    """
    if forest.root_of(var) != forest.root_of(other):
        raise InstanceError(f"{var} and {other} are in different trees.")

    split = forest.lowest_common_ancestor(node, other)
    to_node = forest.path(node)
    to_other = forest.path(other)

    if isinstance(split, ConstraintNode):
        base = to_node[to_node.index(split) + 1]
        first = to_node[to_node.index(base):]
        second = to_other[to_other.index(split):]
        nodes = first + second[::-1] + [base]
        stem = Walk.from_nodes(_names(forest.path(base)))
        labeling = apply_walk(labeling, stem)
    else:
        if forest.parent[split] is not None:
            raise InvariantBreach(f"Branches split at non-root {split}.")
        first = to_node
        second = to_other[to_other.index(split):]
        nodes = first + second[::-1]
        stem = None

    ell = sum(1 for n in first if isinstance(n, ConstraintNode))
    timestamps = tuple(n.timestamp for n in nodes
                       if isinstance(n, ConstraintNode))
    blossom = BlossomData(Walk.from_nodes(_names(nodes)), ell, timestamps,
                          stem)
    return labeling, blossom


def _fresh(name: str, taken: Set[str]) -> str:
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def contract(instance: Instance, labeling: EdgeLabeling,
             blossom: BlossomData, level: int = 1) -> ContractionRecord:
    """Contract a blossom into a junction constraint.

    Blossom variables ``b1 .. bk`` are deleted. Each blossom constraint D
    keeps its id, loses those variables and gains a fresh ``v_D``; its tuples
    are the restrictions of tuples that agree with f(D) on the blossom
    variables (``v_D = 0``) or differ from it in exactly one (``v_D = 1``).
    The junction constraint over all ``v_D`` is the one-hot relation.

    Raises:
        InstanceError: if the walk is not a closed walk on the instance
    """
    b = blossom.variables
    if len(b) < 3 or b[0] != b[-1]:
        raise InstanceError(f"{blossom.walk} is not a closed walk.")
    removed = blossom.removed
    members = blossom.members

    taken = set(instance.variables) | set(instance.constraint_ids)
    contracted_vars = {cid: _fresh(f"~v{level}.{cid}", taken)
                       for cid in members}
    junction = _fresh(f"~N{level}", taken)

    constraints = []
    values: Dict[HalfEdge, int] = {}
    for con in instance.constraints:
        if con.cid not in contracted_vars:
            constraints.append(con)
            for var in con.scope:
                values[(var, con.cid)] = labeling[(var, con.cid)]
            continue
        relation = con.relation
        keep = [i for i, v in enumerate(relation.scope) if v not in removed]
        inner = [i for i, v in enumerate(relation.scope) if v in removed]
        current = labeling.tuple_at(instance, con.cid)
        tuples = []
        for bits in relation:
            moved = sum(1 for i in inner if bits[i] != current[i])
            if moved <= 1:
                tuples.append(tuple(bits[i] for i in keep) + (moved,))
        v_d = contracted_vars[con.cid]
        scope = tuple(relation.scope[i] for i in keep) + (v_d,)
        constraints.append(Constraint(con.cid, Relation(scope, tuples),
                                      con.oracle))
        for i in keep:
            values[(relation.scope[i], con.cid)] = current[i]
        values[(v_d, con.cid)] = 0

    scope = tuple(contracted_vars[cid] for cid in members)
    one_hot = tuple(tuple(int(i == j) for i in range(len(scope)))
                    for j in range(len(scope)))
    constraints.append(Constraint(junction, Relation(scope, one_hot)))
    for i, v_d in enumerate(scope):
        values[(v_d, junction)] = int(i == 0)

    variables = [v for v in instance.variables if v not in removed] + \
        list(scope)
    contracted = Instance(constraints, variables)
    return ContractionRecord(instance, labeling, blossom, contracted,
                             EdgeLabeling(values), junction, contracted_vars)


def _check_improvement(instance: Instance, labeling: EdgeLabeling,
                       better: EdgeLabeling):
    if not is_valid(instance, labeling) or not is_valid(instance, better):
        raise InstanceError("Both labelings must be valid.")
    if inconsistency_count(instance, better) >= \
            inconsistency_count(instance, labeling):
        raise NotImprovingError("The second labeling is not strictly better.")


def find_augmenting_walk(instance: Instance, labeling: EdgeLabeling,
                         better: EdgeLabeling,
                         avoid: Optional[str] = None) -> Walk:
    """An augmenting walk for ``labeling`` that does not start at ``avoid``.

    First ``better`` is pulled towards ``labeling`` until every variable
    consistent in ``labeling`` is consistent in it too; then a walk is grown
    from an inconsistent variable inside the remaining difference.

    Raises:
        NotImprovingError: if ``better`` has no fewer inconsistencies
    """
    _check_improvement(instance, labeling, better)
    g = better

    def pick(target: EdgeLabeling, var: str, cid: str, diff: Set[HalfEdge]):
        for other in instance.scope(cid):
            if other != var and (other, cid) in diff and \
                    can_flip(instance, target, cid, var, other):
                return other
        raise InvariantBreach(f"No exchange for {var} at {cid}.")

    def unique_difference(target: EdgeLabeling, var: str) -> str:
        cids = [cid for cid in instance.occurrences[var]
                if target[(var, cid)] != g[(var, cid)]]
        if len(cids) != 1:
            raise InvariantBreach(f"{var} does not differ on one half-edge.")
        return cids[0]

    while True:
        var = next((v for v in instance.variables
                    if is_consistent(instance, labeling, v)
                    and not is_consistent(instance, g, v)), None)
        if var is None:
            break
        cid = unique_difference(labeling, var)
        diff = set(labeling.difference(g))
        other = pick(g, var, cid, diff)
        g = g.flip([(var, cid), (other, cid)])

    start = next((v for v in instance.variables
                  if v != avoid and not is_consistent(instance, labeling, v)
                  and is_consistent(instance, g, v)), None)
    if start is None:
        raise InvariantBreach("No start for an augmenting walk.")

    current = labeling
    walk = Walk(start)
    while True:
        var = walk.end
        cid = unique_difference(current, var)
        diff = set(current.difference(g))
        other = pick(current, var, cid, diff)
        walk = walk.extend(cid, other)
        current = current.flip([(var, cid), (other, cid)])
        if not is_consistent(instance, labeling, other):
            return walk


def _free_constraints(instance: Instance, walk: Walk) -> List[str]:
    pair = list(instance.occurrences[walk.end])
    if walk.steps:
        pair.remove(walk.steps[-1][0])
    return pair


def _entry_candidates(instance: Instance, labeling: EdgeLabeling,
                      blossom: BlossomData, var: str, free: List[str]) \
        -> List[Tuple[int, str]]:
    """``(j, "fwd")`` when ``var C_j b_j`` is a walk, ``(j, "back")`` when
    ``var C_j b_(j-1)`` is."""
    b = blossom.variables
    out = []
    for j, cid in enumerate(blossom.constraints, start=1):
        if cid not in free:
            continue
        if can_flip(instance, labeling, cid, var, b[j]):
            out.append((j, 'fwd'))
        if can_flip(instance, labeling, cid, var, b[j - 1]):
            out.append((j, 'back'))
    return out


def _lift_dag(blossom: BlossomData, var: str, j: int, side: str) -> FDag:
    b = blossom.variables
    k, ell = blossom.k, blossom.ell
    entry = [var, blossom.node(j)]
    if side == 'fwd' and j >= ell:
        path: List[Node] = []
        for i in range(k, j, -1):
            path.extend([b[i], blossom.node(i)])
        path.append(b[j])
        return FDag.from_paths(path + [blossom.node(j), var])
    if side == 'back' and j <= ell:
        path = []
        for i in range(1, j):
            path.extend([b[i - 1], blossom.node(i)])
        path.append(b[j - 1])
        return FDag.from_paths(path + [blossom.node(j), var])
    if side == 'fwd':
        first = entry + [b[j]]
        for i in range(j + 1, ell):
            first.extend([blossom.node(i), b[i]])
        first.append(blossom.node(ell))
        second: List[Node] = []
        for i in range(k, ell, -1):
            second.extend([b[i], blossom.node(i)])
        second.extend([b[ell], blossom.node(ell)])
        return FDag.from_paths(first, second)
    first = entry + [b[j - 1]]
    for i in range(j - 1, ell, -1):
        first.extend([blossom.node(i), b[i - 1]])
    first.append(blossom.node(ell))
    second = []
    for i in range(1, ell):
        second.extend([b[i - 1], blossom.node(i)])
    second.extend([b[ell - 1], blossom.node(ell)])
    return FDag.from_paths(first, second)


def select_entry(candidates: List[Tuple[int, str]],
                 blossom: BlossomData) -> Tuple[int, str]:
    """Pick where to enter the blossom.

    The last forward entry at or after ``ell`` wins, then the first backward
    entry at or before ``ell``, then the entry with the latest timestamp.
    """
    ell = blossom.ell
    forward = [j for j, side in candidates if side == 'fwd' and j >= ell]
    if forward:
        return max(forward), 'fwd'
    backward = [j for j, side in candidates if side == 'back' and j <= ell]
    if backward:
        return min(backward), 'back'
    if not candidates:
        raise InvariantBreach("No entry into the blossom.")
    return max(candidates, key=lambda c: blossom.timestamps[c[0] - 1])


def entry_walk(blossom: BlossomData, var: str, j: int, side: str) -> Walk:
    """``var C_j b_j ... C_k b_k`` forwards, ``var C_j b_(j-1) ... C_1 b_0``
    backwards."""
    b, cons = blossom.variables, blossom.constraints
    nodes = [var]
    if side == 'fwd':
        for i in range(j, blossom.k + 1):
            nodes.extend([cons[i - 1], b[i]])
    else:
        for i in range(j, 0, -1):
            nodes.extend([cons[i - 1], b[i - 1]])
    return Walk.from_nodes(nodes)


def lift_improvement(record: ContractionRecord, better: EdgeLabeling,
                     observer: Optional[SolverObserver] = None) \
        -> EdgeLabeling:
    """Turn a better labeling of the contracted instance into a labeling of
    the original instance with two fewer inconsistencies.

    Raises:
        NotImprovingError: if ``better`` does not improve the contracted
            labeling
    """
    instance, labeling = record.instance, record.labeling
    blossom = record.blossom
    walk = find_augmenting_walk(record.contracted_instance,
                                record.contracted_labeling, better,
                                record.entry_variable)
    contracted = set(record.contracted_vars.values())
    hit = next((i for i, v in enumerate(walk.variables) if v in contracted),
               None)

    if hit is None:
        lifted = apply_walk(labeling, walk)
    else:
        reach = walk.prefix(hit - 1)
        current = labeling
        found = None
        for m in range(len(reach.steps) + 1):
            prefix = reach.prefix(m)
            if m:
                cid, var = prefix.steps[-1]
                current = current.flip([(prefix.variables[-2], cid),
                                        (var, cid)])
            candidates = _entry_candidates(
                instance, current, blossom, prefix.end,
                _free_constraints(instance, prefix))
            if candidates:
                found = prefix, current, candidates
                break
        if found is None:
            raise InvariantBreach("Walk never reaches the blossom.")
        prefix, current, candidates = found
        j, side = select_entry(candidates, blossom)
        dag = _lift_dag(blossom, prefix.end, j, side)
        if observer is not None:
            observer.on_lift_dag(instance, current, dag)
        lifted = apply_dag(current, dag)
        if lifted != apply_walk(current,
                                entry_walk(blossom, prefix.end, j, side)):
            raise InvariantBreach("Lift DAG and entry walk disagree.")

    if not is_valid(instance, lifted) or \
            inconsistency_count(instance, lifted) >= \
            inconsistency_count(instance, labeling):
        raise InvariantBreach("Lifted labeling does not improve.")
    return lifted


@dataclass
class SolverTrace:
    """Machine-readable record of a solve."""

    events: List[dict] = field(default_factory=list)
    improve_calls: int = 0
    augmentations: int = 0
    contractions: int = 0
    lifts: int = 0
    max_depth: int = 0

    def record(self, event: str, **data):
        """Append one event."""
        self.events.append({'event': event, **data})

    def stats(self) -> dict:
        """Counters of the solve."""
        return {'improve_calls': self.improve_calls,
                'augmentations': self.augmentations,
                'contractions': self.contractions,
                'lifts': self.lifts, 'max_depth': self.max_depth}

    def to_jsonl(self) -> str:
        """One JSON document per event."""
        return ''.join(json.dumps(e, sort_keys=True) + '\n'
                       for e in self.events)


class BlossomSolver:
    """Improve and optimize edge labelings of even Δ-matroid instances."""

    def __init__(self, check_invariants: bool = None,
                 observer: Optional[SolverObserver] = None,
                 logger_name: str = None, verbose: bool = False):
        """
        Args:
            check_invariants: validate every forest, blossom, contraction and
                lift DAG; defaults to ``solver.check_invariants``
            observer: extra hooks, called after the invariant checks
            logger_name: name of the logger, the calling script by default
            verbose: log run summaries at INFO
        """
        self.logger = get_logger(logger_name, verbose)
        self.observers: List[SolverObserver] = []
        if setting('solver.check_invariants', check_invariants):
            self.observers.append(InvariantObserver())
        if observer is not None:
            self.observers.append(observer)
        self.trace = SolverTrace()

    def _notify(self, hook: str, *args):
        for observer in self.observers:
            getattr(observer, hook)(*args)

    def _grow(self, instance: Instance, labeling: EdgeLabeling, depth: int) \
            -> Union[Optimal, Improved, _BlossomHit]:
        forest = Forest(instance, labeling)
        self._notify('on_forest', instance, labeling, forest.dag)
        while True:
            edge = forest.next_edge()
            if edge is None:
                return Optimal(depth)
            var, cid = edge
            node = forest.add_constraint(var, cid)
            others = [w for w in instance.scope(cid) if w != var and
                      can_flip(instance, labeling, cid, var, w)]
            self.trace.record('expand', depth=depth, variable=var,
                              constraint=cid, timestamp=node.timestamp)
            self.logger.debug(f"expand {var} -> {node} W={others}")
            self._notify('on_forest', instance, labeling, forest.dag)

            for other in others:
                if other not in forest:
                    forest.add_variable(other, node)
                    self._notify('on_forest', instance, labeling, forest.dag)
                    continue
                parent = forest.parent[other]
                if isinstance(parent, ConstraintNode) and \
                        parent.constraint == cid:
                    continue
                if (other, cid) in forest.used:
                    raise InvariantBreach(
                        f"{other}-{cid} already used in the forest.")
                self._notify('on_star', instance, labeling,
                             forest.star(node, other))
                if forest.root_of(var) != forest.root_of(other):
                    nodes = forest.path(node) + forest.path(other)[::-1]
                    walk = Walk.from_nodes(_names(nodes))
                    self.trace.record('augment', depth=depth,
                                      walk=str(walk))
                    self.trace.augmentations += 1
                    return Improved(apply_walk(labeling, walk))
                return _BlossomHit(forest, var, node, other)
            forest.timestamp += 1

    def improve(self, instance: Instance, labeling: EdgeLabeling) \
            -> Union[Improved, Optimal]:
        """Return a valid labeling with two fewer inconsistencies, or a
        certificate that ``labeling`` is optimal.

        Raises:
            InstanceError: if ``labeling`` is not valid
        """
        check_labeling(instance, labeling)
        if not is_valid(instance, labeling):
            raise InstanceError("improve needs a valid labeling.")
        self.trace.improve_calls += 1
        count = inconsistency_count(instance, labeling)

        records: List[ContractionRecord] = []
        current_instance, current = instance, labeling
        bound = 2 * len(instance.variables)
        while True:
            outcome = self._grow(current_instance, current, len(records))
            if isinstance(outcome, Optimal):
                self.trace.record('optimal', depth=len(records), count=count)
                return outcome
            if isinstance(outcome, Improved):
                better = outcome.labeling
                break

            flipped, blossom = extract_blossom(outcome.forest, current,
                                               outcome.var, outcome.node,
                                               outcome.other)
            self.trace.record('blossom', depth=len(records),
                              **blossom.to_dict())
            record = contract(current_instance, flipped, blossom,
                              len(records) + 1)
            records.append(record)
            self._notify('on_contract', record)
            self.trace.record('contract', depth=len(records),
                              junction=record.junction,
                              members=list(blossom.members))
            self.trace.contractions += 1
            self.trace.max_depth = max(self.trace.max_depth, len(records))
            self.logger.debug(f"contract {blossom.walk} into "
                              f"{record.junction}")
            if len(records) > bound:
                raise InvariantBreach(
                    f"Contraction depth {len(records)} exceeds {bound}.")
            current_instance = record.contracted_instance
            current = record.contracted_labeling

        for record in reversed(records):
            better = lift_improvement(record, better, self)
            self.trace.lifts += 1
            self.trace.record('lift', junction=record.junction,
                              count=inconsistency_count(record.instance,
                                                        better))

        if not is_valid(instance, better) or \
                inconsistency_count(instance, better) != count - 2:
            raise InvariantBreach("improve did not remove two "
                                  "inconsistencies.")
        return Improved(better)

    def on_lift_dag(self, instance, labeling, dag):
        """Forward lift DAGs to the registered observers."""
        self._notify('on_lift_dag', instance, labeling, dag)

    def optimize(self, instance: Instance,
                 labeling: Optional[EdgeLabeling] = None) \
            -> Tuple[EdgeLabeling, int, SolverTrace]:
        """Improve until optimal, starting from ``labeling`` or the
        canonical initial labeling.

        Returns:
            (labeling, count, trace)

        Raises:
            SolverRefusal: if some constraint is not an even Δ-matroid
        """
        require_valid_instance(instance)
        odd = [c.cid for c in instance.constraints
               if not is_even_delta_matroid(c.relation)]
        if odd:
            raise SolverRefusal(
                f"Constraints {odd} are not even Δ-matroids; solve the "
                f"instance with edgecsp.coverable instead.")

        current = labeling if labeling is not None \
            else initial_labeling(instance)
        while True:
            outcome = self.improve(instance, current)
            if isinstance(outcome, Optimal):
                break
            current = outcome.labeling

        count = inconsistency_count(instance, current)
        self.logger.info(f"Optimum {count} after "
                         f"{self.trace.augmentations} augmentations and "
                         f"{self.trace.contractions} contractions")
        return current, count, self.trace


def improve(instance: Instance, labeling: EdgeLabeling) \
        -> Union[Improved, Optimal]:
    """One improve call with a fresh solver."""
    return BlossomSolver().improve(instance, labeling)


def optimize(instance: Instance, labeling: Optional[EdgeLabeling] = None) \
        -> Tuple[EdgeLabeling, int, SolverTrace]:
    """Optimal labeling, its inconsistency count and the solve trace."""
    return BlossomSolver().optimize(instance, labeling)


def has_solution(instance: Instance) -> bool:
    """True iff the instance has a satisfying assignment."""
    return optimize(instance)[1] == 0
