# -*- coding: utf-8 -*-
# pylint: disable=logging-fstring-interpolation
"""
Edge CSP instances, their constraint graph, edge labelings and the
exhaustive optimum oracle.
"""

import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass
from functools import reduce
from multiprocessing import Pool
from operator import mul
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from tqdm import tqdm

from .dmatroid import Bits, Relation, is_even_delta_matroid
from .errors import InstanceError, OracleBoundError, ParseError, \
    RelationError
from .utils import setting

logger = logging.getLogger(__name__)

HalfEdge = Tuple[str, str]


@dataclass(frozen=True)
class Constraint:
    """A constraint node: an identifier, its relation and an optional
    cover-oracle configuration."""

    cid: str
    relation: Relation
    oracle: Optional[dict] = None

    @property
    def scope(self) -> Tuple[str, ...]:
        """Scope of the underlying relation."""
        return self.relation.scope


class Instance:
    """An edge CSP instance.

    Every variable is expected to occur in exactly two constraints; the
    class itself also stores relaxed instances (degrees up to two) so that
    they can be diagnosed or normalized.
    """

    def __init__(self, constraints: Sequence[Constraint],
                 variables: Optional[Sequence[str]] = None):
        self.constraints: Tuple[Constraint, ...] = tuple(constraints)
        self._by_id: Dict[str, Constraint] = {}
        for con in self.constraints:
            if con.cid in self._by_id:
                raise InstanceError(f"Constraint id {con.cid!r} repeats.")
            self._by_id[con.cid] = con

        occurrences: Dict[str, List[str]] = {}
        for con in self.constraints:
            for var in con.scope:
                occurrences.setdefault(var, []).append(con.cid)

        if variables is None:
            variables = list(occurrences)
        self.variables: Tuple[str, ...] = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise InstanceError("Variable list repeats a variable.")
        self.declared = frozenset(self.variables)
        self.occurrences: Dict[str, Tuple[str, ...]] = {
            var: tuple(occurrences.get(var, ())) for var in self.variables}
        self.undeclared = tuple(v for v in occurrences
                                if v not in self.declared)

    @classmethod
    def from_relations(cls, relations: Iterable[Tuple[str, Relation]]):
        """Build an instance from ``(cid, relation)`` pairs."""
        return cls([Constraint(cid, rel) for cid, rel in relations])

    @classmethod
    def from_dict(cls, data: dict):
        """Build an instance from the JSON instance document."""
        try:
            constraints = [
                Constraint(str(c['id']),
                           Relation.from_strings(c['scope'], c['tuples']),
                           c.get('oracle'))
                for c in data['constraints']
            ]
            variables = data.get('variables')
            return cls(constraints, variables)
        except (KeyError, TypeError, RelationError) as err:
            raise ParseError(f"Malformed instance document: {err}") from err

    def to_dict(self) -> dict:
        """Inverse of :meth:`from_dict`."""
        out = []
        for con in self.constraints:
            doc = {'id': con.cid, **con.relation.to_dict()}
            if con.oracle is not None:
                doc['oracle'] = con.oracle
            out.append(doc)
        return {'variables': list(self.variables), 'constraints': out}

    def constraint(self, cid: str) -> Constraint:
        """Look up a constraint by id."""
        try:
            return self._by_id[cid]
        except KeyError as err:
            raise InstanceError(f"Unknown constraint {cid!r}.") from err

    def relation(self, cid: str) -> Relation:
        """Relation of a constraint."""
        return self.constraint(cid).relation

    def scope(self, cid: str) -> Tuple[str, ...]:
        """Scope of a constraint."""
        return self.constraint(cid).scope

    @property
    def constraint_ids(self) -> Tuple[str, ...]:
        """Constraint ids in canonical (file) order."""
        return tuple(con.cid for con in self.constraints)

    def degree(self, var: str) -> int:
        """Number of constraints a variable occurs in."""
        return len(self.occurrences.get(var, ()))

    def other_constraint(self, var: str, cid: str) -> str:
        """The constraint at the other end of a variable."""
        pair = self.occurrences[var]
        if len(pair) != 2 or cid not in pair:
            raise InstanceError(
                f"Variable {var!r} has no second constraint besides {cid!r}.")
        return pair[1] if pair[0] == cid else pair[0]

    @property
    def half_edges(self) -> Tuple[HalfEdge, ...]:
        """All edges ``{v, C}`` of the constraint graph, constraint-major."""
        return tuple((var, con.cid) for con in self.constraints
                     for var in con.scope)

    def with_relations(self, replacements: Dict[str, Relation]):
        """Copy of the instance with some relations swapped, scopes kept."""
        constraints = []
        for con in self.constraints:
            if con.cid in replacements:
                rel = replacements[con.cid]
                if rel.scope != con.scope:
                    rel = rel.reorder(con.scope)
                con = Constraint(con.cid, rel, con.oracle)
            constraints.append(con)
        return Instance(constraints, self.variables)

    def __repr__(self):
        return (f"Instance({len(self.variables)} variables, "
                f"{len(self.constraints)} constraints)")


def load_instance(path: str) -> Instance:
    """Read an instance from a JSON file."""
    with open(path) as ifile:
        try:
            data = json.load(ifile)
        except json.JSONDecodeError as err:
            raise ParseError(f"{path}: {err}") from err
    return Instance.from_dict(data)


class EdgeLabeling(Mapping):
    """An immutable assignment of a bit to every half-edge ``(v, C)``."""

    def __init__(self, values: Dict[HalfEdge, int]):
        self._values = {edge: int(bit) for edge, bit in values.items()}
        if any(b not in (0, 1) for b in self._values.values()):
            raise InstanceError("Edge labels must be 0 or 1.")

    def __getitem__(self, edge: HalfEdge) -> int:
        return self._values[edge]

    def __iter__(self) -> Iterator[HalfEdge]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __eq__(self, other):
        if isinstance(other, EdgeLabeling):
            return self._values == other._values
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._values.items()))

    def __repr__(self):
        return f"EdgeLabeling({self.to_dict()})"

    def tuple_at(self, instance: Instance, cid: str) -> Bits:
        """The tuple f(C) seen by a constraint, in scope order."""
        return tuple(self._values[(var, cid)] for var in instance.scope(cid))

    def flip(self, edges: Iterable[HalfEdge]):
        """New labeling with the given half-edges flipped."""
        values = dict(self._values)
        for edge in edges:
            values[edge] ^= 1
        return EdgeLabeling(values)

    def with_tuple(self, instance: Instance, cid: str, bits: Bits):
        """New labeling where constraint ``cid`` sees ``bits``."""
        values = dict(self._values)
        for var, bit in zip(instance.scope(cid), bits):
            values[(var, cid)] = bit
        return EdgeLabeling(values)

    def difference(self, other) -> List[HalfEdge]:
        """Half-edges on which two labelings disagree (f △ g)."""
        return [e for e in self._values if self._values[e] != other[e]]

    def to_dict(self) -> Dict[str, int]:
        """JSON form: ``"var@constraint" -> bit``, sorted by key."""
        return {f"{v}@{c}": b for (v, c), b in sorted(self._values.items())}

    @classmethod
    def from_dict(cls, data: Dict[str, int]):
        """Inverse of :meth:`to_dict`."""
        values = {}
        for key, bit in data.items():
            var, sep, cid = str(key).rpartition('@')
            if not sep or not var:
                raise ParseError(
                    f"Labeling key {key!r} is not var@constraint.")
            values[(var, cid)] = bit
        return cls(values)

    @classmethod
    def from_tuples(cls, instance: Instance, chosen: Dict[str, Bits]):
        """Labeling where each constraint sees its chosen tuple."""
        values = {}
        for con in instance.constraints:
            for var, bit in zip(con.scope, chosen[con.cid]):
                values[(var, con.cid)] = bit
        return cls(values)


def validate_instance(instance: Instance) -> List[str]:
    """Diagnose an instance. An empty list means the instance is valid.

    Returns:
        diagnostics such as ``"variable x: degree 1"``
    """
    diagnostics = []
    for var in instance.variables:
        degree = instance.degree(var)
        if degree != 2:
            diagnostics.append(f"variable {var}: degree {degree}")
    for var in instance.undeclared:
        diagnostics.append(f"variable {var}: not declared")
    for con in instance.constraints:
        if con.relation.is_empty():
            diagnostics.append(f"constraint {con.cid}: empty relation")
        if con.relation.arity == 0:
            diagnostics.append(f"constraint {con.cid}: empty scope")
    return diagnostics


def require_valid_instance(instance: Instance):
    """Raise InstanceError unless the instance passes validation."""
    diagnostics = validate_instance(instance)
    if diagnostics:
        raise InstanceError('; '.join(diagnostics))


def normalize_degree(relaxed: Instance) -> Instance:
    """Double a relaxed instance into a proper edge CSP instance.

    Each constraint ``C`` becomes ``C#1`` and ``C#2``. A variable of degree
    two becomes ``v#1`` and ``v#2``, one per copy; a variable of degree one
    keeps its name and joins the two copies of its constraint.

    Raises:
        InstanceError: if some variable occurs in more than two constraints
    """
    for var in relaxed.variables:
        if relaxed.degree(var) > 2:
            raise InstanceError(
                f"variable {var}: degree {relaxed.degree(var)}")

    constraints = []
    variables: List[str] = []
    for copy in (1, 2):
        for con in relaxed.constraints:
            mapping = {}
            for var in con.scope:
                if relaxed.degree(var) == 2:
                    mapping[var] = f"{var}#{copy}"
                else:
                    mapping[var] = var
            constraints.append(Constraint(f"{con.cid}#{copy}",
                                          con.relation.rename(mapping),
                                          con.oracle))
        for var in relaxed.variables:
            if relaxed.degree(var) == 2:
                variables.append(f"{var}#{copy}")
            elif relaxed.degree(var) == 1 and copy == 1:
                variables.append(var)

    return Instance(constraints, variables)


def check_labeling(instance: Instance, labeling: EdgeLabeling):
    """Raise InstanceError unless the labeling covers exactly the edges."""
    edges = set(instance.half_edges)
    if set(labeling) != edges:
        missing = sorted(edges - set(labeling))
        extra = sorted(set(labeling) - edges)
        raise InstanceError(
            f"Labeling is not total on the constraint graph "
            f"(missing {missing[:3]}, unknown {extra[:3]}).")


def initial_labeling(instance: Instance) -> EdgeLabeling:
    """Give every constraint its canonically-first tuple."""
    chosen = {}
    for con in instance.constraints:
        if con.relation.is_empty():
            raise InstanceError(f"constraint {con.cid}: empty relation")
        chosen[con.cid] = con.relation.tuples[0]
    return EdgeLabeling.from_tuples(instance, chosen)


def is_valid(instance: Instance, labeling: EdgeLabeling) -> bool:
    """True iff every constraint sees one of its tuples."""
    check_labeling(instance, labeling)
    return all(labeling.tuple_at(instance, con.cid) in con.relation
               for con in instance.constraints)


def is_consistent(instance: Instance, labeling: EdgeLabeling,
                  var: str) -> bool:
    """A variable is consistent when its half-edges agree.

    Variables with a single half-edge are always consistent.
    """
    pair = instance.occurrences[var]
    if len(pair) != 2:
        return True
    return labeling[(var, pair[0])] == labeling[(var, pair[1])]


def inconsistent_variables(instance: Instance,
                           labeling: EdgeLabeling) -> List[str]:
    """Inconsistent variables in instance order."""
    check_labeling(instance, labeling)
    return [v for v in instance.variables
            if not is_consistent(instance, labeling, v)]


def inconsistency_count(instance: Instance, labeling: EdgeLabeling) -> int:
    """Number of inconsistent variables."""
    return len(inconsistent_variables(instance, labeling))


def parity_invariant_check(instance: Instance, first: EdgeLabeling,
                           second: EdgeLabeling) -> bool:
    """True iff two valid labelings have congruent counts modulo 2."""
    for labeling in (first, second):
        if not is_valid(instance, labeling):
            raise InstanceError("Parity check needs valid labelings.")
    return (inconsistency_count(instance, first)
            - inconsistency_count(instance, second)) % 2 == 0


def labeling_from_assignment(instance: Instance,
                             assignment: Dict[str, int]) -> EdgeLabeling:
    """The consistent labeling induced by a variable assignment."""
    try:
        return EdgeLabeling({(v, c): assignment[v]
                             for v, c in instance.half_edges})
    except KeyError as err:
        raise InstanceError(f"Assignment misses variable {err}.") from err


def labeling_space(instance: Instance) -> int:
    """Number of valid labelings an exhaustive search would visit."""
    return reduce(mul, (len(con.relation) for con in instance.constraints), 1)


def iter_valid_labelings(instance: Instance,
                         bound: int = None) -> Iterator[EdgeLabeling]:
    """Every valid labeling, one tuple choice per constraint."""
    bound = setting('oracle.max_labelings', bound)
    if labeling_space(instance) > bound:
        raise OracleBoundError(
            f"{labeling_space(instance)} labelings exceed the bound {bound}.")

    def rec(k, chosen):
        if k == len(instance.constraints):
            yield EdgeLabeling.from_tuples(instance, chosen)
            return
        con = instance.constraints[k]
        for bits in con.relation:
            chosen[con.cid] = bits
            yield from rec(k + 1, chosen)
        chosen.pop(con.cid, None)

    yield from rec(0, {})


class _BranchSearch:
    """Depth-first branch and bound over tuple choices, one constraint per
    level. Picklable so that branches can run in worker processes."""

    def __init__(self, instance: Instance, floor: int):
        self.relations = [con.relation.tuples for con in instance.constraints]
        self.floor = floor
        index = {con.cid: k for k, con in enumerate(instance.constraints)}
        self.checks: List[List[Tuple[int, int, int]]] = \
            [[] for _ in instance.constraints]
        for var in instance.variables:
            pair = instance.occurrences[var]
            if len(pair) != 2:
                continue
            first, second = sorted(pair, key=index.get)
            j, k = index[first], index[second]
            self.checks[k].append((instance.scope(second).index(var), j,
                                   instance.scope(first).index(var)))

    def search(self, first_choice: int) -> Tuple[int, Optional[List[int]]]:
        """Best count and choice vector among labelings whose first
        constraint takes its ``first_choice``-th tuple."""
        best = [float('inf'), None]
        chosen = [first_choice]
        picked = [self.relations[0][first_choice]]

        def rec(k, count):
            if count >= best[0] or best[0] <= self.floor:
                return
            if k == len(self.relations):
                best[0], best[1] = count, list(chosen)
                return
            for idx, bits in enumerate(self.relations[k]):
                extra = sum(1 for pos, j, jpos in self.checks[k]
                            if bits[pos] != picked[j][jpos])
                chosen.append(idx)
                picked.append(bits)
                rec(k + 1, count + extra)
                chosen.pop()
                picked.pop()

        rec(1, 0)
        return best[0], best[1]


def _run_branch(args):
    searcher, first_choice = args
    return searcher.search(first_choice)


def brute_force_optimum(instance: Instance, bound: int = None,
                        nprocs: int = 1, progress: bool = False) \
        -> Tuple[int, EdgeLabeling]:
    """Exact minimum inconsistency count over all valid labelings.

    Branches are split on the tuple chosen for the first constraint and may
    run in ``nprocs`` worker processes; the smallest count wins, ties go to
    the earliest branch, so the witness does not depend on ``nprocs``.

    Args:
        instance: the instance to solve
        bound: maximal number of labelings to enumerate
        nprocs: number of worker processes
        progress: show a progress bar over the branches

    Returns:
        (count, witness): the optimum and an optimal labeling

    Raises:
        OracleBoundError: if the labeling space exceeds the bound
    """
    bound = setting('oracle.max_labelings', bound)
    space = labeling_space(instance)
    if space > bound:
        raise OracleBoundError(
            f"{space} labelings exceed the oracle bound {bound}.")
    if not instance.constraints:
        return 0, EdgeLabeling({})

    floor = 0
    if all(is_even_delta_matroid(c.relation) for c in instance.constraints):
        floor = inconsistency_count(instance, initial_labeling(instance)) % 2

    searcher = _BranchSearch(instance, floor)
    branches = [(searcher, i) for i in range(len(searcher.relations[0]))]
    if nprocs > 1 and len(branches) > 1:
        with Pool(nprocs) as pool:
            results = list(tqdm(pool.imap(_run_branch, branches),
                                total=len(branches), disable=not progress))
    else:
        results = []
        for branch in tqdm(branches, disable=not progress):
            results.append(_run_branch(branch))
            if results[-1][0] <= floor:
                break

    best_count, best_choice = min(
        ((count, i) for i, (count, _) in enumerate(results)
         if count != float('inf')), default=(None, None))
    if best_count is None:
        raise InstanceError("Instance has no valid labeling.")
    choice = results[best_choice][1]
    chosen = {con.cid: con.relation.tuples[idx]
              for con, idx in zip(instance.constraints, choice)}
    logger.debug(f"Oracle optimum {best_count} over {space} labelings")
    return int(best_count), EdgeLabeling.from_tuples(instance, chosen)
