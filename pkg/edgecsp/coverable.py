# -*- coding: utf-8 -*-
# pylint: disable=logging-fstring-interpolation
"""
Efficiently coverable Δ-matroids.

A cover of M at α is an even Δ-matroid M_α that contains every tuple
reachable from α and only adds tuples whose single flips stay inside M. With
a cover for every constraint the edge CSP is solved by trying every
constraint/tuple pair on an even restriction of the instance and lifting the
improvement back as a (possibly half-integral) augmenting walk.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations, product
from multiprocessing import Pool
from random import Random
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Set, \
    Tuple

import networkx as nx
from inflection import underscore
from tqdm import tqdm

from .blossom import BlossomSolver
from .dmatroid import Bits, Relation, contains_interference_minor, \
    direct_product, even_part, exchange_repairs, flip_bits, format_bits, \
    identify, is_delta_matroid, is_even, is_even_delta_matroid, odd_part, \
    ones, parity_class
from .errors import CoverError, InstanceError, InvariantBreach, \
    NotImprovingError, SolverRefusal
from .instance import EdgeLabeling, HalfEdge, Instance, \
    inconsistency_count, initial_labeling, is_consistent, is_valid, \
    require_valid_instance
from .utils import get_logger, setting
from .walks import Violation, Walk, apply_walk, can_flip, is_augmenting

logger = logging.getLogger(__name__)

CoverFunction = Callable[[Relation, Bits], Relation]


def _require_member(relation: Relation, alpha: Bits):
    if tuple(alpha) not in relation:
        raise CoverError(f"{format_bits(alpha)} is not a tuple of "
                         f"{relation}.")


def _single_flips(bits: Bits) -> Iterable[Bits]:
    return (flip_bits(bits, {u}) for u in range(len(bits)))


def _pairs(arity: int) -> Iterable[Tuple[int, int]]:
    return combinations(range(arity), 2)


# Reachability

def even_neighbors(relation: Relation, alpha: Bits) -> Set[Bits]:
    """Tuples ``β = α ⊕ u ⊕ v`` of M, u ≠ v, with ``α ⊕ u`` outside M.

    Raises:
        CoverError: if α is not in M
    """
    alpha = tuple(alpha)
    _require_member(relation, alpha)
    out = set()
    for u, v in _pairs(relation.arity):
        beta = flip_bits(alpha, {u, v})
        if beta in relation and (flip_bits(alpha, {u}) not in relation or
                                 flip_bits(alpha, {v}) not in relation):
            out.add(beta)
    return out


def reachability_graph(relation: Relation) -> nx.Graph:
    """Undirected graph on the tuples of M joining even-neighbours."""
    graph = nx.Graph()
    graph.add_nodes_from(relation.tuples)
    for alpha in relation:
        for beta in even_neighbors(relation, alpha):
            graph.add_edge(alpha, beta)
    return graph


def reachable_set(relation: Relation, alpha: Bits) -> Set[Bits]:
    """Every tuple reachable from α by a chain of even-neighbours, α
    included."""
    alpha = tuple(alpha)
    _require_member(relation, alpha)
    return set(nx.node_connected_component(reachability_graph(relation),
                                           alpha))


def verify_cover(relation: Relation, alpha: Bits,
                 cover: Relation) -> List[Violation]:
    """Check a candidate cover of M at α; an empty list means it is one.

    Items: 1 the cover is an even Δ-matroid over the scope of M, 2 it holds
    every tuple reachable from α, 3 a cover tuple outside M that is two
    flips away from a reachable tuple has both intermediate tuples in M.
    """
    alpha = tuple(alpha)
    _require_member(relation, alpha)
    if set(cover.scope) != set(relation.scope):
        return [Violation(1, f"scope {cover.scope} differs from "
                             f"{relation.scope}")]
    cover = cover.reorder(relation.scope)

    violations = []
    if cover.is_empty() or not is_even(cover):
        violations.append(Violation(1, "cover is empty or not even"))
    elif not is_delta_matroid(cover):
        violations.append(Violation(1, "cover is not a Δ-matroid"))

    reach = reachable_set(relation, alpha)
    for gamma in sorted(reach):
        if gamma not in cover:
            violations.append(Violation(
                2, f"reachable {format_bits(gamma)} missing"))

    for gamma in sorted(reach):
        for u, v in _pairs(relation.arity):
            delta = flip_bits(gamma, {u, v})
            if delta in cover and delta not in relation and \
                    (flip_bits(gamma, {u}) not in relation or
                     flip_bits(gamma, {v}) not in relation):
                violations.append(Violation(
                    3, f"{format_bits(delta)} added next to "
                       f"{format_bits(gamma)} without single flips in M"))
    return violations


# Co-independent

def is_coindependent(relation: Relation) -> bool:
    """Every tuple outside M has all its single flips inside M."""
    if relation.is_empty():
        return False
    for bits in product((0, 1), repeat=relation.arity):
        if bits not in relation and \
                not all(b in relation for b in _single_flips(bits)):
            return False
    return True


def cover_coindependent(relation: Relation, alpha: Bits) -> Relation:
    """The whole parity class of α.

    Raises:
        CoverError: if M is not co-independent or α is not in M
    """
    _require_member(relation, alpha)
    if not is_coindependent(relation):
        raise CoverError(f"{relation} is not co-independent.")
    return parity_class(relation.scope, ones(alpha))


# Compact

@dataclass(frozen=True)
class GcFunction:
    """A generalized counting function, evaluated on tuples.

    Changing one entry moves the value by exactly one, and a larger value
    can always be walked down (and a smaller one up) inside the difference
    of two tuples.
    """

    name: str
    function: Callable[[Bits], int] = field(compare=False)

    def __call__(self, bits: Bits) -> int:
        return self.function(tuple(bits))

    def check_axioms(self, arity: int, samples: int = None,
                     seed: int = None) -> List[str]:
        """Spot-check both axioms; exhaustive when the cube is small.

        Args:
            arity: length of the probed tuples
            samples: number of sampled tuples (and tuple pairs)
            seed: seed of the sampler

        Returns:
            descriptions of the failed probes
        """
        samples = setting('gc.samples', samples)
        rng = Random(setting('gc.seed', seed))
        if 2 ** arity <= samples:
            probes = list(product((0, 1), repeat=arity))
            pairs = [(a, b) for a in probes for b in probes]
        else:
            def draw():
                return tuple(rng.randint(0, 1) for _ in range(arity))
            probes = [draw() for _ in range(samples)]
            pairs = [(draw(), draw()) for _ in range(samples)]

        failures = []
        for alpha in probes:
            for beta in _single_flips(alpha):
                if abs(self(beta) - self(alpha)) != 1:
                    failures.append(
                        f"{self.name}: step {format_bits(alpha)} -> "
                        f"{format_bits(beta)} is not ±1")
        for alpha, beta in pairs:
            if self(alpha) <= self(beta):
                continue
            diff = [i for i in range(arity) if alpha[i] != beta[i]]
            down = any(self(flip_bits(alpha, {u})) == self(alpha) - 1
                       for u in diff)
            up = any(self(flip_bits(beta, {v})) == self(beta) + 1
                     for v in diff)
            if not (down and up):
                failures.append(f"{self.name}: no exchange between "
                                f"{format_bits(alpha)} and "
                                f"{format_bits(beta)}")
        return failures


gc_ones_count = GcFunction('ones', ones)

GC_FUNCTIONS: Dict[str, GcFunction] = {'ones': gc_ones_count}


def is_gap2_free(values: Iterable[int]) -> bool:
    """No missing value strictly inside the range has a missing
    neighbour."""
    values = set(values)
    if not values:
        return True
    low, high = min(values), max(values)
    return all(x - 1 in values and x + 1 in values
               for x in range(low + 1, high) if x not in values)


def _require_compact(relation: Relation, gc: GcFunction, values: Set[int]):
    if not is_gap2_free(values):
        raise CoverError(f"{sorted(values)} has a gap of two.")
    failures = gc.check_axioms(relation.arity)
    if failures:
        raise CoverError(f"{gc.name} is not a gc-function: {failures[0]}")


def is_compact_like(relation: Relation, gc: GcFunction,
                    values: Iterable[int]) -> bool:
    """True iff M holds exactly the tuples whose gc value lies in S.

    Raises:
        CoverError: if S has a gap of two or the function fails its axioms
    """
    values = set(values)
    _require_compact(relation, gc, values)
    return all((bits in relation) == (gc(bits) in values)
               for bits in product((0, 1), repeat=relation.arity))


def cover_compact(relation: Relation, gc: GcFunction, values: Iterable[int],
                  alpha: Bits) -> Relation:
    """Cover of a compact relation at α.

    The same-parity tuples of M are kept, and every single flip of an
    opposite-parity tuple whose gc value lies strictly between the extreme
    values of M is added.

    Raises:
        CoverError: if (F, S) does not describe M, or α is not in M
    """
    values = set(values)
    alpha = tuple(alpha)
    _require_member(relation, alpha)
    if not is_compact_like(relation, gc, values):
        raise CoverError(f"{relation} is not described by "
                         f"{gc.name} and {sorted(values)}.")

    seen = [gc(b) for b in relation]
    low, high = min(seen), max(seen)
    parity = ones(alpha) % 2
    members = {b for b in relation if ones(b) % 2 == parity}
    for beta in relation:
        if ones(beta) % 2 == parity:
            continue
        for gamma in _single_flips(beta):
            if low < gc(gamma) < high:
                members.add(gamma)
    return Relation(relation.scope, tuple(members))


# Interference-free

def cover_interference_free(relation: Relation, alpha: Bits) -> Relation:
    """Even(M) or Odd(M), whichever holds α.

    Raises:
        CoverError: if M is not a Δ-matroid, has an interference minor, or
            does not contain α
    """
    _require_member(relation, alpha)
    if not is_delta_matroid(relation):
        raise CoverError(f"{relation} is not a Δ-matroid.")
    if contains_interference_minor(relation):
        raise CoverError(f"{relation} has an interference minor.")
    return odd_part(relation) if ones(alpha) % 2 else even_part(relation)


# Even-zebras

def _zebra_allowed(relation: Relation, gamma: Bits) -> bool:
    for u, v in _pairs(relation.arity):
        if flip_bits(gamma, {u, v}) in relation and \
                (flip_bits(gamma, {u}) not in relation or
                 flip_bits(gamma, {v}) not in relation):
            return False
    return True


def even_zebra_cover_search(relation: Relation, alpha: Bits,
                            max_arity: int = None) -> Optional[Relation]:
    """Search an even Δ-matroid containing the tuples of M with the parity
    of α whose extra tuples all meet the zebra condition.

    Failed exchanges are repaired by adding one allowed tuple at a time;
    every repair is branched on, so None certifies that no such cover
    exists.

    Raises:
        CoverError: if the arity exceeds ``zebra.max_arity`` or α is not in M
    """
    max_arity = setting('zebra.max_arity', max_arity)
    if relation.arity > max_arity:
        raise CoverError(f"Arity {relation.arity} exceeds the zebra search "
                         f"bound {max_arity}.")
    alpha = tuple(alpha)
    _require_member(relation, alpha)

    parity = ones(alpha) % 2
    base = frozenset(b for b in relation if ones(b) % 2 == parity)
    allowed = {b for b in parity_class(relation.scope, parity)
               if b not in relation and _zebra_allowed(relation, b)}
    visited: Set[frozenset] = set()
    stack = [base]
    while stack:
        members = stack.pop()
        if members in visited:
            continue
        visited.add(members)
        options = exchange_repairs(members, relation.arity)
        if options is None:
            logger.debug(f"Zebra cover after {len(visited)} states")
            return Relation(relation.scope, tuple(members))
        stack.extend(members | {o} for o in reversed(options)
                     if o in allowed)
    logger.debug(f"No zebra cover, {len(visited)} states exhausted")
    return None


def is_even_zebra(relation: Relation, max_arity: int = None) -> bool:
    """Every parity class of M admits a zebra cover."""
    representatives = {}
    for bits in relation:
        representatives.setdefault(ones(bits) % 2, bits)
    return all(even_zebra_cover_search(relation, bits, max_arity) is not None
               for bits in representatives.values())


# Closure

def cover_product(left_cover: Relation, right_cover: Relation) -> Relation:
    """Cover of M × N at (α, β) from covers of M at α and N at β."""
    return direct_product(left_cover, right_cover)


def cover_identified(relation: Relation, w1: str, w2: str, alpha: Bits,
                     cover) -> Relation:
    """Cover of ``M_{w1=w2}`` at α, from a cover of M at a witness β.

    ``cover`` is a :class:`CoverOracle` or a ``(M, β) -> M_β`` callable.

    Raises:
        CoverError: if no tuple of M agrees on w1, w2 and restricts to α
    """
    alpha = tuple(alpha)
    i, j = relation.position(w1), relation.position(w2)
    keep = [p for p in range(relation.arity) if p not in (i, j)]
    witness = next((b for b in relation if b[i] == b[j] and
                    tuple(b[p] for p in keep) == alpha), None)
    if witness is None:
        raise CoverError(f"{format_bits(alpha)} is not a tuple of the "
                         f"identified relation.")
    evaluate = cover.cover if isinstance(cover, CoverOracle) else cover
    return identify(evaluate(relation, witness), w1, w2)


# Oracles

COVER_TAGS = ('even', 'coindependent', 'compact', 'interference_free',
              'custom')
_TAG_ALIASES = {'co_independent': 'coindependent',
                'interferencefree': 'interference_free'}


def normalize_tag(tag: str) -> str:
    """``"interferenceFree"``, ``"interference-free"`` and
    ``"interference_free"`` all name the same class."""
    text = underscore(str(tag).strip()).replace('-', '_').replace(' ', '_')
    return _TAG_ALIASES.get(text, text)


@dataclass(frozen=True)
class CoverOracle:
    """A cover class tag with its parameters, evaluable on ``(M, α)``.

    ``compact`` takes ``{"gc": name, "S": [...]}``; ``custom`` takes either
    a Python callable or ``{"covers": {"<α>": ["<tuple>", ...]}}``.
    """

    tag: str
    params: Mapping = field(default_factory=dict)
    function: Optional[CoverFunction] = field(default=None, compare=False)

    def __post_init__(self):
        tag = normalize_tag(self.tag)
        if tag not in COVER_TAGS:
            raise CoverError(f"Unknown cover class {self.tag!r}.")
        object.__setattr__(self, 'tag', tag)
        object.__setattr__(self, 'params', dict(self.params or {}))

    @classmethod
    def from_config(cls, config: dict):
        """Build an oracle from ``{"class": ..., "params": {...}}``."""
        if isinstance(config, str):
            return cls(config)
        try:
            return cls(config['class'], config.get('params') or {})
        except (KeyError, TypeError) as err:
            raise CoverError(f"Malformed oracle configuration {config!r}.") \
                from err

    def to_dict(self) -> dict:
        """Inverse of :meth:`from_config`."""
        return {'class': self.tag, 'params': dict(self.params)}

    def gc(self) -> GcFunction:
        """The gc-function of a compact oracle."""
        name = normalize_tag(self.params.get('gc', 'ones'))
        try:
            return GC_FUNCTIONS[name]
        except KeyError as err:
            raise CoverError(f"Unknown gc-function {name!r}.") from err

    def cover(self, relation: Relation, alpha: Bits) -> Relation:
        """The cover of ``relation`` at ``alpha``."""
        alpha = tuple(alpha)
        if self.tag == 'even':
            _require_member(relation, alpha)
            if not is_even_delta_matroid(relation):
                raise CoverError(f"{relation} is not an even Δ-matroid.")
            return relation
        if self.tag == 'coindependent':
            return cover_coindependent(relation, alpha)
        if self.tag == 'compact':
            if 'S' not in self.params:
                raise CoverError("A compact oracle needs the value set S.")
            return cover_compact(relation, self.gc(), self.params['S'],
                                 alpha)
        if self.tag == 'interference_free':
            return cover_interference_free(relation, alpha)

        _require_member(relation, alpha)
        if self.function is not None:
            return self.function(relation, alpha)
        try:
            tuples = self.params['covers'][format_bits(alpha)]
        except KeyError as err:
            raise CoverError(f"No custom cover listed for "
                             f"{format_bits(alpha)}.") from err
        return Relation.from_strings(relation.scope, tuples)


def oracle_map_for(instance: Instance) -> Dict[str, CoverOracle]:
    """Oracles from the instance configuration; unconfigured even
    Δ-matroid constraints are their own cover.

    Raises:
        SolverRefusal: if a constraint has neither
    """
    oracles, missing = {}, []
    for con in instance.constraints:
        if con.oracle is not None:
            oracles[con.cid] = CoverOracle.from_config(con.oracle)
        elif is_even_delta_matroid(con.relation):
            oracles[con.cid] = CoverOracle('even')
        else:
            missing.append(con.cid)
    if missing:
        raise SolverRefusal(f"Constraints {missing} have no cover oracle.")
    return oracles


def _cover_of(instance: Instance, cid: str, bits: Bits,
              oracle_map: Mapping[str, CoverOracle], strict: bool,
              cache: Optional[dict]) -> Relation:
    relation = instance.relation(cid)
    key = (cid, relation, bits)
    if cache is not None and key in cache:
        return cache[key]
    if cid not in oracle_map:
        raise SolverRefusal(f"Constraint {cid} has no cover oracle.")
    try:
        cover = oracle_map[cid].cover(relation, bits).reorder(relation.scope)
    except CoverError as err:
        raise SolverRefusal(f"Constraint {cid}: {err}") from err
    if strict:
        violations = verify_cover(relation, bits, cover)
        if violations:
            raise SolverRefusal(
                f"Cover of {cid} at {format_bits(bits)} fails item "
                f"{violations[0].item}: {violations[0].detail}")
    if cache is not None:
        cache[key] = cover
    return cover


def build_restricted_instance(instance: Instance, labeling: EdgeLabeling,
                              cid: str, relation: Relation,
                              oracle_map: Mapping[str, CoverOracle],
                              strict: bool = None,
                              cache: Optional[dict] = None) -> Instance:
    """``I(f, C, C′)``: C takes the sub-relation C′, every other constraint
    D its cover at ``f(D)``.

    Args:
        instance: the instance I
        labeling: a valid labeling f of I
        cid: the constraint C
        relation: C′, a sub-relation of C
        oracle_map: cover oracle per constraint id
        strict: verify each cover; defaults to ``coverable.strict``
        cache: optional dict memoizing covers across calls

    Raises:
        InstanceError: if f is not valid or C′ is not inside C
        SolverRefusal: if a cover is missing, refused or fails verification
    """
    strict = setting('coverable.strict', strict)
    if not is_valid(instance, labeling):
        raise InstanceError("Restriction needs a valid labeling.")
    original = instance.relation(cid)
    relation = relation.reorder(original.scope)
    if any(bits not in original for bits in relation):
        raise InstanceError(f"The replacement of {cid} is not a "
                            f"sub-relation.")

    replacements = {cid: relation}
    for con in instance.constraints:
        if con.cid != cid:
            replacements[con.cid] = _cover_of(
                instance, con.cid, labeling.tuple_at(instance, con.cid),
                oracle_map, strict, cache)
    return instance.with_relations(replacements)


# Walks

def find_general_augmenting_walk(instance: Instance, labeling: EdgeLabeling,
                                 better: EdgeLabeling) -> Walk:
    """An augmenting walk for ``labeling``, possibly ending in a
    constraint, on an instance of arbitrary Δ-matroids.

    Raises:
        InstanceError: if a labeling is not valid
        NotImprovingError: if ``better`` has no fewer inconsistencies
    """
    if not is_valid(instance, labeling) or not is_valid(instance, better):
        raise InstanceError("Both labelings must be valid.")
    if inconsistency_count(instance, better) >= \
            inconsistency_count(instance, labeling):
        raise NotImprovingError("The second labeling is not strictly better.")
    g = better

    def unique_difference(target: EdgeLabeling, var: str) -> str:
        cids = [c for c in instance.occurrences[var]
                if target[(var, c)] != g[(var, c)]]
        if len(cids) != 1:
            raise InvariantBreach(f"{var} does not differ on one half-edge.")
        return cids[0]

    def partner(target: EdgeLabeling, var: str, cid: str,
                diff: Set[HalfEdge]) -> str:
        for other in instance.scope(cid):
            if other != var and (other, cid) in diff and \
                    can_flip(instance, target, cid, var, other):
                return other
        raise InvariantBreach(f"No exchange for {var} at {cid}.")

    while True:
        var = next((v for v in instance.variables
                    if is_consistent(instance, labeling, v)
                    and not is_consistent(instance, g, v)), None)
        if var is None:
            break
        cid = unique_difference(labeling, var)
        if can_flip(instance, g, cid, var):
            g = g.flip([(var, cid)])
        else:
            other = partner(g, var, cid, set(labeling.difference(g)))
            g = g.flip([(var, cid), (other, cid)])

    start = next((v for v in instance.variables
                  if not is_consistent(instance, labeling, v)
                  and is_consistent(instance, g, v)), None)
    if start is None:
        raise InvariantBreach("No start for an augmenting walk.")

    current = labeling
    walk = Walk(start)
    while True:
        var = walk.end
        cid = unique_difference(current, var)
        if can_flip(instance, current, cid, var):
            return walk.close(cid)
        other = partner(current, var, cid, set(current.difference(g)))
        walk = walk.extend(cid, other)
        current = current.flip([(var, cid), (other, cid)])
        if not is_consistent(instance, labeling, other):
            return walk


def lift_general(instance: Instance, labeling: EdgeLabeling, cid: str,
                 alpha: Bits, better: EdgeLabeling,
                 oracle_map: Mapping[str, CoverOracle] = None,
                 strict: bool = None, cache: Optional[dict] = None) -> Walk:
    """Turn an improvement found on ``I(f, C, {α})`` into an augmenting
    walk of I.

    The walk is computed on ``I(f, C, C)`` and scanned from its start; the
    first prefix that can be closed by a single flip in I is returned,
    otherwise the whole walk is already a walk of I.

    Raises:
        NotImprovingError: if ``better`` has no fewer inconsistencies
        InvariantBreach: if the scan leaves the relations of I
    """
    oracle_map = oracle_map if oracle_map is not None \
        else oracle_map_for(instance)
    alpha = tuple(alpha)
    if better.tuple_at(instance, cid) != alpha:
        raise InstanceError(f"The improvement does not use "
                            f"{format_bits(alpha)} at {cid}.")
    restricted = build_restricted_instance(
        instance, labeling, cid, instance.relation(cid), oracle_map, strict,
        cache)
    walk = find_general_augmenting_walk(restricted, labeling, better)

    current = labeling
    prefix = Walk(walk.start)
    lifted = None
    for step, var in walk.steps:
        if can_flip(instance, current, step, prefix.end):
            lifted = prefix.close(step)
            break
        current = current.flip([(prefix.end, step), (var, step)])
        if current.tuple_at(instance, step) not in instance.relation(step):
            raise InvariantBreach(f"Lifted walk leaves {step}.")
        prefix = prefix.extend(step, var)
    if lifted is None:
        lifted = walk
        if walk.tail is not None and \
                not can_flip(instance, current, walk.tail, prefix.end):
            raise InvariantBreach(f"Lifted walk leaves {walk.tail}.")

    if not is_augmenting(instance, labeling, lifted):
        raise InvariantBreach(f"{lifted} is not augmenting.")
    logger.debug(f"lifted {walk} to {lifted}")
    return lifted


# Solver

def _candidate_optimum(args) -> Tuple[int, EdgeLabeling]:
    instance, check_invariants = args
    solver = BlossomSolver(check_invariants=check_invariants,
                           logger_name=__name__)
    labeling, count, _ = solver.optimize(instance)
    return count, labeling


class CoverableSolver:
    """Optimize edge labelings of instances whose constraints all have
    cover oracles."""

    def __init__(self, oracle_map: Mapping[str, CoverOracle] = None,
                 strict: bool = None, nprocs: int = 1,
                 progress: bool = False, check_invariants: bool = None,
                 logger_name: str = None, verbose: bool = False):
        """
        Args:
            oracle_map: cover oracle per constraint id, read from the
                instance when not given
            strict: verify every cover; defaults to ``coverable.strict``
            nprocs: worker processes for the candidate scan
            progress: show a progress bar over the candidates
            check_invariants: forwarded to the even solver
            logger_name: name of the logger, the calling script by default
            verbose: log run summaries at INFO
        """
        self.oracle_map = oracle_map
        self.strict = setting('coverable.strict', strict)
        self.nprocs = nprocs
        self.progress = progress
        self.check_invariants = check_invariants
        self.logger = get_logger(logger_name, verbose)
        self.cache: dict = {}
        self.stats = {'rounds': 0, 'candidates': 0, 'half_integral': 0}
        if not self.strict:
            self.logger.warning("Cover verification is disabled.")

    def _candidates(self, instance: Instance) -> List[Tuple[str, Bits]]:
        return [(con.cid, bits) for con in instance.constraints
                for bits in con.relation]

    def _scan(self, instance: Instance, labeling: EdgeLabeling,
              oracle_map: Mapping[str, CoverOracle], count: int) \
            -> Optional[Tuple[str, Bits, EdgeLabeling]]:
        """First candidate ``(C, α)`` whose restriction beats ``count``."""
        candidates = self._candidates(instance)
        jobs = ((build_restricted_instance(
            instance, labeling, cid,
            Relation(instance.scope(cid), (bits,)), oracle_map,
            self.strict, self.cache), self.check_invariants)
            for cid, bits in candidates)

        def first_improving(results):
            for (cid, bits), (best, better) in tqdm(
                    zip(candidates, results), total=len(candidates),
                    disable=not self.progress):
                self.stats['candidates'] += 1
                if best < count:
                    return cid, bits, better
            return None

        if self.nprocs > 1:
            jobs = list(jobs)
            with Pool(self.nprocs) as pool:
                return first_improving(pool.imap(_candidate_optimum, jobs))
        return first_improving(map(_candidate_optimum, jobs))

    def improve(self, instance: Instance, labeling: EdgeLabeling) \
            -> Optional[EdgeLabeling]:
        """A valid labeling with fewer inconsistencies, or None when
        ``labeling`` is optimal."""
        oracle_map = self.oracle_map if self.oracle_map is not None \
            else oracle_map_for(instance)
        count = inconsistency_count(instance, labeling)
        if count == 0:
            return None
        found = self._scan(instance, labeling, oracle_map, count)
        if found is None:
            return None
        cid, bits, better = found
        walk = lift_general(instance, labeling, cid, bits, better,
                            oracle_map, self.strict, self.cache)
        if walk.half_integral:
            self.stats['half_integral'] += 1
        self.logger.debug(f"candidate {cid}={format_bits(bits)} "
                          f"gives walk {walk}")
        improved = apply_walk(labeling, walk)
        if not is_valid(instance, improved) or \
                inconsistency_count(instance, improved) >= count:
            raise InvariantBreach(f"Walk {walk} does not improve.")
        return improved

    def optimize(self, instance: Instance,
                 labeling: Optional[EdgeLabeling] = None) \
            -> Tuple[EdgeLabeling, int]:
        """Improve until no candidate helps.

        Returns:
            (labeling, count)

        Raises:
            SolverRefusal: if a constraint lacks a usable cover
        """
        require_valid_instance(instance)
        current = labeling if labeling is not None \
            else initial_labeling(instance)
        while True:
            improved = self.improve(instance, current)
            if improved is None:
                break
            self.stats['rounds'] += 1
            current = improved
        count = inconsistency_count(instance, current)
        self.logger.info(f"Optimum {count} after {self.stats['rounds']} "
                         f"rounds and {self.stats['candidates']} candidates")
        return current, count


def solve_coverable(instance: Instance,
                    oracle_map: Mapping[str, CoverOracle] = None,
                    strict: bool = None, nprocs: int = 1,
                    progress: bool = False) -> Tuple[EdgeLabeling, int]:
    """Optimal labeling and its count for an efficiently coverable
    instance."""
    return CoverableSolver(oracle_map, strict, nprocs,
                           progress).optimize(instance)
