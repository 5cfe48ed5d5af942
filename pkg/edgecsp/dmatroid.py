# -*- coding: utf-8 -*-
# pylint: disable=logging-fstring-interpolation
"""
Boolean relations given as explicit tuple lists, and the Δ-matroid algebra
built on them: membership checks, products, minors, flips, the d-transform
and the planar tractability report.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, \
    Tuple, Union

import pandas as pd

from .errors import RelationError
from .utils import FIXTURES

logger = logging.getLogger(__name__)

Bits = Tuple[int, ...]
FlipSet = Iterable[Union[int, str]]

INTERFERENCE_TUPLES = ('000', '110', '101', '011', '111')


def parse_bits(text: str, arity: int) -> Bits:
    """Turn a bit string such as ``"0110"`` into a tuple of ints."""
    if len(text) != arity or any(c not in '01' for c in text):
        raise RelationError(
            f"Tuple {text!r} is not a bit string of length {arity}.")
    return tuple(int(c) for c in text)


def format_bits(bits: Sequence[int]) -> str:
    """Turn a tuple of ints back into its bit string."""
    return ''.join(str(b) for b in bits)


def flip_bits(bits: Bits, positions: Iterable[int]) -> Bits:
    """XOR the given positions of a tuple."""
    out = list(bits)
    for pos in positions:
        out[pos] ^= 1
    return tuple(out)


def ones(bits: Sequence[int]) -> int:
    """Number of ones in a tuple."""
    return sum(bits)


@dataclass(frozen=True)
class Relation:
    """A Boolean relation over an ordered scope of distinct variables.

    Tuples are kept sorted in canonical order (the integer value of the bit
    vector, first scope position most significant) without duplicates.
    """

    scope: Tuple[str, ...]
    tuples: Tuple[Bits, ...] = ()
    _members: FrozenSet[Bits] = field(
        default=frozenset(), init=False, repr=False, compare=False)

    def __post_init__(self):
        scope = tuple(str(v) for v in self.scope)
        if len(set(scope)) != len(scope):
            raise RelationError(f"Scope {scope} repeats a variable.")

        canon = set()
        for bits in self.tuples:
            bits = tuple(int(b) for b in bits)
            if len(bits) != len(scope):
                raise RelationError(
                    f"Tuple {format_bits(bits)} does not match arity "
                    f"{len(scope)}.")
            if any(b not in (0, 1) for b in bits):
                raise RelationError(f"Tuple {bits} is not Boolean.")
            canon.add(bits)

        object.__setattr__(self, 'scope', scope)
        object.__setattr__(self, 'tuples', tuple(sorted(canon)))
        object.__setattr__(self, '_members', frozenset(canon))

    @classmethod
    def from_strings(cls, scope: Sequence[str], tuples: Iterable[str]):
        """Build a relation from bit strings ordered by scope."""
        scope = tuple(scope)
        return cls(scope, tuple(parse_bits(t, len(scope)) for t in tuples))

    @classmethod
    def from_dict(cls, data: dict):
        """Build a relation from ``{"scope": [...], "tuples": [...]}``."""
        try:
            return cls.from_strings(data['scope'], data['tuples'])
        except (KeyError, TypeError) as err:
            raise RelationError(f"Malformed relation document: {err}") \
                from err

    def to_dict(self) -> dict:
        """Inverse of :meth:`from_dict`."""
        return {
            'scope': list(self.scope),
            'tuples': [format_bits(t) for t in self.tuples],
        }

    @property
    def arity(self) -> int:
        """Number of scope entries."""
        return len(self.scope)

    def __len__(self) -> int:
        return len(self.tuples)

    def __iter__(self):
        return iter(self.tuples)

    def __contains__(self, bits) -> bool:
        return tuple(bits) in self._members

    def is_empty(self) -> bool:
        """True for the relation without tuples."""
        return not self.tuples

    def position(self, var: str) -> int:
        """Scope position of a variable."""
        try:
            return self.scope.index(var)
        except ValueError as err:
            raise RelationError(
                f"Variable {var!r} is not in scope {self.scope}.") from err

    def positions(self, flips: FlipSet) -> List[int]:
        """Resolve variable names or positions into scope positions."""
        out = []
        for item in flips:
            if isinstance(item, str):
                out.append(self.position(item))
            elif 0 <= item < self.arity:
                out.append(item)
            else:
                raise RelationError(
                    f"Position {item} outside arity {self.arity}.")
        return out

    def reorder(self, scope: Sequence[str]):
        """Same relation with its scope permuted into the given order."""
        scope = tuple(scope)
        if sorted(scope) != sorted(self.scope):
            raise RelationError(
                f"{scope} is not a permutation of {self.scope}.")
        idx = [self.position(v) for v in scope]
        return Relation(scope, tuple(tuple(t[i] for i in idx)
                                     for t in self.tuples))

    def rename(self, mapping: Dict[str, str]):
        """Same tuples over renamed variables."""
        return Relation(tuple(mapping.get(v, v) for v in self.scope),
                        self.tuples)

    def value(self, bits: Bits, var: str) -> int:
        """Value of ``var`` within a tuple of this relation."""
        return bits[self.position(var)]

    def __str__(self):
        body = ','.join(format_bits(t) for t in self.tuples)
        return f"({','.join(self.scope)}){{{body}}}"


def contains(relation: Relation, bits: Sequence[int]) -> bool:
    """Membership test that insists on the right arity.

    Raises:
        RelationError: if the tuple length differs from the arity
    """
    if len(bits) != relation.arity:
        raise RelationError(
            f"Tuple of length {len(bits)} tested against arity "
            f"{relation.arity}.")
    return tuple(bits) in relation


def is_delta_matroid(relation: Relation) -> bool:
    """Decide the symmetric exchange axiom by checking every pair.

    For all f, g in M and v in f△g there must be u in f△g (u = v allowed)
    with f ⊕ {u, v} in M.

    Raises:
        RelationError: on the empty relation
    """
    if relation.is_empty():
        raise RelationError("The empty relation is not a Δ-matroid input.")

    for f in relation:
        for g in relation:
            diff = [i for i in range(relation.arity) if f[i] != g[i]]
            for v in diff:
                if not any(flip_bits(f, {u, v}) in relation for u in diff):
                    return False
    return True


def exchange_repairs(members: FrozenSet[Bits], arity: int) \
        -> Optional[List[Bits]]:
    """For tuples of one parity: the tuples that would repair the first
    failed exchange, or None when the set already is an even Δ-matroid."""
    ordered = sorted(members)
    for f in ordered:
        for g in ordered:
            diff = [i for i in range(arity) if f[i] != g[i]]
            for v in diff:
                options = [flip_bits(f, {u, v}) for u in diff if u != v]
                if not any(o in members for o in options):
                    return options
    return None


def is_even(relation: Relation) -> bool:
    """True iff all tuples share the parity of their ones-count."""
    return len({ones(t) % 2 for t in relation}) <= 1


def is_even_delta_matroid(relation: Relation) -> bool:
    """Shorthand used all over the solver."""
    return not relation.is_empty() and is_even(relation) \
        and is_delta_matroid(relation)


def direct_product(left: Relation, right: Relation) -> Relation:
    """All concatenations of a left tuple with a right tuple.

    Raises:
        RelationError: if the scopes overlap
    """
    overlap = set(left.scope) & set(right.scope)
    if overlap:
        raise RelationError(f"Scopes overlap on {sorted(overlap)}.")
    return Relation(left.scope + right.scope,
                    tuple(a + b for a in left for b in right))


def identify(relation: Relation, w1: str, w2: str) -> Relation:
    """Keep tuples agreeing on w1 and w2, then project both out.

    The result may be the empty relation, which is a legal value.
    """
    if w1 == w2:
        raise RelationError("Cannot identify a variable with itself.")
    i, j = relation.position(w1), relation.position(w2)
    keep = [p for p in range(relation.arity) if p not in (i, j)]
    return Relation(tuple(relation.scope[p] for p in keep),
                    tuple(tuple(t[p] for p in keep)
                          for t in relation if t[i] == t[j]))


def minor_fix(relation: Relation, var: str, value: int) -> Relation:
    """Fix ``var`` to ``value`` and delete it from the scope."""
    pos = relation.position(var)
    keep = [p for p in range(relation.arity) if p != pos]
    return Relation(tuple(relation.scope[p] for p in keep),
                    tuple(tuple(t[p] for p in keep)
                          for t in relation if t[pos] == value))


def flip_values(relation: Relation, flips: FlipSet) -> Relation:
    """XOR every tuple with the indicator of a set of positions."""
    positions = set(relation.positions(flips))
    return Relation(relation.scope,
                    tuple(flip_bits(t, positions) for t in relation))


def is_isomorphic_by_flips(left: Relation, right: Relation) -> bool:
    """True iff some scope permutation plus value flip maps left onto
    right."""
    if left.arity != right.arity or len(left) != len(right):
        return False
    target = set(right.tuples)
    for perm in permutations(range(left.arity)):
        for mask in product((0, 1), repeat=left.arity):
            if all(tuple(t[perm[k]] ^ mask[k] for k in range(left.arity))
                   in target for t in left):
                return True
    return False


def _interference_images() -> FrozenSet[FrozenSet[Bits]]:
    base = [parse_bits(t, 3) for t in INTERFERENCE_TUPLES]
    images = set()
    for perm in permutations(range(3)):
        for mask in product((0, 1), repeat=3):
            images.add(frozenset(
                tuple(t[perm[k]] ^ mask[k] for k in range(3)) for t in base))
    return frozenset(images)


INTERFERENCE_IMAGES = _interference_images()


def contains_interference_minor(relation: Relation) -> bool:
    """Search all arity-3 minors for a copy of the interference matroid.

    Every choice of three survivors and every assignment of the fixed
    variables is tried; a minor matches if some renaming and value flip
    turns it into the interference matroid.
    """
    if relation.arity < 3:
        return False

    for survivors in combinations(range(relation.arity), 3):
        fixed = [p for p in range(relation.arity) if p not in survivors]
        minors: Dict[Bits, set] = {}
        for t in relation:
            key = tuple(t[p] for p in fixed)
            minors.setdefault(key, set()).add(tuple(t[p] for p in survivors))
        for minor in minors.values():
            if len(minor) == len(INTERFERENCE_TUPLES) and \
                    frozenset(minor) in INTERFERENCE_IMAGES:
                logger.debug(
                    f"Interference minor on "
                    f"{[relation.scope[p] for p in survivors]}")
                return True
    return False


def d_transform(relation: Relation) -> Relation:
    """Neighbouring-coordinate XOR image ``dT = (x1⊕x2, ..., xn⊕x1)``."""
    if relation.arity < 2:
        raise RelationError("The d-transform needs arity at least 2.")
    n = relation.arity
    return Relation(relation.scope,
                    tuple(tuple(t[i] ^ t[(i + 1) % n] for i in range(n))
                          for t in relation))


def complement(bits: Bits) -> Bits:
    """Flip every entry of a tuple."""
    return tuple(1 - b for b in bits)


def is_self_complementary(relation: Relation) -> bool:
    """True iff the relation is closed under flipping all entries."""
    return all(complement(t) in relation for t in relation)


def parity_class(scope: Sequence[str], parity: int) -> Relation:
    """All tuples over ``scope`` whose ones-count has the given parity."""
    scope = tuple(scope)
    return Relation(scope, tuple(t for t in product((0, 1), repeat=len(scope))
                                 if ones(t) % 2 == parity % 2))


def even_part(relation: Relation) -> Relation:
    """Even(M): the tuples of M with an even number of ones."""
    return Relation(relation.scope,
                    tuple(t for t in relation if ones(t) % 2 == 0))


def odd_part(relation: Relation) -> Relation:
    """Odd(M): the tuples of M with an odd number of ones."""
    return Relation(relation.scope,
                    tuple(t for t in relation if ones(t) % 2 == 1))


def even_relation(arity: int, scope: Optional[Sequence[str]] = None) \
        -> Relation:
    """EVEN_i = {x : x1 ⊕ ... ⊕ xi = 0}."""
    if arity < 1:
        raise RelationError("EVEN relations start at arity 1.")
    scope = tuple(scope) if scope else tuple(f"x{i}"
                                             for i in range(1, arity + 1))
    return parity_class(scope, 0)


def interference_matroid(scope: Sequence[str] = ('v1', 'v2', 'v3')) \
        -> Relation:
    """The ternary interference Δ-matroid."""
    return Relation.from_strings(scope, INTERFERENCE_TUPLES)


EVEN_RELATIONS = {f"EVEN_{i}": even_relation(i) for i in (1, 2, 3)}


def fixture_relation(name: str) -> Relation:
    """One of the relations shipped with the package: ``interference``,
    ``x``, ``y`` or ``counterexample``."""
    try:
        return Relation.from_dict(FIXTURES['relations'][name])
    except KeyError as err:
        raise RelationError(f"No fixture relation {name!r}.") from err


@dataclass
class PlanarEntry:
    """Per-relation flags of the planar tractability report."""

    index: int
    arity: int
    self_complementary: bool
    d_even_delta_matroid: Optional[bool]
    arity_one: bool

    @property
    def passes(self) -> Optional[bool]:
        """None when the relation is a flagged unary one."""
        if not self.self_complementary:
            return False
        if self.arity_one:
            return None
        return bool(self.d_even_delta_matroid)


@dataclass
class PlanarReport:
    """Outcome of the planar dichotomy condition on a language."""

    entries: List[PlanarEntry]
    holds: bool
    even_relations: Dict[str, Relation] = field(
        default_factory=lambda: dict(EVEN_RELATIONS))

    def to_dict(self) -> dict:
        """JSON-ready form."""
        return {
            'condition_holds': self.holds,
            'relations': [{
                'index': e.index,
                'arity': e.arity,
                'self_complementary': e.self_complementary,
                'd_even_delta_matroid': e.d_even_delta_matroid,
                'arity_one': e.arity_one,
            } for e in self.entries],
            'even_relations': {name: rel.to_dict()
                               for name, rel in self.even_relations.items()},
        }

    def to_frame(self) -> pd.DataFrame:
        """The per-relation flags as a dataframe, one row per relation."""
        return pd.DataFrame([{
            'index': e.index,
            'arity': e.arity,
            'self_complementary': e.self_complementary,
            'd_even_delta_matroid': e.d_even_delta_matroid,
            'arity_one': e.arity_one,
            'passes': e.passes,
        } for e in self.entries]).set_index('index')


def planar_tractability_report(gamma: Sequence[Relation]) -> PlanarReport:
    """Check the planar dichotomy condition on a constraint language.

    The condition holds iff every relation is self-complementary and its
    d-transform is an even Δ-matroid. Unary relations have no d-transform;
    they are flagged, and a self-complementary unary relation (which can
    only be ``{0, 1}``) does not affect the verdict.

    Args:
        gamma: the relations of the language

    Returns:
        PlanarReport: per-relation flags plus the aggregate verdict
    """
    if not gamma:
        raise RelationError("The planar report needs at least one relation.")

    entries = []
    for index, relation in enumerate(gamma):
        if relation.arity < 1:
            raise RelationError("Relations of arity 0 have no planar form.")
        self_comp = is_self_complementary(relation)
        d_even = None
        if relation.arity == 1:
            logger.warning(
                f"Relation {index} is unary; the d-transform is undefined.")
        elif not relation.is_empty():
            d_even = is_even_delta_matroid(d_transform(relation))
        entries.append(PlanarEntry(index, relation.arity, self_comp, d_even,
                                   relation.arity == 1))

    holds = all(e.passes is not False for e in entries)
    logger.info(f"Planar condition {'holds' if holds else 'fails'} on "
                f"{len(entries)} relations")
    return PlanarReport(entries, holds)
