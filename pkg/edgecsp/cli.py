# -*- coding: utf-8 -*-
# pylint: disable=logging-fstring-interpolation
"""Console script for edgecsp."""

import functools
import json
import logging
import sys
from random import Random

import click
import pandas as pd

from .blossom import BlossomSolver
from .coverable import GC_FUNCTIONS, CoverOracle, CoverableSolver, \
    even_zebra_cover_search, is_coindependent, is_compact_like, \
    normalize_tag, verify_cover
from .dmatroid import Relation, contains_interference_minor, d_transform, \
    direct_product, fixture_relation, interference_matroid, \
    is_delta_matroid, is_even, is_even_delta_matroid, is_self_complementary, \
    parse_bits, planar_tractability_report
from .errors import CoverError, InstanceError, InvariantBreach, \
    NotImprovingError, OracleBoundError, ParseError, RelationError, \
    SolverRefusal
from .generators import random_even_instance
from .instance import Instance, brute_force_optimum, load_instance
from .matching import SimpleGraph, admissible_pairs, \
    check_pair_decomposition, counterexample_arity6, fixture_graph, \
    graph_to_instance, petersen_graph, realize
from .utils import FIXTURES, get_logger, setting

EXIT_REFUSAL = 1
EXIT_PARSE = 2
EXIT_INVARIANT = 3

logger = logging.getLogger(__name__)


def guarded(func):
    """Map package errors onto exit codes."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ParseError, RelationError, InstanceError) as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(EXIT_PARSE)
        except (SolverRefusal, OracleBoundError, CoverError,
                NotImprovingError) as err:
            click.echo(f"refused: {err}", err=True)
            sys.exit(EXIT_REFUSAL)
        except InvariantBreach as err:
            click.echo(f"internal error: {err}", err=True)
            sys.exit(EXIT_INVARIANT)
    return wrapper


def emit(document: dict):
    """Machine output: one sorted JSON document on standard out."""
    document = dict(document, schema_version=setting('schema_version'))
    click.echo(json.dumps(document, sort_keys=True, indent=2))


def load_json(path: str):
    """Read a JSON file, turning decode errors into ParseError."""
    with open(path) as ifile:
        try:
            return json.load(ifile)
        except json.JSONDecodeError as err:
            raise ParseError(f"{path}: {err}") from err


def load_relation(path: str) -> Relation:
    """Relation from a ``{"scope": ..., "tuples": ...}`` document."""
    try:
        return Relation.from_dict(load_json(path))
    except RelationError as err:
        raise ParseError(f"{path}: {err}") from err


def oracle_check(instance: Instance, count: int, bound: int = None,
                 nprocs: int = 1) -> dict:
    """Cross-check a solver count against the exhaustive optimum."""
    try:
        optimum, _ = brute_force_optimum(instance, bound, nprocs)
    except OracleBoundError as err:
        click.echo(f"oracle skipped: {err}", err=True)
        return {'oracle_agree': None, 'oracle_count': None}
    return {'oracle_agree': optimum == count, 'oracle_count': optimum}


@click.group()
@click.option('--verbose/--quiet', default=False,
              help="Log run summaries at INFO.")
@click.pass_context
def main(ctx, verbose):
    """Edge CSP solver for Δ-matroid constraints."""
    ctx.ensure_object(dict)
    ctx.obj['verbose'] = verbose
    get_logger('edgecsp', verbose)


@main.command()
@click.argument('instance_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--verify-oracle', is_flag=True,
              help="Compare the optimum with the exhaustive oracle.")
@click.option('--check-invariants', is_flag=True,
              help="Validate every forest, contraction and lift.")
@click.option('--trace', 'trace_file', type=click.Path(dir_okay=False),
              help="Write solver events as JSON lines.")
@click.option('--nprocs', default=1, show_default=True,
              help="Worker processes for the oracle.")
@click.pass_context
@guarded
def solve(ctx, instance_file, verify_oracle, check_invariants, trace_file,
          nprocs):
    """Optimal labeling of an instance of even Δ-matroids."""
    instance = load_instance(instance_file)
    solver = BlossomSolver(check_invariants=check_invariants or None,
                           logger_name='edgecsp',
                           verbose=ctx.obj['verbose'])
    labeling, count, trace = solver.optimize(instance)
    if trace_file:
        with open(trace_file, 'w') as ofile:
            ofile.write(trace.to_jsonl())

    document = {'count': count, 'labeling': labeling.to_dict(),
                'stats': trace.stats()}
    if verify_oracle:
        document.update(oracle_check(instance, count, nprocs=nprocs))
    emit(document)
    click.echo(f"optimum {count}", err=True)
    if document.get('oracle_agree') is False:
        sys.exit(EXIT_INVARIANT)


@main.command('solve-coverable')
@click.argument('instance_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--verify-oracle', is_flag=True,
              help="Compare the optimum with the exhaustive oracle.")
@click.option('--strict/--no-strict', default=None,
              help="Verify every cover before using it.")
@click.option('--nprocs', default=1, show_default=True,
              help="Worker processes for the candidate scan.")
@click.pass_context
@guarded
def solve_coverable(ctx, instance_file, verify_oracle, strict, nprocs):
    """Optimal labeling of an instance whose constraints have covers."""
    instance = load_instance(instance_file)
    solver = CoverableSolver(strict=strict, nprocs=nprocs,
                             logger_name='edgecsp',
                             verbose=ctx.obj['verbose'])
    labeling, count = solver.optimize(instance)
    document = {'count': count, 'labeling': labeling.to_dict(),
                'stats': dict(solver.stats)}
    if verify_oracle:
        document.update(oracle_check(instance, count, nprocs=nprocs))
    emit(document)
    click.echo(f"optimum {count}", err=True)
    if document.get('oracle_agree') is False:
        sys.exit(EXIT_INVARIANT)


def _values(text):
    if text is None:
        return None
    try:
        return [int(x) for x in text.split(',') if x.strip()]
    except ValueError as err:
        raise ParseError(f"Bad value list {text!r}.") from err


@main.command('check-relation')
@click.argument('relation_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--gc', default='ones', show_default=True,
              help="gc-function of the compact witness.")
@click.option('--values', default=None,
              help="Comma separated value set S of the compact witness.")
@guarded
def check_relation(relation_file, gc, values):
    """Class membership flags of a relation."""
    relation = load_relation(relation_file)
    if relation.is_empty():
        raise ParseError("The relation has no tuples.")
    delta = is_delta_matroid(relation)
    compact = None
    if values is not None:
        function = GC_FUNCTIONS.get(normalize_tag(gc))
        if function is None:
            raise ParseError(f"Unknown gc-function {gc!r}.")
        compact = is_compact_like(relation, function, _values(values))
    d_even = is_even_delta_matroid(d_transform(relation)) \
        if relation.arity >= 2 else None
    emit({
        'delta_matroid': delta,
        'even': is_even(relation),
        'coindependent': is_coindependent(relation),
        'compact_witness_ok': compact,
        'interference_free': delta and
        not contains_interference_minor(relation),
        'self_complementary': is_self_complementary(relation),
        'd_transform_even': d_even,
    })


@main.command('check-cover')
@click.argument('relation_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--alpha', required=True, help="Base tuple as a bit string.")
@click.option('--cover', 'cover_tuples', default=None,
              help="Comma separated cover tuples to verify.")
@click.option('--oracle', 'tag', default=None,
              help="Cover class used to build the cover instead.")
@click.option('--values', default=None,
              help="Value set S for a compact oracle.")
@guarded
def check_cover(relation_file, alpha, cover_tuples, tag, values):
    """Verify a cover of a relation at a tuple."""
    relation = load_relation(relation_file)
    bits = parse_bits(alpha, relation.arity)
    if cover_tuples is not None:
        cover = Relation.from_strings(
            relation.scope, [t for t in cover_tuples.split(',') if t])
    elif tag is not None:
        params = {'S': _values(values)} if values is not None else {}
        cover = CoverOracle(tag, params).cover(relation, bits)
    else:
        cover = even_zebra_cover_search(relation, bits)
        if cover is None:
            emit({'ok': False, 'cover': None,
                  'violations': [{'item': 0,
                                  'detail': 'no zebra cover exists'}]})
            return
    violations = verify_cover(relation, bits, cover)
    emit({'ok': not violations, 'cover': cover.to_dict(),
          'violations': [v._asdict() for v in violations]})


@main.command()
@click.argument('instance_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--bound', type=int, default=None,
              help="Maximal number of labelings to enumerate.")
@click.option('--nprocs', default=1, show_default=True,
              help="Worker processes.")
@click.option('--progress', is_flag=True, help="Show a progress bar.")
@guarded
def oracle(instance_file, bound, nprocs, progress):
    """Exhaustive optimum of an instance."""
    instance = load_instance(instance_file)
    count, labeling = brute_force_optimum(instance, bound, nprocs, progress)
    emit({'count': count, 'labeling': labeling.to_dict()})


@main.command('realize')
@click.argument('graph_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--nprocs', default=1, show_default=True,
              help="Worker processes over the deletion patterns.")
@click.option('--progress', is_flag=True, help="Show a progress bar.")
@guarded
def realize_command(graph_file, nprocs, progress):
    """Relation realized by a graph and its pins."""
    graph = SimpleGraph.from_dict(load_json(graph_file))
    relation = realize(graph, nprocs=nprocs, progress=progress)
    emit(relation.to_dict())


@main.command('planar-report')
@click.argument('relation_files', nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@guarded
def planar_report(relation_files):
    """Planar dichotomy condition on a set of relations."""
    gamma = []
    for path in relation_files:
        data = load_json(path)
        docs = data['relations'] if isinstance(data, dict) and \
            'relations' in data else [data]
        try:
            gamma.extend(Relation.from_dict(d) for d in docs)
        except RelationError as err:
            raise ParseError(f"{path}: {err}") from err
    report = planar_tractability_report(gamma)
    click.echo(report.to_frame().to_string(), err=True)
    emit(report.to_dict())


def _same_tuples(left: Relation, right: Relation) -> bool:
    return set(left.tuples) == set(right.tuples)


def fixture_checks(random_count: int = 0, seed: int = 0):
    """Named checks of the shipped fixtures, plus oracle comparisons on
    ``random_count`` random instances; yields ``(name, passed)``."""
    interference = fixture_relation('interference')
    yield 'interference_delta_matroid', \
        is_delta_matroid(interference) and not is_even(interference)

    for name in ('x', 'y'):
        relation = fixture_relation(name)
        yield f"{name}_even_delta_matroid", is_even_delta_matroid(relation)
        yield f"{name}_realized", \
            _same_tuples(realize(fixture_graph(name)), relation)

    counter = counterexample_arity6()
    low, high = (0,) * 6, (1,) * 6
    yield 'counterexample_even_delta_matroid', \
        is_even_delta_matroid(counter) and len(counter) == 19
    yield 'counterexample_no_pairing', \
        check_pair_decomposition(counter, low, high) is None
    yield 'counterexample_admissible_pairs', \
        admissible_pairs(counter, low, high) == \
        [tuple(p) for p in FIXTURES['admissible_pairs']]

    for alpha, tuples in sorted(FIXTURES['interference_covers'].items()):
        bits = parse_bits(alpha, 3)
        cover = Relation.from_strings(interference.scope, tuples)
        yield f"interference_cover_{alpha}", \
            not verify_cover(interference, bits, cover)
        found = even_zebra_cover_search(interference, bits)
        yield f"interference_zebra_{alpha}", \
            found is not None and _same_tuples(found, cover)

    square = direct_product(interference_matroid(('v1', 'v2', 'v3')),
                            interference_matroid(('w1', 'w2', 'w3')))
    yield 'square_odd_not_zebra', \
        even_zebra_cover_search(square, (0, 0, 0, 1, 1, 1)) is None

    graphs = {name: fixture_graph(name) for name in ('k3', 'k4', 'example')}
    graphs['petersen'] = petersen_graph()
    instances = {name: graph_to_instance(g) for name, g in graphs.items()}
    instances['example_merged'] = Instance.from_dict(
        FIXTURES['instances']['example_merged'])
    for name, instance in sorted(instances.items()):
        _, count, _ = BlossomSolver(logger_name='edgecsp').optimize(instance)
        yield f"optimum_{name}", count == FIXTURES['expected'][name]

    rng = Random(seed)
    for k in range(random_count):
        instance = random_even_instance(rng)
        _, count, _ = BlossomSolver(logger_name='edgecsp').optimize(instance)
        yield f"random_{seed}_{k}", \
            count == brute_force_optimum(instance)[0]


@main.command('verify-fixtures')
@click.option('--random', 'random_count', default=0, show_default=True,
              help="Number of random oracle comparisons.")
@click.option('--seed', default=0, show_default=True,
              help="Seed of the random instances.")
@guarded
def verify_fixtures(random_count, seed):
    """Run the shipped fixtures and optional random oracle comparisons."""
    results = pd.DataFrame(
        [{'fixture': name, 'passed': bool(ok)}
         for name, ok in fixture_checks(random_count, seed)])
    click.echo(results.to_string(index=False), err=True)
    failed = results.loc[~results['passed'], 'fixture'].tolist()
    emit({'passed': not failed, 'failed': failed,
          'checks': len(results)})
    if failed:
        logger.warning(f"Fixtures failed: {failed}")
        sys.exit(EXIT_INVARIANT)


if __name__ == "__main__":
    sys.exit(main())  # pragma: no cover
