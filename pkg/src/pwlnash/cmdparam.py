﻿# encoding: utf-8-sig

import argparse

KIND_CHOICES = ['isr', 'log', 'ncf']
METHOD_CHOICES = ['sgm', 'direct', 'twolevel']

# ----------------------------------------------------------------------------
def add_solver_arguments(parser: argparse.ArgumentParser):
    """
    Tolerance and limit options shared by 'solve' and 'bench'.
    """
    parser.add_argument(
        '--delta-f',
        type=float,
        default=1e-4,
        help='Target equilibrium tolerance delta_f.'
    )
    parser.add_argument(
        '--mu',
        type=float,
        default=0.5,
        help='Share of delta_f spent on the cost approximation, in (0, 1).'
    )
    parser.add_argument(
        '--delta-0',
        type=float,
        default=0.05,
        help='First-stage approximation tolerance of the two-level method.'
    )
    parser.add_argument(
        '--time-limit',
        type=float,
        default=900.0,
        help='Time limit per run in seconds.'
    )
    parser.add_argument(
        '-j',
        '--jobs',
        type=int,
        default=1,
        help='Parallel workers.'
    )
    return parser

# ----------------------------------------------------------------------------
def register_sub_generate(subparsers,
                          handle_generate: callable,
                          parent_parser: argparse.ArgumentParser):
    """
    Register the 'generate' subcommand to the argument parser.
    """
    gen_parser = subparsers.add_parser(
        'generate',
        help='Generate a random instance',
        description='Generate a random instance with parameters drawn from the benchmark grids.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        parents=[parent_parser]
    )
    gen_parser.add_argument(
        '--m',
        type=int,
        required=True,
        help='Number of players.'
    )
    gen_parser.add_argument(
        '--n',
        type=int,
        required=True,
        help='Number of markets.'
    )
    gen_parser.add_argument(
        '--kind',
        type=str,
        choices=KIND_CHOICES,
        default='log',
        help='Cybersecurity cost function.'
    )
    gen_parser.add_argument(
        '--seed',
        type=int,
        default=0,
        help='Random seed.'
    )
    gen_parser.add_argument(
        '-o',
        '--out',
        type=str,
        default='instance.json',
        help='Path of the instance JSON file to write.'
    )
    gen_parser.set_defaults(handler=handle_generate)
    return subparsers

# ----------------------------------------------------------------------------
def register_sub_solve(subparsers,
                       handle_solve: callable,
                       parent_parser: argparse.ArgumentParser):
    """
    Register the 'solve' subcommand to the argument parser.
    """
    solve_parser = subparsers.add_parser(
        'solve',
        help='Compute an approximate equilibrium of an instance',
        description='Compute an approximate equilibrium with sgm, direct or twolevel. '
                    'Without --instance, an instance is generated from --m, --n, --kind and --seed.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        parents=[parent_parser]
    )
    solve_parser.add_argument(
        '-i',
        '--instance',
        type=str,
        default=None,
        help='Instance JSON file.'
    )
    solve_parser.add_argument(
        '--m',
        type=int,
        default=2,
        help='Number of players of a generated instance.'
    )
    solve_parser.add_argument(
        '--n',
        type=int,
        default=2,
        help='Number of markets of a generated instance.'
    )
    solve_parser.add_argument(
        '--kind',
        type=str,
        choices=KIND_CHOICES,
        default='log',
        help='Cybersecurity cost function of a generated instance.'
    )
    solve_parser.add_argument(
        '--seed',
        type=int,
        default=0,
        help='Seed of a generated instance.'
    )
    solve_parser.add_argument(
        '--method',
        type=str,
        choices=METHOD_CHOICES,
        default='direct',
        help='Solution method.'
    )
    add_solver_arguments(solve_parser)
    solve_parser.add_argument(
        '-o',
        '--out',
        type=str,
        default='solution.json',
        help='Path of the solution JSON file to write.'
    )
    solve_parser.add_argument(
        '-r',
        '--results',
        type=str,
        default=None,
        help='Results CSV to which the run record is added.'
    )
    solve_parser.set_defaults(handler=handle_solve)
    return subparsers

# ----------------------------------------------------------------------------
def register_sub_certify(subparsers,
                         handle_certify: callable,
                         parent_parser: argparse.ArgumentParser):
    """
    Register the 'certify' subcommand to the argument parser.
    """
    cert_parser = subparsers.add_parser(
        'certify',
        help='Certify a stored solution in the exact game',
        description='Recompute the largest regret of a stored solution in the exact game.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        parents=[parent_parser]
    )
    cert_parser.add_argument(
        '-i',
        '--instance',
        type=str,
        required=True,
        help='Instance JSON file.'
    )
    cert_parser.add_argument(
        '--solution',
        type=str,
        default='solution.json',
        help='Solution JSON file.'
    )
    cert_parser.add_argument(
        '--delta-f',
        type=float,
        default=None,
        help='Tolerance to certify; the one stored in the solution by default.'
    )
    cert_parser.set_defaults(handler=handle_certify)
    return subparsers

# ----------------------------------------------------------------------------
def register_sub_bench(subparsers,
                       handle_bench: callable,
                       parent_parser: argparse.ArgumentParser):
    """
    Register the 'bench' subcommand to the argument parser.
    """
    bench_parser = subparsers.add_parser(
        'bench',
        help='Run a benchmark batch',
        description='Run every method on generated instances for each (m, n, kind) cell. '
                    'Runs already present in the results file are skipped.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        parents=[parent_parser]
    )
    bench_parser.add_argument(
        '--m',
        type=int,
        nargs='+',
        default=[2, 3],
        help='Player counts.'
    )
    bench_parser.add_argument(
        '--n',
        type=int,
        nargs='+',
        default=[2, 3],
        help='Market counts.'
    )
    bench_parser.add_argument(
        '--kind',
        type=str,
        nargs='+',
        choices=KIND_CHOICES,
        default=KIND_CHOICES,
        help='Cybersecurity cost functions.'
    )
    bench_parser.add_argument(
        '--instances',
        type=int,
        default=10,
        help='Instances per (m, n, kind) cell.'
    )
    bench_parser.add_argument(
        '--method',
        type=str,
        nargs='+',
        choices=METHOD_CHOICES,
        default=METHOD_CHOICES,
        help='Methods to run.'
    )
    bench_parser.add_argument(
        '--seed',
        type=int,
        default=0,
        help='Seed of the first instance of each cell.'
    )
    add_solver_arguments(bench_parser)
    bench_parser.add_argument(
        '-o',
        '--out',
        type=str,
        default='results.csv',
        help='Results CSV file.'
    )
    bench_parser.set_defaults(handler=handle_bench)
    return subparsers

# ----------------------------------------------------------------------------
def register_sub_profile(subparsers,
                         handle_profile: callable,
                         parent_parser: argparse.ArgumentParser):
    """
    Register the 'profile' subcommand to the argument parser.
    """
    profile_parser = subparsers.add_parser(
        'profile',
        help='Draw performance profiles',
        description='Compute performance profiles from a results CSV and write them as SVG (or PNG) and CSV.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        parents=[parent_parser]
    )
    profile_parser.add_argument(
        '-r',
        '--results',
        type=str,
        default='results.csv',
        help='Results CSV file.'
    )
    profile_parser.add_argument(
        '-o',
        '--out',
        type=str,
        default='profile.svg',
        help='Plot file; the CSV is written beside it.'
    )
    profile_parser.set_defaults(handler=handle_profile)
    return subparsers

# ----------------------------------------------------------------------------
def register_sub_stats(subparsers,
                       handle_stats: callable,
                       parent_parser: argparse.ArgumentParser):
    """
    Register the 'stats' subcommand to the argument parser.
    """
    stats_parser = subparsers.add_parser(
        'stats',
        help='Summarise a results CSV',
        description='Solved share, geometric mean time and mean iterations per instance subset and method.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        parents=[parent_parser]
    )
    stats_parser.add_argument(
        '-r',
        '--results',
        type=str,
        default='results.csv',
        help='Results CSV file.'
    )
    stats_parser.add_argument(
        '-o',
        '--out',
        type=str,
        default=None,
        help='Optional CSV file for the summary table.'
    )
    stats_parser.set_defaults(handler=handle_stats)
    return subparsers


__all__ = [
    "add_solver_arguments",
    "register_sub_generate",
    "register_sub_solve",
    "register_sub_certify",
    "register_sub_bench",
    "register_sub_profile",
    "register_sub_stats",
]
