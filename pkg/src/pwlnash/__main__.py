﻿# encoding: utf-8-sig

import sys
import json
from argparse import ArgumentParser

from pydantic import ValidationError

from .logutil import get_logger
from .bench import BenchPlan, Method
from .func_impl import *
from .cmdparam import *

# ----------------------------------------------------------------------------
def handle_generate(args):
    """
    Handle the 'generate' command to write a random instance.

    Args:
        args (argparse.Namespace): Parsed command line arguments.
    """
    inst = generate_instance_file(m=args.m,
                                  n=args.n,
                                  kind=args.kind,
                                  seed=args.seed,
                                  out_file=args.out)
    print(f"Instance '{inst.instance_id}' written to {args.out}")

# ----------------------------------------------------------------------------
def handle_solve(args):
    """
    Handle the 'solve' command to compute an approximate equilibrium.

    Args:
        args (argparse.Namespace): Parsed command line arguments.
    """
    instance = args.instance
    if not instance:
        from .game import generate_instance
        instance = generate_instance(args.m, args.n, args.kind, args.seed)
    record = solve_instance_file(instance,
                                 Method(args.method),
                                 args.out,
                                 delta_f=args.delta_f,
                                 mu=args.mu,
                                 delta_0=args.delta_0,
                                 time_limit_s=args.time_limit,
                                 workers=args.jobs,
                                 results_file=args.results)
    print(f"{record.instance_id} [{record.method.value}] {record.status}: "
          f"time {record.wall_time_s:.3f}s, iterations {record.iterations_stage1}/{record.iterations_stage2}, "
          f"certified regret {record.certified_regret:.3e}")

# ----------------------------------------------------------------------------
def handle_certify(args):
    """
    Handle the 'certify' command to recompute a stored solution's regret.

    Args:
        args (argparse.Namespace): Parsed command line arguments.
    """
    value = certify_solution_file(args.instance, args.solution, args.delta_f)
    print(f"certified regret {value:.9g}")

# ----------------------------------------------------------------------------
def handle_bench(args):
    """
    Handle the 'bench' command to run a benchmark batch.

    Args:
        args (argparse.Namespace): Parsed command line arguments.
    """
    plan = BenchPlan(ms=tuple(args.m),
                     ns=tuple(args.n),
                     kinds=tuple(args.kind),
                     instances_per_cell=args.instances,
                     methods=tuple(args.method),
                     seed=args.seed,
                     delta_f=args.delta_f,
                     mu=args.mu,
                     delta_0=args.delta_0,
                     time_limit_s=args.time_limit,
                     jobs=args.jobs)
    records = bench_to_csv(plan, args.out)
    solved = sum(1 for r in records if r.solved)
    print(f"{len(records)} runs in {args.out} ({solved} solved)")

# ----------------------------------------------------------------------------
def handle_profile(args):
    """
    Handle the 'profile' command to draw performance profiles.

    Args:
        args (argparse.Namespace): Parsed command line arguments.
    """
    curves, paths = profiles_from_csv(args.results, args.out)
    for name, curve in curves.items():
        final = curve.points[-1][1] if curve.points else 0.0
        print(f"{name}: solved fraction {final:.3f}")
    for path in paths:
        print(f"written {path}")

# ----------------------------------------------------------------------------
def handle_stats(args):
    """
    Handle the 'stats' command to summarise a results CSV.

    Args:
        args (argparse.Namespace): Parsed command line arguments.
    """
    table = stats_from_csv(args.results, args.out)
    if table.empty:
        print("No runs found.")
    else:
        print(table.to_string(index=False))

# ---------------------------------------------------------------------------------------
def main():
    argp = ArgumentParser(prog="pwlnash",
                          description="Certified approximate Nash equilibria of cybersecurity investment games.")
    # Register common arguments
    common = ArgumentParser(add_help=False)
    common.add_argument(
        '-v',
        '--verbose',
        type=int,
        default=0,
        choices=[0, 1, 2],
        metavar='LEVEL',
        help='Set the verbosity level (0: normal, 1: verbose, 2: debug).'
    )

    subparsers = argp.add_subparsers(dest='command',
                                     help='Available commands')
    # Register subcommands
    register_sub_generate(subparsers, handle_generate, parent_parser=common)
    register_sub_solve(subparsers, handle_solve, parent_parser=common)
    register_sub_certify(subparsers, handle_certify, parent_parser=common)
    register_sub_bench(subparsers, handle_bench, parent_parser=common)
    register_sub_profile(subparsers, handle_profile, parent_parser=common)
    register_sub_stats(subparsers, handle_stats, parent_parser=common)

    try:
        # Parse the command line arguments
        args = argp.parse_args()
        # If no command is specified, show help
        if args.command is None:
            argp.print_help()
        else:
            # Initialize the logger with the specified verbosity level
            _ = get_logger(verbose_level=args.verbose)
            # Execute the handler for the specified command
            if hasattr(args, 'handler'):
                args.handler(args)
            else:
                argp.print_help()

    except FileNotFoundError as e:
        print(f"Error: File not found: {e}", file=sys.stderr)
        sys.exit(1)
    except PermissionError as e:
        print(f"Error: Permission denied: {e}", file=sys.stderr)
        sys.exit(1)
    except json.JSONDecodeError as e:
        print(f"Error: Invalid JSON: {e}", file=sys.stderr)
        sys.exit(1)
    except ValidationError as e:
        print(f"Error: Invalid data: {e}", file=sys.stderr)
        sys.exit(1)
    except ValueError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(1)
    except RuntimeError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(1)
    except Exception as e:
        print(f"Exception: {e}", file=sys.stderr)
        sys.exit(1)

# ---------------------------------------------------------------------------------------
if __name__ == "__main__":
    main()
