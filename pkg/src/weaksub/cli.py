"""Command line entry point: ``run``, ``ratios`` and ``synth``.

Exit codes: 0 success, 2 configuration error, 3 resource limit, 1 anything else.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError, ResourceError, WeakSubError
from .experiments import ExperimentConfig, emit_outputs, generate_synthetic, load_config, run_experiment
from .greedy import RandomSource, greedy
from .ratios import (D_MAX_BRUTEFORCE, brute_force_opt, make_certificate, subadditivity_ratio_k,
                     subadditivity_ratio_set, submodularity_ratio_uk, uniform_submodularity_ratio)
from .regression import (R2Function, load_csv, normalize, nu_lower_bound_regression, save_csv,
                         sparse_eigenvalues, write_support)

log = logging.getLogger("weaksub")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def cmd_run(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.threads is not None:
        config = replace(config, threads=args.threads)
    config.validate()
    rows = run_experiment(config)
    csv_path, plot_path, flagged = emit_outputs(rows, args.out)
    print(f"rows={len(rows)}")
    print(f"metrics={csv_path}")
    print(f"plot_script={plot_path}")
    print(f"nan_metrics={len(flagged)}")
    for item in flagged:
        print(f"nan={item}")
    return 0


def cmd_ratios(args) -> int:
    inst = normalize(load_csv(args.csv))
    k = args.k
    if not 1 <= k <= inst.d:
        raise ConfigError(f"k must lie in [1, {inst.d}], got {k}")
    if inst.d > D_MAX_BRUTEFORCE:
        raise ResourceError(
            f"d={inst.d} exceeds d_max_bruteforce={D_MAX_BRUTEFORCE}; exact ratios are brute force only")
    f = R2Function(inst)
    trace = greedy(f, None, k)
    G = trace.selected
    opt_set, opt = brute_force_opt(f, k)
    gamma_g = submodularity_ratio_uk(f, G, k)
    gamma_u = uniform_submodularity_ratio(f, k, k)
    nu_k = subadditivity_ratio_k(f, k)
    nu_opt = subadditivity_ratio_set(f, opt_set)
    order = min(2 * k, inst.d)
    lam = sparse_eigenvalues(inst.C, order)

    out = [f"n={inst.n}", f"d={inst.d}", f"k={k}",
           f"greedy_support={','.join(map(str, G))}", f"greedy_value={trace.value:.12g}",
           f"opt_support={','.join(map(str, opt_set))}", f"opt_value={opt:.12g}"]
    out += gamma_g.lines("gamma_greedy.")
    out += gamma_u.lines("gamma_uniform.")
    out += nu_k.lines("nu_k.")
    out += nu_opt.lines("nu_opt.")
    out += [f"eig.order={order}", f"eig.lambda_min={lam.lam_min:.12g}",
            f"eig.nu_opt_bound={nu_lower_bound_regression(inst, opt_set):.12g}"]
    certs = [
        make_certificate("greedy", gamma_g.value, opt_value=opt, note="gamma over the greedy set"),
        make_certificate("stochastic", gamma_u.value, delta=args.delta, opt_value=opt,
                         note=f"gamma over all |L|<={k}"),
        make_certificate("distributed", gamma_u.value, nu=nu_k.value, opt_value=opt,
                         note=f"gamma over all |L|<={k}"),
        make_certificate("distributed", max(lam.lam_min, 0.0), nu=nu_lower_bound_regression(inst, opt_set),
                         opt_value=opt, note=f"eigenvalue bounds, order {order}"),
    ]
    for i, c in enumerate(certs):
        out += [f"certificate{i}.{line}" for line in c.lines()]
    print("\n".join(out))
    if args.support_out:
        write_support(args.support_out, G)
    return 0


def cmd_synth(args) -> int:
    config = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    for key in ("n", "d", "s"):
        if getattr(args, key) is not None:
            config = replace(config, **{key: getattr(args, key)})
    config = replace(config, problem="regression").validate()
    train, _, _, support = generate_synthetic(config, RandomSource(config.seed))
    X = train.X * train.col_scale
    y = train.y * train.y_scale
    save_csv(args.out, X, y)
    write_support(Path(str(args.out) + ".support"), support)
    print(f"wrote {args.out} (n={train.n}, d={train.d}, true support in {args.out}.support)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weaksub", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment sweep and write metrics.csv")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ratios", help="exact ratios and certificates for a small regression CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--support-out")
    p.set_defaults(func=cmd_ratios)

    p = sub.add_parser("synth", help="write a synthetic regression CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=_seed)
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--s", type=int)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    except (WeakSubError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
