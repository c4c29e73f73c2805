"""Command-line interface.

Exit codes: 0 success, 1 unreadable input or bad option, 2 the cyclic
completion did not converge, 3 the input is outside the model's domain
(invalid matrix, infeasible completion, disconnected graph, ...).
"""

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .completion import (DEFAULT_COVER, MAX_ITER, THETA_TOL, PartialVariogram, complete,
                         detect_noncompletable)
from .data import ExceedanceSample
from .density import log_mass_L, pareto_loglik, surrogate_loglik
from .estimation import empirical_chi, empirical_variogram, learn_tree, rank_transform
from .estimators import EmpiricalMarginTransformer, HuslerReissGraphical
from .exceptions import (ConfigError, DomainError, HRGMError, NoConvergence, NotInCone,
                         ParseError)
from .graph import is_decomposable
from .linalg import check_precision, check_variogram, fix_row_sums
from .simulation import SamplerConfig, sample_pareto
from .transforms import chi_of_gamma, gamma_of_theta

log = logging.getLogger("hrgm")

EXIT_OK, EXIT_CONFIG, EXIT_NO_CONVERGENCE, EXIT_DOMAIN = 0, 1, 2, 3
SEED_ENV = "EGK_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _probability(text):
    p = float(text)
    if not 0 < p < 1:
        raise ConfigError(f"p must lie in (0, 1), got {text}")
    return p


def _positive(text):
    x = float(text)
    if not x > 0:
        raise ConfigError(f"expected a positive number, got {text}")
    return x


def _resolve_seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
    return int(np.random.SeedSequence().entropy % 2**63)


def _out(args, name):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


# ---------------------------------------------------------------- complete

def cmd_complete(args):
    values = io.parse_matrix(args.matrix)
    graph, _ = io.parse_graph(args.graph, d=values.shape[0])
    partial = PartialVariogram(np.where(graph.mask(), values, np.nan))
    diagnosis = detect_noncompletable(partial, graph)
    report_path = _out(args, "report.json")
    if diagnosis.infeasible:
        io.write_json(report_path, {"status": "infeasible", "reasons": diagnosis.reasons})
        for reason in diagnosis.reasons:
            log.error("infeasible: %s", reason)
        return EXIT_DOMAIN

    init = io.parse_matrix(args.init) if args.init else None
    if init is None and not np.any(np.isnan(values)):
        init = values
    if init is None and not (graph.is_complete() or is_decomposable(graph)):
        raise ConfigError("graph is not decomposable: pass --init or a fully specified matrix")

    kw = {}
    if not (graph.is_complete() or is_decomposable(graph)):
        kw = dict(theta_tol=args.theta_tol, max_iter=args.max_iter, cover=args.cover, strict=True)
    status = EXIT_OK
    try:
        report = complete(partial, graph, init=init, **kw)
    except NoConvergence as exc:
        report = exc.report
        status = EXIT_NO_CONVERGENCE
    io.write_matrix(_out(args, "gamma.txt"), report.gamma)
    io.write_matrix(_out(args, "theta.txt"), report.theta)
    io.write_json(report_path, {"status": "ok" if status == EXIT_OK else "no-convergence",
                                **report.to_dict()})
    return status


# ---------------------------------------------------------------- fit

def _resolve_graph_spec(spec, d):
    if spec in ("complete", "mst"):
        return spec
    graph, _ = io.parse_graph(spec, d=d)
    return graph


def _heldout(model, train_raw, valid_raw, p, n_mc, seed):
    """Surrogate and full log-likelihood on validation rows."""
    if model.margins == "pareto":
        valid = valid_raw
    else:
        valid = EmpiricalMarginTransformer().fit(train_raw).transform(valid_raw)
    out = {"n_validation": int(valid.shape[0])}
    if model.margins == "pareto":
        g_bar = empirical_variogram(ExceedanceSample(valid, "pareto")).gamma_hat
        exceed = valid
    else:
        g_bar = empirical_variogram(ExceedanceSample(valid, "exponential"), p).gamma_hat
        u = -np.log1p(-p)
        exceed = valid[valid.max(axis=1) > u] - u
    out["surrogate_loglik"] = surrogate_loglik(g_bar, model.precision_)
    if exceed.shape[0]:
        log_mass, se = log_mass_L(model.variogram_, n_mc, seed)
        total = pareto_loglik(exceed, model.variogram_, log_mass)
        out.update(full_loglik=total, full_loglik_per_obs=total / exceed.shape[0],
                   n_exceedances=int(exceed.shape[0]), log_mass=log_mass, log_mass_se=se)
    return out


def cmd_fit(args):
    values, names, dropped = io.read_csv(args.data)
    n = values.shape[0]
    train, valid = values, None
    if args.split is not None:
        if not 0 < args.split < 1:
            raise ConfigError("--split must be a fraction in (0, 1)")
        cut = int(round(n * args.split))
        train, valid = values[:cut], values[cut:]
    model = HuslerReissGraphical(
        graph=_resolve_graph_spec(args.graph, values.shape[1]), p=args.p, mode=args.mode,
        margins=args.margins, theta_tol=args.theta_tol, max_iter=args.max_iter,
        cover=args.cover)
    model.fit(train)

    if args.margins == "raw":
        y_train = rank_transform(train).values
    else:
        y_train = train
    chi_emp = empirical_chi(ExceedanceSample(y_train, "exponential"), args.p)
    report = {
        "n_observations": n,
        "n_dropped": dropped,
        "n_train": int(train.shape[0]),
        "names": names,
        "p": args.p,
        "mode": args.mode,
        "n_edges": len(model.graph_.edges),
        "edges": [[i + 1, j + 1] for i, j in sorted(model.graph_.edges)],
        "converged": model.converged_,
        "iterations": model.n_iter_,
        "max_nonedge_theta": model.completion_report_.max_nonedge_theta,
        "surrogate_loglik_train": model.score(train),
        "chi_empirical": chi_emp,
        "chi_fitted": chi_of_gamma(model.variogram_),
        "gamma_empirical": model.empirical_variogram_,
    }
    if valid is not None and valid.shape[0]:
        report["validation"] = _heldout(model, train, valid, args.p, args.n_mc,
                                        _resolve_seed(args.seed))
    io.write_matrix(_out(args, "gamma_hat.txt"), model.empirical_variogram_)
    io.write_matrix(_out(args, "gamma.txt"), model.variogram_)
    io.write_matrix(_out(args, "theta.txt"), model.precision_)
    io.write_graph(_out(args, "graph.txt"), model.graph_)
    io.write_json(_out(args, "report.json"), report)
    return EXIT_OK if model.converged_ else EXIT_NO_CONVERGENCE


# ---------------------------------------------------------------- simulate

def read_parameter(path, row_sum_tol=None):
    """Variogram from a file holding either Gamma (zero diagonal) or Theta (zero row sums).

    Theta files whose row sums are off by rounding (at most ``row_sum_tol``,
    default ``0.005 * d``) are repaired by resetting the diagonal.
    """
    m = io.parse_matrix(path)
    if np.any(np.isnan(m)):
        raise NotInCone("parameter matrix must be fully specified")
    d = m.shape[0]
    if np.all(np.diag(m) == 0) and d > 1:
        return check_variogram(m)
    tol = 0.005 * d if row_sum_tol is None else row_sum_tol
    if np.max(np.abs(m.sum(axis=1))) <= tol:
        return gamma_of_theta(check_precision(fix_row_sums(m)))
    raise NotInCone("matrix has neither a zero diagonal nor zero row sums")


def cmd_simulate(args):
    gamma = read_parameter(args.parameter)
    seed = _resolve_seed(args.seed)
    sample, info = sample_pareto(gamma, args.n, SamplerConfig(seed=seed))
    io.write_csv(args.out, sample.values)
    mass, se = info.mass(gamma.shape[0])
    sidecar = args.sidecar or str(Path(args.out).with_suffix(".json"))
    io.write_json(sidecar, {"n": args.n, "seed": seed, "proposals": info.proposals,
                            "acceptance_rate": info.acceptance_rate,
                            "exceedance_mass": mass, "exceedance_mass_se": se})
    return EXIT_OK


# ---------------------------------------------------------------- chi / transform / learn-tree

def _load_exponential(path):
    values, names, _ = io.read_csv(path)
    return rank_transform(ExceedanceSample(values, "raw", tuple(names))), names


def cmd_chi(args):
    y, _ = _load_exponential(args.data)
    io.write_matrix(args.out, empirical_chi(y, args.p))
    return EXIT_OK


def cmd_transform(args):
    y, names = _load_exponential(args.data)
    io.write_csv(args.out, y.values, names)
    return EXIT_OK


def cmd_learn_tree(args):
    y, names = _load_exponential(args.data)
    tree = learn_tree(empirical_variogram(y, args.p))
    io.write_graph(args.out, tree, names)
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser():
    parser = _Parser(prog="hrgm", description="Hüsler-Reiss graphical models")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def completion_opts(p):
        p.add_argument("--theta-tol", type=_positive, default=THETA_TOL)
        p.add_argument("--max-iter", type=int, default=MAX_ITER)
        p.add_argument("--cover", choices=["fill-in", "one-per-nonedge"], default=DEFAULT_COVER)

    p = sub.add_parser("complete", help="complete a partial variogram on a graph")
    p.add_argument("matrix")
    p.add_argument("graph")
    p.add_argument("--init", help="full variogram to start the cyclic completion from")
    p.add_argument("--out-dir", default=".")
    completion_opts(p)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("fit", help="fit a graph-structured model to observations")
    p.add_argument("data")
    p.add_argument("--graph", default="complete", help="'complete', 'mst' or an edge-list file")
    p.add_argument("--p", type=_probability, default=0.95)
    p.add_argument("--mode", choices=["full", "cliquewise"], default="full")
    p.add_argument("--margins", choices=["raw", "exponential", "pareto"], default="raw")
    p.add_argument("--split", type=float, help="training fraction (leading rows)")
    p.add_argument("--n-mc", type=int, default=100_000,
                   help="Monte Carlo size for the exceedance mass in the full likelihood")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", default=".")
    completion_opts(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="exact multivariate Pareto samples")
    p.add_argument("parameter", help="file with Gamma or Theta")
    p.add_argument("n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--sidecar", help="JSON diagnostics path (default: OUT with .json)")
    p.set_defaults(func=cmd_simulate)

    for name, func, help_ in [("chi", cmd_chi, "empirical extremal correlation"),
                              ("learn-tree", cmd_learn_tree, "minimum spanning tree")]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("data")
        p.add_argument("--p", type=_probability, default=0.95)
        p.add_argument("--out", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("transform", help="rank transform to exponential margins")
    p.add_argument("data")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_transform)
    return parser


def main(argv=None):
    logging.basicConfig(format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ConfigError, ParseError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except NoConvergence as exc:
        log.error("%s", exc)
        return EXIT_NO_CONVERGENCE
    except (DomainError, HRGMError) as exc:
        log.error("%s", exc)
        return EXIT_DOMAIN
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
