"""Command-line entry point.

Exit status: 0 on success, 1 on domain errors (bad measures, non-composable
pairs, failed constructions), 2 on usage errors (bad flags, unreadable or
malformed input files).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import amenability as A
from . import boundary as B
from . import group_walks as W
from . import io as fio
from . import measures as M
from . import operators as O
from . import rwre as R
from .errors import GroupoidError, SchemaError
from .fixtures import FIXTURES
from .groupoid import ActionSpec, verify_axioms

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(args, text: str, path: str | None) -> None:
    if path:
        fio.write_text(path, text)
    else:
        sys.stdout.write(text)


def _exact(args) -> bool:
    return args.arithmetic == "exact"


def _load(path: str):
    try:
        return fio.load_json(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _groupoid(args):
    return fio.parse_groupoid(_load(args.groupoid))


def _kappa(args, G):
    if getattr(args, "kappa", None) is None:
        return [1] * G.n_objects
    kappa = fio.parse_number_list(args.kappa, _exact(args))
    if len(kappa) != G.n_objects:
        raise SchemaError(f"kappa has {len(kappa)} entries, groupoid has {G.n_objects} objects")
    return kappa


def _reference(args, G):
    m = M.reference_measure(G, _kappa(args, G))
    return m if _exact(args) else M.to_float(m)


def _operator(args, G, path: str):
    theta = fio.parse_system(_load(path), G, _exact(args))
    return O.EquivariantOperator(theta, args.tolerance)


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args) -> int:
    G = _groupoid(args)
    report = verify_axioms(G)
    lines = [f"groupoid: kind={G.kind} objects={G.n_objects} morphisms={G.n_morphisms}",
             f"violations: {len(report)}"]
    lines += [f"  {v}" for v in report]
    _emit(args, "\n".join(lines) + "\n", args.out)
    return EXIT_OK if report.ok else EXIT_DOMAIN


def cmd_discrepancy(args) -> int:
    G = _groupoid(args)
    P = _operator(args, G, args.system)
    m_hat = _reference(args, G)
    rows = [(g, G.source[g], G.target[g], O.discrepancy_at(g, P)) for g in G.morphisms]
    mean = O.mean_discrepancy(m_hat, P, args.tolerance)
    if args.csv:
        fio.write_text(args.csv, fio.csv_text(("morphismId", "sourceObject", "targetObject", "delta"), rows))
    _emit(args, f"mean discrepancy Delta(m, P) = {fio.fmt(mean)}\n", args.out)
    return EXIT_OK


def cmd_convolve(args) -> int:
    G = _groupoid(args)
    P = _operator(args, G, args.system)
    if args.other:
        PQ = O.compose_operators(P, _operator(args, G, args.other))
    else:
        PQ = O.power(P, args.power)
    _emit(args, json.dumps(fio.system_to_doc(PQ.system)) + "\n", args.out)
    return EXIT_OK


def _provider(args):
    if args.fixture:
        return FIXTURES[args.fixture](args.horizon or 10)
    if not (args.groupoid and args.provider):
        raise UsageError("construct-liouville needs --fixture or both --groupoid and --provider")
    G = _groupoid(args)
    doc = _load(args.provider)
    ops = fio._require(doc, "operators", "provider file")
    if not isinstance(ops, list) or not ops:
        raise SchemaError("provider file: 'operators' must be a nonempty list")
    operators = [O.EquivariantOperator(fio.parse_system(d, G, _exact(args)), args.tolerance) for d in ops]
    return A.OperatorProvider.from_list(operators)


def cmd_construct(args) -> int:
    provider = _provider(args)
    G = provider.at(1).groupoid
    m_hat = _reference(args, G)
    schedule = A.build_schedule(args.stages, args.epsilon_base, args.t_base)
    P, cert = A.construct_liouville(provider, m_hat, schedule, args.product_cap, args.horizon)
    check = A.verify_certificate(P, m_hat, schedule, cert, args.tolerance)
    lines = [
        "Liouville construction certificate",
        f"stages: {schedule.prefix_length}",
        f"selected indices n_i: {cert.indices}",
        f"weights t_i: {[fio.fmt(t) for t in cert.weights]}",
        f"renormalized weights: {[fio.fmt(t) for t in cert.renormalized]}",
        f"k_i: {list(schedule.k)}",
        f"epsilon_i: {[fio.fmt(e) for e in schedule.epsilon]}",
        f"truncation residual: {fio.fmt(cert.truncation_residual)}",
        "per-stage check Delta(m, P^k_i) <= 3*epsilon_i + 2*residual:",
    ]
    for b in cert.checked_bounds:
        lines.append(f"  stage {b.stage}: k={b.k} Delta={fio.fmt(b.measured)} bound={fio.fmt(b.bound)} "
                     f"{'ok' if b.ok else 'FAIL'}")
    lines.append(f"independent verification: {'passed' if check.ok else 'FAILED'}")
    lines += [f"  {p}" for p in check.problems]
    _emit(args, "\n".join(lines) + "\n", args.out)
    if args.csv:
        fio.write_text(args.csv, fio.csv_text(
            ("stage", "n_i", "k_i", "epsilon_i", "measured", "bound"), cert.rows(schedule)))
    if args.system_out:
        fio.write_text(args.system_out, json.dumps(fio.system_to_doc(P.system)) + "\n")
    return EXIT_OK if check.ok else EXIT_DOMAIN


def cmd_boundary(args) -> int:
    G = _groupoid(args)
    P = _operator(args, G, args.system)
    if not _exact(args):
        P = O.EquivariantOperator(P.system.as_float(), check=False)
    report = B.fibrewise_report(P, _kappa(args, G), args.horizon, args.mode, args.threshold)
    lines = [f"fibrewise {args.mode} report (horizon {args.horizon}, threshold {args.threshold})"]
    for x, prof in report.per_object.items():
        lines.append(f"  object {x}: d_N = {fio.fmt(prof.values[-1])} verdict={prof.verdict} "
                     f"quasi-substationary={report.quasi_substationary[x]}")
    lines.append(f"aggregate trivial kappa-mass: {report.aggregate}")
    _emit(args, "\n".join(lines) + "\n", args.out)
    if args.csv_dir:
        d = Path(args.csv_dir)
        d.mkdir(parents=True, exist_ok=True)
        for x, prof in report.per_object.items():
            fio.write_text(d / f"profile_{x}.csv",
                           fio.csv_text(("n", "d_n"), enumerate(prof.values, start=1)))
    return EXIT_OK


def _literal(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{text!r} is not valid JSON: {exc}") from None


def _group_measure(args, text, oracle):
    return W.canonical_measure(fio.parse_measure_literal(text, _exact(args)), oracle)


def cmd_group_sweep(args) -> int:
    oracle = W.group_from_spec(args.group)
    mu = _group_measure(args, args.measure, oracle)
    M.require_probability(mu, "step distribution", args.tolerance)
    probe = oracle.canonicalize(args.probe if isinstance(oracle, W.FreeGroup2) else _literal(args.probe))
    values = W.convolution_power_sweep(mu, args.horizon, probe, oracle, args.support_cap)
    _emit(args, fio.csv_text(("n", "value"), enumerate(values, start=1)), args.out)
    return EXIT_OK


def cmd_folner(args) -> int:
    oracle = W.group_from_spec(args.group)
    m_hat = _group_measure(args, args.reference, oracle)
    M.require_probability(m_hat, "reference measure", args.tolerance)
    if args.ball is not None:
        A_set = W.ball(oracle, args.ball)
    elif args.set is not None:
        A_set = _literal(args.set)
    else:
        raise UsageError("folner needs --set or --ball")
    value = W.folner_measure_test(m_hat, A_set, oracle)
    direct = W.folner_measure_direct(m_hat, A_set, oracle)
    agree = value == direct if _exact(args) else M.close_to(float(value), float(direct), args.tolerance)
    _emit(args, f"Delta(m, chi_A) = {fio.fmt(value)} (|A| = {len(set(A_set))}, "
                f"pointwise route {'agrees' if agree else 'DISAGREES'})\n", args.out)
    return EXIT_OK if agree else EXIT_DOMAIN


def _rwre_inputs(args):
    doc = _load(args.action)
    if doc.get("kind") != "action":
        raise SchemaError("rwre needs an action groupoid file")
    action = ActionSpec(doc["group"], doc["action"])
    action.validate()
    theta = fio.parse_theta(_load(args.theta), action.n_points, _exact(args))
    for x, t in enumerate(theta):
        M.require_probability(t, f"theta({x})", args.tolerance)
    return action, theta


def cmd_rwre_simulate(args) -> int:
    action, theta = _rwre_inputs(args)
    env = R.environment_of(theta, args.point, action)
    start = env.oracle.identity if args.start is None else env.oracle.canonicalize(args.start)
    rows, tv = R.rwre_histogram(env, start, args.steps, args.samples, args.seed)
    _emit(args, fio.csv_text(("element", "empiricalMass", "exactMass", "absDiff"), rows), args.out)
    sys.stderr.write(f"total variation empirical vs exact: {tv:.6f}\n")
    if args.log_paths:
        lines = []
        for i in range(args.log_paths):
            s = R.sample_rwre_path(env, start, args.steps, args.seed + i)
            lines.append(f"seed={s.seed} path=" + " ".join(str(g) for g in s.states))
        fio.write_text(args.paths_out or "paths.log", "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_rwre_report(args) -> int:
    action, theta = _rwre_inputs(args)
    if not _exact(args):
        theta = [M.to_float(t) for t in theta]
    rep = R.rwre_tail_report(action, theta, None, args.horizon, args.mode, args.threshold)
    lines = [f"random walk in random environment, {args.mode} profiles per point"]
    for x, prof in rep.per_object.items():
        lines.append(f"  point {x}: d_N = {fio.fmt(prof.values[-1])} verdict={prof.verdict}")
    lines.append(f"aggregate trivial mass: {rep.aggregate}")
    _emit(args, "\n".join(lines) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--arithmetic", choices=("exact", "float"), default="exact")
    common.add_argument("--tolerance", type=float, default=M.DEFAULT_TOL)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the main output here instead of stdout")

    p = argparse.ArgumentParser(prog="markov-groupoids", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common], help="verify groupoid axioms")
    s.add_argument("--groupoid", required=True)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("discrepancy", parents=[common], help="discrepancy profile of an operator")
    s.add_argument("--groupoid", required=True)
    s.add_argument("--system", required=True)
    s.add_argument("--kappa")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_discrepancy)

    s = sub.add_parser("convolve", parents=[common], help="convolve fibred systems")
    s.add_argument("--groupoid", required=True)
    s.add_argument("--system", required=True)
    s.add_argument("--other")
    s.add_argument("--power", type=int, default=1, help="P^n when --other is not given")
    s.set_defaults(func=cmd_convolve)

    s = sub.add_parser("construct-liouville", parents=[common],
                       help="convex combination with asymptotically invariant powers")
    s.add_argument("--fixture", choices=sorted(FIXTURES))
    s.add_argument("--groupoid")
    s.add_argument("--provider")
    s.add_argument("--kappa")
    s.add_argument("--stages", type=int, default=3)
    s.add_argument("--epsilon-base", type=Fraction, default=Fraction(1, 2))
    s.add_argument("--t-base", type=Fraction, default=Fraction(1, 2))
    s.add_argument("--product-cap", type=int, default=A.DEFAULT_PRODUCT_CAP)
    s.add_argument("--horizon", type=int)
    s.add_argument("--csv")
    s.add_argument("--system-out")
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("boundary", parents=[common], help="fibrewise 0-2 law report")
    s.add_argument("--groupoid", required=True)
    s.add_argument("--system", required=True)
    s.add_argument("--kappa")
    s.add_argument("--mode", choices=B.MODES, default="lazy")
    s.add_argument("--horizon", type=int, default=100)
    s.add_argument("--threshold", type=float, default=B.DEFAULT_THRESHOLD)
    s.add_argument("--csv-dir")
    s.set_defaults(func=cmd_boundary)

    s = sub.add_parser("group-sweep", parents=[common], help="convolution power sweep on a group")
    s.add_argument("--group", required=True)
    s.add_argument("--measure", required=True, help='JSON list like [[0,1,2],[1,1,4],[-1,1,4]]')
    s.add_argument("--probe", required=True)
    s.add_argument("--horizon", type=int, default=16)
    s.add_argument("--support-cap", type=int)
    s.set_defaults(func=cmd_group_sweep)

    s = sub.add_parser("folner", parents=[common], help="mean discrepancy of a uniform measure")
    s.add_argument("--group", required=True)
    s.add_argument("--reference", required=True)
    s.add_argument("--set")
    s.add_argument("--ball", type=int)
    s.set_defaults(func=cmd_folner)

    s = sub.add_parser("rwre", help="random walk in random environment")
    rsub = s.add_subparsers(dest="rwre_command", required=True)
    r = rsub.add_parser("simulate", parents=[common])
    r.add_argument("--action", required=True)
    r.add_argument("--theta", required=True)
    r.add_argument("--point", type=int, default=0)
    r.add_argument("--start", type=int, default=None)
    r.add_argument("--steps", type=int, required=True)
    r.add_argument("--samples", type=int, default=10_000)
    r.add_argument("--log-paths", type=int, default=0)
    r.add_argument("--paths-out")
    r.set_defaults(func=cmd_rwre_simulate)
    r = rsub.add_parser("report", parents=[common])
    r.add_argument("--action", required=True)
    r.add_argument("--theta", required=True)
    r.add_argument("--mode", choices=B.MODES, default="tail")
    r.add_argument("--horizon", type=int, default=100)
    r.add_argument("--threshold", type=float, default=B.DEFAULT_THRESHOLD)
    r.set_defaults(func=cmd_rwre_report)
    return p


def _config_echo(args) -> str:
    cfg = {k: (str(v) if isinstance(v, Fraction) else v)
           for k, v in sorted(vars(args).items()) if k != "func"}
    cfg["threads"] = os.environ.get("GROUPOID_THREADS", "all")
    return "# config " + json.dumps(cfg, sort_keys=True, default=str) + "\n"


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    sys.stderr.write(_config_echo(args))
    try:
        return args.func(args)
    except (UsageError, SchemaError) as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except GroupoidError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
