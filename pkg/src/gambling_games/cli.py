"""Command-line front end: ``gambling-games COMMAND [SCENARIO] [options]``.

The game comes from a scenario file or from ``--builder "name k=v ..."``.
Every command writes a CSV table with a fixed header to stdout (or
``--csv``) and a readable report to stderr (or ``--report``). Exit codes:
0 success, 1 a requested check failed, 2 input error, 3 numerical failure.
"""

import argparse
import csv
import io
import sys
import warnings

import numpy as np

from . import charact, counterexample, playbook, reach, shapley
from .actions import ActionSet
from .builders import BUILDERS
from .core import CheckResult, check_leavable, check_nonexpansive
from .errors import InputError, NumericalError, ResourceLimitError
from .scenario import Scenario, _builder_line, load_scenario

HEADERS = {
    "solve": ["x", "y", "value"],
    "sweep": ["lambda", "x", "y", "value", "residual", "error_bound", "status"],
    "nstage": ["n", "x", "y", "value"],
    "limit": ["x", "y", "value", "extrapolated"],
    "check": ["property", "house", "status", "violation", "witness"],
    "reach": ["state", "vertex", "target", "weight"],
    "potential": ["state", "potential"],
    "counterexample": ["lambda", "x", "y", "z", "alpha_star", "beta_star",
                       "residual_x", "residual_y", "method"],
    "scan": ["n", "lambda_hi", "x_hi", "lambda_lo", "x_lo", "gap"],
    "simulate": ["trial", "average", "l1_average_p1", "l1_average_p2", "error"],
    "variation": ["t", "step", "l1_average", "l2_sum"],
}
STRUCTURAL = ("leavable", "nonexpansive", "idempotent", "weakly-acyclic", "strongly-acyclic")
VARIANTS = {
    "grid": "grid(0,0.25,64)",
    "two-point": "{0,0.25}",
    "lacunary": None,
}


class Output:
    """Collects the CSV rows and report lines of one command."""

    def __init__(self, header):
        self.header = header
        self.rows = []
        self.lines = []

    def row(self, *values):
        self.rows.append([_fmt(v) for v in values])

    def say(self, text=""):
        self.lines.append(str(text))

    def csv_text(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        w.writerows(self.rows)
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return "" if v is None else str(v)


def _floats(text, what):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"malformed number list for {what}: {text!r}") from None


def _game(args):
    if args.builder and args.scenario:
        raise InputError("give either a scenario file or --builder, not both")
    if args.builder:
        sc = Scenario(builder=_builder_line(args.builder.split(), None))
    elif args.scenario:
        try:
            sc = load_scenario(args.scenario)
        except OSError as exc:
            raise InputError(f"cannot read scenario: {exc}") from None
    else:
        raise InputError("a scenario file or --builder is required")
    return sc, sc.game()


def _tol(args, sc, key="tol", default=1e-9):
    v = getattr(args, key, None)
    if v is not None:
        return v
    return sc.solver.get(key, default)


def read_values(path, game):
    """Value table from a CSV with columns ``x, y, value`` (extra columns ignored)."""
    v = np.full(game.shape, np.nan)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for k, rec in enumerate(csv.DictReader(fh), start=2):
                try:
                    i = game.house1.space.index(rec["x"])
                    j = game.house2.space.index(rec["y"])
                    v[i, j] = float(rec["value"])
                except (KeyError, TypeError, ValueError) as exc:
                    raise InputError(f"{path} line {k}: {exc}") from None
    except OSError as exc:
        raise InputError(f"cannot read values: {exc}") from None
    if np.isnan(v).any():
        raise InputError(f"{path} does not cover every state pair")
    return v


def _value_rows(out, game, values, extra=None):
    for i, x in enumerate(game.house1.space.labels):
        for j, y in enumerate(game.house2.space.labels):
            tail = [] if extra is None else [extra[i, j]]
            out.row(x, y, values[i, j], *tail)


def _limit(game, args, sc, out):
    lams = _floats(args.lambdas, "--lambdas") if getattr(args, "lambdas", None) else None
    res = charact.limit_value(game, args.method, lams, tol=_tol(args, sc),
                              variant=getattr(args, "variant", "average"),
                              max_iter=int(sc.solver.get("max_iter", 10_000)))
    out.say(f"limit candidate by {res.method}: accepted={res.accepted}")
    if res.method == "sweep":
        out.say(f"smallest lambda {res.details['lambda_min']:.3e}, observed exponent "
                f"{res.details['observed_exponent']:.3f} (assumed 0.5)")
    else:
        out.say(f"{res.details['iterations']} iterations, last step {res.details['step']:.3e}")
    out.say(f"characterization at tolerance {res.report.tol:.3e}:")
    out.say(res.report)
    return res


def cmd_solve(args, sc, game, out):
    sol = shapley.solve_discounted(game, args.lam, _tol(args, sc))
    _value_rows(out, game, sol.values)
    out.say(f"discounted value at lambda={args.lam!r}: {sol.iterations} operator steps, "
            f"{sol.accelerated} policy jumps, residual {sol.residual:.3e}, "
            f"error bound {sol.error_bound:.3e} ({sol.certificate})")
    return 0


def cmd_sweep(args, sc, game, out):
    table = shapley.lambda_sweep(game, _floats(args.lambdas, "--lambdas"), _tol(args, sc))
    for r in table.rows:
        status = "ok" if r.error is None else "failed"
        vals = r.values if r.values is not None else np.full(game.shape, np.nan)
        for i, x in enumerate(game.house1.space.labels):
            for j, y in enumerate(game.house2.space.labels):
                out.row(r.lam, x, y, vals[i, j], r.residual, r.error_bound, status)
        out.say(f"lambda={r.lam:.3e}: " + (f"{r.iterations} steps, bound {r.error_bound:.3e}"
                                          if r.error is None else r.error))
    return 3 if not table.ok_rows() else 0


def cmd_nstage(args, sc, game, out):
    vals = shapley.n_stage_values(game, args.n)
    stages = range(1, args.n + 1) if args.all else [args.n]
    for n in stages:
        for i, x in enumerate(game.house1.space.labels):
            for j, y in enumerate(game.house2.space.labels):
                out.row(n, x, y, vals[n - 1][i, j])
    out.say(f"n-stage values computed up to n={args.n}")
    return 0


def cmd_limit(args, sc, game, out):
    res = _limit(game, args, sc, out)
    _value_rows(out, game, res.values,
                res.extrapolated if res.extrapolated is not None else res.values)
    return 1 if args.strict and not res.accepted else 0


def _structural(game, name, side, tol, reach_tol):
    house = game.house1 if side == 1 else game.house2
    if name == "leavable":
        return check_leavable(house)
    if name == "nonexpansive":
        return check_nonexpansive(house)
    if name == "idempotent":
        return reach.check_idempotent(house, tol)
    mode = "weak" if name == "weakly-acyclic" else "strong"
    pot = reach.synthesize_potential(house, mode, tol, reach_tol)
    if pot is None:
        return CheckResult(False, np.nan, "no potential found at this discretization")
    return CheckResult(True, 0.0, "phi=" + ",".join(repr(float(p)) for p in pot.values))


def cmd_check(args, sc, game, out):
    props = [p.strip() for p in args.props.split(",") if p.strip()]
    unknown = [p for p in props if p not in STRUCTURAL + charact.PROPERTIES]
    if unknown:
        raise InputError(f"unknown properties {unknown}; known: "
                         f"{', '.join(STRUCTURAL + charact.PROPERTIES)}")
    tol = _tol(args, sc, "check_tol", 1e-7)
    reach_tol = sc.solver.get("reach_tol", 1e-6)
    failed = False
    for name in [p for p in props if p in STRUCTURAL]:
        for side, label in ((1, "X"), (2, "Y")):
            r = _structural(game, name, side, tol, reach_tol)
            failed |= not r.passed
            out.row(name, label, "pass" if r.passed else "fail", float(r.violation),
                    "" if r.witness is None else r.witness)
            out.say(f"{name:<17}{label}  {'pass' if r.passed else 'fail'}")
    chars = [p for p in props if p in charact.PROPERTIES]
    if chars:
        if args.values:
            v = read_values(args.values, game)
            out.say(f"characterization of {args.values}")
        else:
            args.method = "sweep"
            v = _limit(game, args, sc, Output([])).values
            out.say("characterization of the sweep limit candidate")
        rep = charact.characterize(game, v, tol, chars, reach_tol)
        for name, status, viol, wit in rep.rows():
            if name in chars:
                failed |= status != "pass"
                out.row(name, "", status, viol, wit)
        out.say(rep)
    return 1 if failed else 0


def _side_house(game, side):
    return game.house1 if side == 1 else game.house2


def cmd_reach(args, sc, game, out):
    house = _side_house(game, args.side)
    tol = _tol(args, sc, "reach_tol", 1e-6)
    states = [args.state] if args.state else None
    sets = reach.reachable_sets(house, states, tol=tol, method=args.method)
    for s, P in sets.items():
        for k, vert in enumerate(P.vertices):
            for t, w in zip(house.space.labels, vert):
                if w != 0.0:
                    out.row(s, k, t, w)
        flags = []
        if not P.converged:
            flags.append("NOT converged")
        if P.approximate:
            flags.append("thinned")
        if P.snapped:
            flags.append("snapped to " + ",".join(map(str, P.snapped)))
        out.say(f"reach({s}): {len(P)} vertices, gap {P.gap:.3e}"
                + (f" [{'; '.join(flags)}]" if flags else ""))
    return 0 if all(P.converged for P in sets.values()) else 3


def cmd_potential(args, sc, game, out):
    house = _side_house(game, args.side)
    tol = _tol(args, sc, "check_tol", 1e-9)
    pot = reach.synthesize_potential(house, args.mode, tol, sc.solver.get("reach_tol", 1e-6))
    if pot is None:
        out.say(f"no {args.mode} potential found at this discretization")
        return 1
    for s, p in zip(house.space.labels, pot.values):
        out.row(s, p)
    out.say(f"{args.mode} acyclicity certificate with normalized margin {pot.margin:.6g}")
    return 0


def _counterexample_I(args):
    if args.I:
        return ActionSet.parse(args.I)
    if args.variant == "lacunary":
        return ActionSet.lacunary(max(12, (args.scan_depth or 0) + 2))
    return ActionSet.parse(VARIANTS[args.variant])


def cmd_counterexample(args, sc, game, out):
    I = _counterexample_I(args)
    if args.scan_depth:
        out.header = HEADERS["scan"]
        rows = counterexample.divergence_scan(args.scan_depth, I)
        for r in rows:
            out.row(r.n, r.lambda_hi, r.x_hi, r.lambda_lo, r.x_lo, r.gap)
        out.say(f"divergence scan with I={I}: gaps "
                + ", ".join(f"{r.gap:.4f}" for r in rows))
        return 0
    lams = _floats(args.lambdas, "--lambdas")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        for lam in lams:
            sol = counterexample.solve_reduced(I, lam)
            rec = sol.as_row()
            out.row(*(rec[k] for k in HEADERS["counterexample"]))
    out.say(f"reduced equations with I={I}, J={counterexample.FULL_J}")
    for w in {str(c.message) for c in caught}:
        out.say(f"warning: {w}")
    return 0


def _strategy(kind, side, w):
    return playbook.Strategy(kind, side, w=w if kind == "adapted" else None)


def _target(args, game, sc):
    if args.values:
        return read_values(args.values, game)
    if "adapted" not in (args.sigma, args.tau):
        return None
    args.method = "sweep"
    return _limit(game, args, sc, Output([])).values


def cmd_simulate(args, sc, game, out):
    w = _target(args, game, sc)
    seed = args.seed if args.seed is not None else int(sc.solver.get("seed", 0))
    sigma, tau = _strategy(args.sigma, 1, w), _strategy(args.tau, 2, w)
    res = playbook.simulate(game, sigma, tau, args.n, args.trials, seed, args.x1, args.y1)
    for k, r in enumerate(res.records):
        out.row(k, r.average, float(np.mean(r.step1)) if r.step1.size else 0.0,
                float(np.mean(r.step2)) if r.step2.size else 0.0, r.error)
    out.say(f"{sigma.name} vs {tau.name}, n={args.n}, {args.trials} trials, seed {seed}")
    out.say(f"mean average payoff {res.mean:.6f} +- {res.half_width:.6f} (95% normal interval)")
    if w is not None:
        target = w[game.house1.space.index(args.x1), game.house2.space.index(args.y1)]
        out.say(f"target w(x1, y1) = {target:.6f}")
    out.say("evidence against the sampled opponents only, not against every strategy")
    return 3 if len(res.failures) == len(res.records) else 0


def cmd_variation(args, sc, game, out):
    house = _side_house(game, args.side)
    seed = args.seed if args.seed is not None else int(sc.solver.get("seed", 0))
    res = playbook.variation_probe(house, args.state, args.horizon, args.mode, seed)
    steps = np.asarray(res.steps, dtype=float)
    t = np.arange(1, steps.size + 1)
    l1 = np.cumsum(steps) / t
    l2 = np.cumsum(steps ** 2)
    for k in range(steps.size):
        out.row(int(t[k]), steps[k], l1[k], l2[k])
    out.say(f"{args.mode} probe from {args.state}, horizon {args.horizon}: "
            f"L1 average {res.l1_average:.4e}, L2 sum {res.l2_sum:.4e}")
    out.say("a heuristic lower bound on the supremum over trajectories")
    return 0


COMMANDS = {
    "solve": cmd_solve, "sweep": cmd_sweep, "nstage": cmd_nstage, "limit": cmd_limit,
    "check": cmd_check, "reach": cmd_reach, "potential": cmd_potential,
    "counterexample": cmd_counterexample, "simulate": cmd_simulate,
    "variation": cmd_variation,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", nargs="?", help="scenario file")
    common.add_argument("--builder", help='catalog game, e.g. "mdp3 grid=64"; '
                        f"known: {', '.join(BUILDERS)}")
    common.add_argument("--csv", help="write the CSV table here instead of stdout")
    common.add_argument("--report", help="write the report here instead of stderr")
    common.add_argument("--tol", type=float, help="solver tolerance")

    p = argparse.ArgumentParser(prog="gambling-games", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="discounted value")
    s.add_argument("--lambda", dest="lam", type=float, required=True)

    s = sub.add_parser("sweep", parents=[common], help="discounted values along lambdas")
    s.add_argument("--lambdas", required=True, help="comma-separated discount weights")

    s = sub.add_parser("nstage", parents=[common], help="n-stage values")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--all", action="store_true", help="emit every stage up to n")

    s = sub.add_parser("limit", parents=[common], help="limit value candidate and its report")
    s.add_argument("--method", choices=("sweep", "mz-iteration"), default="sweep")
    s.add_argument("--variant", choices=("average", "alternate"), default="average")
    s.add_argument("--lambdas", help="comma-separated discount weights for the sweep")
    s.add_argument("--strict", action="store_true", help="exit 1 unless the candidate is accepted")

    s = sub.add_parser("check", parents=[common], help="structural and limit-value checks")
    s.add_argument("--props", required=True,
                   help="comma list from " + ", ".join(STRUCTURAL + charact.PROPERTIES))
    s.add_argument("--values", help="CSV with x,y,value to characterize "
                   "(default: the sweep limit candidate)")
    s.add_argument("--check-tol", dest="check_tol", type=float)
    s.add_argument("--lambdas", help="sweep discount weights when --values is absent")

    s = sub.add_parser("reach", parents=[common], help="reachable-set vertices")
    s.add_argument("--state", help="state label (default: every state)")
    s.add_argument("--side", type=int, choices=(1, 2), default=1)
    s.add_argument("--method", choices=("occupation", "doubling", "step"), default="occupation")
    s.add_argument("--reach-tol", dest="reach_tol", type=float)

    s = sub.add_parser("potential", parents=[common], help="synthesize an acyclicity potential")
    s.add_argument("--mode", choices=("weak", "strong"), default="weak")
    s.add_argument("--side", type=int, choices=(1, 2), default=1)
    s.add_argument("--check-tol", dest="check_tol", type=float)

    s = sub.add_parser("counterexample", parents=[common],
                       help="reduced equations of the oscillating example")
    s.add_argument("--variant", choices=tuple(VARIANTS), default="grid")
    s.add_argument("--I", help="explicit action set for Player 1, e.g. 'lacunary(10)'")
    s.add_argument("--scan-depth", dest="scan_depth", type=int,
                   help="run the divergence scan over lambda = 4^-2n, 4^(1-2n)")
    s.add_argument("--lambdas", default="1e-2,1e-4,1e-6,1e-8")

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo plays")
    kinds = ("adapted", "stay", "myopic", "uniform-random")
    s.add_argument("--sigma", choices=kinds, default="adapted")
    s.add_argument("--tau", choices=kinds, default="stay")
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int)
    s.add_argument("--x1", default=None)
    s.add_argument("--y1", default=None)
    s.add_argument("--values", help="CSV with the target function for adapted strategies")
    s.add_argument("--lambdas", help="sweep discount weights when --values is absent")

    s = sub.add_parser("variation", parents=[common], help="probe distribution-path variation")
    s.add_argument("--state", required=True)
    s.add_argument("--horizon", type=int, default=1000)
    s.add_argument("--side", type=int, choices=(1, 2), default=1)
    s.add_argument("--mode", choices=("greedy", "sampled"), default="greedy")
    s.add_argument("--seed", type=int)
    return p


def run_command(argv, stdout=None, stderr=None):
    """Run one command; returns the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = Output(HEADERS[args.command])
    try:
        if args.command == "counterexample" and not (args.scenario or args.builder):
            # the reduced equations need no explicit game
            sc, game = Scenario(), None
        else:
            sc, game = _game(args)
        if args.command == "simulate":
            labels1, labels2 = game.house1.space.labels, game.house2.space.labels
            args.x1 = labels1[0] if args.x1 is None else args.x1
            args.y1 = labels2[0] if args.y1 is None else args.y1
        code = COMMANDS[args.command](args, sc, game, out)
    except InputError as exc:
        print(f"input error: {exc}", file=stderr)
        return 2
    except (NumericalError, ResourceLimitError) as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return 3
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(out.csv_text())
    else:
        stdout.write(out.csv_text())
    report = "\n".join(out.lines) + "\n"
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report)
    else:
        stderr.write(report)
    return code


def main(argv=None):
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))
