"""``arcforge`` command line.

Every subcommand writes a JSON run report (stdout or ``--out``) and exits
0 when all checks in the report pass, 1 when one fails and 2 when an input
file cannot be read or parsed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import arcs, canon1d, families, synthesis
from .measures import DiscreteMeasure, SupportTooLarge, prokhorov_exact, prokhorov_upper, pushforward
from .relu_net import ReluNetwork, eval_net
from .rng import SplitMix64
from .suites import random_arc_pair, random_delta_pair

TOL = 1e-9


class MalformedInput(Exception):
    pass


@dataclass
class RunReport:
    command: str
    inputs_digest: str
    outputs: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "outputs": _finite(self.outputs),
            "checks": dict(self.checks),
            "passed": self.passed,
        }


def _finite(obj):
    """Replace non-finite floats by None so reports stay valid JSON."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _finite(obj.tolist())
    return obj


def _digest(*parts: str) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode())
        h.update(b"\0")
    return h.hexdigest()


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from exc


def _load(path: str, cls):
    text = _read(path)
    try:
        return cls.from_json(text), text
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedInput(f"{path}: {exc}") from exc


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# -- subcommands --------------------------------------------------------------

def cmd_synth(args) -> RunReport:
    mu, mu_text = _load(args.measure, DiscreteMeasure)
    arc, arc_text = _load(args.arc, arcs.StandardArc)
    report = RunReport("synth", _digest(mu_text, arc_text))
    try:
        result = synthesis.synthesize_arc_transport(mu, arc)
    except ValueError as exc:
        report.outputs["error"] = str(exc)
        report.checks["synthesized"] = False
        return report
    ver = synthesis.verify_transport(mu, arc, result, TOL)
    report.outputs.update(network=result.net.to_dict(), axis=result.axis, sign=result.sign, **ver)
    _transport_checks(report, ver)
    if args.csv:
        Path(args.csv).write_text(arcs.vertices_csv(arc))
    return report


def _transport_checks(report: RunReport, ver: dict) -> None:
    report.checks["delta_positive"] = ver["delta"] > 0
    report.checks["delta_distributed"] = bool(ver["delta_distributed"])
    report.checks["support_on_arc"] = ver["max_support_deviation"] < TOL
    report.checks["scales_recovered"] = ver["scale_error"] < TOL


def cmd_verify(args) -> RunReport:
    mu, mu_text = _load(args.measure, DiscreteMeasure)
    arc, arc_text = _load(args.arc, arcs.StandardArc)
    if args.net is None:
        report = cmd_synth(argparse.Namespace(measure=args.measure, arc=args.arc, csv=None))
        report.command = "verify"
        report.outputs.pop("network", None)
        return report
    net, net_text = _load(args.net, ReluNetwork)
    report = RunReport("verify", _digest(mu_text, arc_text, net_text))
    if net.d != mu.d:
        raise MalformedInput(f"network acts on R^{net.d}, measure lives in R^{mu.d}")
    out = pushforward(mu, net)
    deviation = float(np.max(arcs.distance_to_arc(out.points, arc)))
    masses = arcs.segment_masses(out, arc, TOL)
    delta = float(masses.min())
    report.outputs.update(delta=delta, segment_masses=masses, max_support_deviation=deviation)
    report.checks["delta_positive"] = delta > 0
    report.checks["support_on_arc"] = deviation < TOL
    try:
        rec = arcs.recover_arc(out, arc.m, delta, TOL)
        err = float(np.max(np.abs(rec.scales - arc.scales)))
        report.outputs.update(recovered_scales=rec.scales, scale_error=err,
                              arc_error=arcs.arc_metric(rec, arc))
        report.checks["scales_recovered"] = err < TOL
    except ValueError as exc:
        report.outputs["recover_error"] = str(exc)
        report.checks["scales_recovered"] = False
    return report


def cmd_canon(args) -> RunReport:
    net, text = _load(args.net, ReluNetwork)
    if net.d != 1:
        raise MalformedInput(f"canon needs a 1-D network, got d={net.d}")
    report = RunReport("canon", _digest(text))
    form = canon1d.classify(net)
    params = canon1d.to_three_layer(form)
    grid = canon1d.verification_grid(form, args.verify_grid)
    direct = eval_net(net, grid[:, None])[:, 0]
    three = eval_net(params.network(), grid[:, None])[:, 0]
    form_err = float(np.max(np.abs(form(grid) - direct)))
    three_err = float(np.max(np.abs(three - form(grid))))
    report.outputs.update(form=canon1d.form_to_dict(form), three_layer=list(params.as_tuple()),
                          grid_points=args.verify_grid, form_error=form_err, three_layer_error=three_err)
    report.checks["form_matches_network"] = form_err <= TOL
    report.checks["three_layer_matches_form"] = three_err <= TOL
    return report


def cmd_prokhorov(args) -> RunReport:
    mu, a = _load(args.mu, DiscreteMeasure)
    nu, b = _load(args.nu, DiscreteMeasure)
    if mu.d != nu.d:
        raise MalformedInput(f"measures live in R^{mu.d} and R^{nu.d}")
    report = RunReport("prokhorov", _digest(a, b))
    try:
        exact = prokhorov_exact(mu, nu)
        report.outputs["d_p"] = exact
        report.checks["in_unit_interval"] = 0.0 <= exact <= 1.0
    except SupportTooLarge as exc:
        if not args.upper:
            raise MalformedInput(str(exc)) from exc
        exact = None
        report.outputs["exact_skipped"] = str(exc)
    if args.upper:
        up = prokhorov_upper(mu, nu)
        report.outputs["d_p_upper"] = up
        if exact is not None:
            report.checks["upper_dominates"] = up >= exact - TOL
    return report


def cmd_gamma(args) -> RunReport:
    report = RunReport("gamma", _digest(repr(args.t), str(args.depth)))
    seq = families.gamma(args.t, args.depth)
    report.outputs.update(t=args.t, depth=args.depth, sequence=seq)
    expected = 0 if args.t < 2 else int(math.floor(args.t))
    report.checks["length"] = len(seq) == expected
    report.checks["finite"] = bool(np.all(np.isfinite(seq)))
    if args.decode is not None:
        try:
            net = families.decode_network(seq, args.decode)
            report.outputs["decoded"] = net.to_dict()
        except ValueError as exc:
            report.outputs["decoded"] = None
            report.outputs["decode_rejected"] = str(exc)
    return report


def cmd_walk(args) -> RunReport:
    mu, mu_text = _load(args.measure, DiscreteMeasure)
    loaded = [_load(p, ReluNetwork) for p in args.nets]
    nets = [n for n, _ in loaded]
    if any(n.d != mu.d for n in nets):
        raise MalformedInput("networks and measure have different dimensions")
    report = RunReport("walk", _digest(mu_text, *(t for _, t in loaded), repr(args.t)))
    if args.t < 0:
        raise MalformedInput("t must be non-negative")
    if len(nets) == 1:
        fam = families.SingleFunctionFamily(nets[0], mu)
        mu_t = fam(args.t)
        image = pushforward(mu_t, nets[0])
        report.outputs["measure"] = mu_t.to_dict()
        report.outputs["image_parameter"] = args.t + 1
        report.checks["invariance"] = _same(image, fam(args.t + 1))
        return report
    fam = families.WalkFamily(nets, mu)
    mu_t = fam(args.t)
    report.outputs["measure"] = mu_t.to_dict()
    report.outputs["vertices"] = [families.walk_vertex(int(args.t), len(nets)),
                                  families.walk_vertex(int(args.t) + 1, len(nets))]
    params = []
    for i, f in enumerate(nets):
        t2 = fam.image_parameter(args.t, i)
        params.append(t2)
        report.checks[f"invariance_f{i}"] = _same(pushforward(mu_t, f), fam(t2))
    report.outputs["image_parameters"] = params
    return report


def _same(mu: DiscreteMeasure, nu: DiscreteMeasure) -> bool:
    if len(mu) + len(nu) <= 20:
        return prokhorov_exact(mu, nu) == 0.0
    return mu == nu


def cmd_lipschitz(args) -> RunReport:
    report = RunReport("lipschitz", _digest(str(args.seed), str(args.pairs), str(args.arc_pairs)))
    rng = SplitMix64(args.seed)
    measure_rows = []
    for k in range(args.pairs):
        p = random_delta_pair(rng)
        measure_rows.append((k, p.m, p.delta, p.d_p, p.d_ca, p.bound))
    arc_rows = []
    for k in range(args.arc_pairs):
        a1, a2 = random_arc_pair(rng)
        arc_rows.append((k, a1.m, arcs.arc_metric(a1, a2),
                       float(np.max(np.abs(a1.scales - a2.scales)))))
    bad_measure = sum(r[4] > r[5] + 1e-12 for r in measure_rows)
    bad_arc = sum(r[3] > 2 * r[2] + 1e-12 for r in arc_rows)
    report.outputs.update(seed=args.seed, violations_measure_to_arc=bad_measure, violations_arc_to_scale=bad_arc)
    if args.csv:
        Path(args.csv).write_text(
            _rows_csv(["pair", "m", "delta", "d_p", "d_ca", "bound"], measure_rows)
            + "\n" + _rows_csv(["pair", "m", "d_ca", "scale_diff"], arc_rows))
    else:
        report.outputs["measure_to_arc"] = [dict(zip(("pair", "m", "delta", "d_p", "d_ca", "bound"), r))
                                            for r in measure_rows]
        report.outputs["arc_to_scale"] = [dict(zip(("pair", "m", "d_ca", "scale_diff"), r))
                                          for r in arc_rows]
    report.checks["measure_to_arc_bound"] = bad_measure == 0
    report.checks["arc_to_scale_bound"] = bad_arc == 0
    return report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="arcforge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        s = sub.add_parser(name, help=help)
        s.add_argument("--out", help="write the JSON report here instead of stdout")
        s.set_defaults(fn=fn)
        return s

    s = add("synth", cmd_synth, "build a transport network onto a standard arc")
    s.add_argument("--measure", required=True)
    s.add_argument("--arc", required=True)
    s.add_argument("--csv", help="also write the arc vertices as CSV")

    s = add("verify", cmd_verify, "check that a network transports a measure onto an arc")
    s.add_argument("--measure", required=True)
    s.add_argument("--arc", required=True)
    s.add_argument("--net", help="network to check; synthesised when omitted")

    s = add("canon", cmd_canon, "normal form of a 1-D network")
    s.add_argument("--net", required=True)
    s.add_argument("--verify-grid", type=int, default=10_000)

    s = add("prokhorov", cmd_prokhorov, "Prokhorov distance between two measures")
    s.add_argument("--mu", required=True)
    s.add_argument("--nu", required=True)
    s.add_argument("--upper", action="store_true", help="also report the coupling upper bound")

    s = add("gamma", cmd_gamma, "evaluate the space-filling parametrisation")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--depth", type=int, default=8)
    s.add_argument("--decode", type=int, metavar="D", help="decode the point as a network on R^D")

    s = add("walk", cmd_walk, "evaluate a walk-interpolated invariant family")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--nets", nargs="+", required=True)
    s.add_argument("--measure", required=True)

    s = add("lipschitz", cmd_lipschitz, "sample the arc Lipschitz inequalities")
    s.add_argument("--pairs", type=int, default=200)
    s.add_argument("--arc-pairs", type=int, default=500)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--csv", help="write the scatter rows as CSV here")
    return p


def run(argv: list[str] | None = None) -> tuple[int, RunReport | None]:
    args = build_parser().parse_args(argv)
    if getattr(args, "nets", None) is not None and not 1 <= len(args.nets) <= 2:
        print("arcforge: walk takes one or two networks", file=sys.stderr)
        return 2, None
    try:
        report = args.fn(args)
    except MalformedInput as exc:
        print(f"arcforge: {exc}", file=sys.stderr)
        return 2, None
    text = json.dumps(report.to_dict(), indent=2, allow_nan=False)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return (0 if report.passed else 1), report


def main(argv: list[str] | None = None) -> int:
    try:
        code, _ = run(argv)
    except SystemExit as exc:  # argparse usage errors
        return 2 if exc.code else 0
    return code


if __name__ == "__main__":
    sys.exit(main())
