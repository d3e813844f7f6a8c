"""Command-line front end.

Metric specifications come in as inline JSON or a path to a JSON file; all
numerical work is delegated to the library modules, the CLI only parses,
dispatches and formats.  Identical commands (including seeds) produce
byte-identical output.

Exit codes: 0 success, 1 domain error (bad spec, bad parameters),
2 check failure under --strict.
"""

import json
import sys
from pathlib import Path

import click

from . import flow as flow_mod
from . import fuzzing, invariants, models
from ._util import fmt_float
from .errors import RicciLabError

BOUNDARY_TOL = 1e-9


class CheckFailure(Exception):
    pass


def _load_metric(spec_arg):
    text = spec_arg.strip()
    if not text.startswith("{"):
        text = Path(spec_arg).read_text()
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RicciLabError(f"malformed metric spec JSON: {exc}") from exc
    return models.from_spec(spec)


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _report_pretty(rep):
    lines = [f"metric: {rep.kind} {rep.params}"]
    for name in rep.CSV_FIELDS[1:]:
        val = getattr(rep, name)
        lines.append(f"  {name:18s} {fmt_float(val, pretty=True) if val is not None else 'undefined'}")
    lines.append(f"  beta defined        {rep.beta_defined}")
    lines.append(f"  positive-class flags: scalar>0 {rep.y1_positive_scalar}, "
                 f"sigma2-violation {rep.y2_violation}")
    return "\n".join(lines)


def beta_regime(beta):
    if beta is None:
        return "undefined (total sigma2 <= 0)"
    if abs(beta - 4.0) <= BOUNDARY_TOL:
        return "boundary beta = 4"
    if abs(beta - 8.0) <= BOUNDARY_TOL:
        return "boundary beta = 8"
    if beta < 4.0:
        return "beta < 4"
    if beta < 8.0:
        return "4 <= beta < 8"
    return "beta >= 8"


@click.group()
def main():
    """Numerical laboratory for four-dimensional curvature invariants."""


_metric_opt = click.option("--metric", "metric_spec", required=True,
                           help="Inline JSON metric spec or path to a JSON file.")
_format_opt = click.option("--format", "fmt", type=click.Choice(["json", "csv", "pretty"]),
                           default="json", show_default=True)
_out_opt = click.option("--out", default=None, help="Write output to this path.")


@main.command(name="invariants")
@_metric_opt
@_format_opt
@_out_opt
@click.option("--richardson/--no-richardson", default=False,
              help="Estimate finite-difference convergence on chart metrics.")
def invariants_cmd(metric_spec, fmt, out, richardson):
    """Global invariant report for a metric."""
    model = _load_metric(metric_spec)
    rep = invariants.global_report(model, richardson=richardson)
    if fmt == "json":
        _emit(rep.to_json(indent=2), out)
    elif fmt == "csv":
        header = ",".join(rep.CSV_FIELDS)
        row = ",".join(fmt_float(v) if isinstance(v, float) else str(v)
                       for v in rep.to_csv_row())
        _emit(header + "\n" + row + "\n", out)
    else:
        _emit(_report_pretty(rep), out)



@main.command()
@_metric_opt
@_format_opt
@_out_opt
def beta(metric_spec, fmt, out):
    """Conformal ratio of total Weyl energy to total sigma2, with its regime."""
    model = _load_metric(metric_spec)
    rep = invariants.global_report(model)
    payload = {
        "beta": rep.beta,
        "regime": beta_regime(rep.beta),
        "int_w2": rep.int_w2,
        "int_sigma2": rep.int_sigma2,
        "chi": rep.chi,
        "tau": rep.tau,
    }
    if fmt == "pretty":
        val = "undefined" if rep.beta is None else fmt_float(rep.beta, pretty=True)
        _emit(f"beta = {val}\nregime: {payload['regime']}", out)
    else:
        _emit(json.dumps(payload, indent=2), out)


@main.command(name="flow")
@_metric_opt
@_out_opt
@click.option("--dt", type=float, default=1e-3, show_default=True)
@click.option("--t-max", type=float, default=0.4, show_default=True)
@click.option("--normalized/--unnormalized", default=False)
@click.option("--monitor-a", type=float, default=None,
              help="Declared upper bound for the average scalar curvature.")
@click.option("--monitor-b", type=float, default=None,
              help="Declared Yamabe lower bound.")
@click.option("--out-monitor", default=None, help="Path for the monitor JSON.")
def flow_cmd(metric_spec, out, dt, t_max, normalized, monitor_a, monitor_b, out_monitor):
    """Integrate the reduced Ricci flow; emit the trace CSV (+ optional
    pinching monitor JSON when both bounds are declared)."""
    model = _load_metric(metric_spec)
    state = flow_mod.FlowState.from_model(model)
    cfg = flow_mod.FlowConfig(dt=dt, t_max=t_max, normalized=normalized)
    trace = flow_mod.integrate_flow(state, cfg)

    residuals = {}
    if len(trace.times) >= 3:
        n = len(trace.times)
        for name, row in {**flow_mod.pointwise_evolution_check(trace),
                          **flow_mod.integral_evolution_check(trace)}.items():
            residuals[name] = row.aligned_residual(n)
    csv_text = trace.to_csv(residuals)

    monitor_json = None
    if monitor_a is not None and monitor_b is not None:
        mon = flow_mod.g2_monitor(trace, monitor_a, monitor_b)
        monitor_json = flow_mod.monitor_to_json(mon, indent=2)

    _emit(csv_text, out)
    if monitor_json is not None:
        if out_monitor:
            Path(out_monitor).write_text(monitor_json)
        elif out:
            Path(str(out) + ".monitor.json").write_text(monitor_json)
        else:
            click.echo("# monitor " + json.dumps(json.loads(monitor_json)))


@main.command()
@_format_opt
@_out_opt
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--samples", type=int, default=100000, show_default=True)
@click.option("--scale", type=float, default=1.0, show_default=True)
@click.option("--top-k", type=int, default=5, show_default=True)
@click.option("--strict", is_flag=True, default=False)
def fuzz(fmt, out, seed, samples, scale, top_k, strict):
    """Randomized campaigns over the pointwise algebraic inequalities."""
    cfg = fuzzing.FuzzConfig(seed=seed, samples=samples, scale=scale,
                             report_top_k=top_k)
    rep = fuzzing.run_campaign(cfg)
    if fmt == "csv":
        lines = ["inequality,index,margin,normalized_margin"]
        for name, res in rep.results.items():
            for w in res.witnesses:
                lines.append(f"{name},{w['index']},{fmt_float(w['margin'])},"
                             f"{fmt_float(w['normalized_margin'])}")
        _emit("\n".join(lines) + "\n", out)
    elif fmt == "pretty":
        lines = [f"seed={seed} samples={samples} scale={scale} backend={rep.backend}"]
        for name, res in rep.results.items():
            lines.append(f"  {name:15s} min normalized margin "
                         f"{fmt_float(res.min_margin_normalized, pretty=True)} "
                         f"{'PASS' if res.passed else 'FAIL'}")
        _emit("\n".join(lines), out)
    else:
        _emit(rep.to_json(indent=2), out)
    if strict and not rep.passed:
        raise CheckFailure("inequality violations found")


@main.command(name="conformal-check")
@_out_opt
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--factors", type=int, default=5, show_default=True)
@click.option("--amplitude", type=float, default=0.25, show_default=True)
@click.option("--resolution", type=int, default=12, show_default=True)
@click.option("--radius", type=float, default=1.0, show_default=True)
@click.option("--tol", type=float, default=1e-3, show_default=True)
@click.option("--strict", is_flag=True, default=False)
def conformal_check(out, seed, factors, amplitude, resolution, radius, tol, strict):
    """Conformal-invariance suite on the sphere chart: total Weyl energy,
    total sigma2 and their ratio must be unchanged under seeded conformal
    deformations, up to quadrature tolerance."""
    result = invariants.conformal_invariance_check(seed, factors, amplitude,
                                                   resolution, radius, tol)
    _emit(json.dumps(result, indent=2), out)
    if strict and not result["passed"]:
        raise CheckFailure("conformal invariance violated beyond tolerance")


@main.command()
@_metric_opt
@_format_opt
@_out_opt
@click.option("--mu-plus", type=float, default=None,
              help="Caller-supplied spectral constant for the optional check.")
def pinch(metric_spec, fmt, out, mu_plus):
    """Pinching record: predicted Weyl splitting and Yamabe bound near
    beta = 4, plus the extremal-representative inequalities."""
    model = _load_metric(metric_spec)
    record = invariants.pinch_suite(model, mu_plus=mu_plus)
    if fmt == "pretty":
        lines = [f"beta = {fmt_float(record['beta'], pretty=True)}  ({record['regime']})",
                 f"epsilon = {fmt_float(record['epsilon'], pretty=True)}",
                 f"topology match (chi=3, tau=1): {record['topology_match']}"]
        _emit("\n".join(lines), out)
    else:
        _emit(json.dumps(record, indent=2), out)


def entrypoint(argv=None):
    try:
        main.main(args=argv, standalone_mode=False)
        return 0
    except CheckFailure as exc:
        click.echo(f"check failed: {exc}", err=True)
        return 2
    except (RicciLabError, FileNotFoundError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        return 1


if __name__ == "__main__":
    sys.exit(entrypoint())
