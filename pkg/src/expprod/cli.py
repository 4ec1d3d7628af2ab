"""Command-line front end: everything emits CSV or JSON for plotting.

Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence
(with JSON diagnostics on stdout).  Every file-writing run also writes a
manifest echoing the fully resolved configuration; timestamps live only in
the manifest, so data files are byte-identical across reruns at a fixed
seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import ncalg, orders, propagate, qmc, schemes
from .poly import frac_str

CONFIG_ERROR = 2
NONCONVERGENCE = 3


class ConfigError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_csv(path: str, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def write_manifest(out: str, command: str, config: dict) -> None:
    doc = {
        "command": command,
        "config": config,
        "written_at": datetime.now(timezone.utc).isoformat(),
    }
    Path(str(out) + ".manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def parse_stage_coeff(text: str) -> Fraction:
    """Coefficient grammar: 'x', 'x/2', '7x/24', '-x', '1/2', '0.75'."""
    t = text.strip().replace(" ", "")
    if "x" in t:
        num, _, den = t.partition("/")
        num = num.replace("x", "").replace("*", "")
        if num in ("", "+"):
            num = "1"
        elif num == "-":
            num = "-1"
        value = Fraction(num)
        if den:
            value /= Fraction(den)
        return value
    if "/" in t or "." not in t:
        return Fraction(t)
    return Fraction(float(t)).limit_denominator(10 ** 12)


def parse_stages(text: str) -> list[tuple[str, Fraction]]:
    out = []
    for item in text.split(","):
        slot, _, coeff = item.partition(":")
        slot = slot.strip()
        if not slot or not coeff:
            raise ConfigError(f"bad stage {item!r}; expected SLOT:coeff")
        out.append((slot, parse_stage_coeff(coeff)))
    return out


def parse_assignments(text: str) -> dict[str, float]:
    out = {}
    for item in text.split(","):
        name, _, value = item.partition("=")
        if not name or not value:
            raise ConfigError(f"bad assignment {item!r}; expected name=value")
        out[name.strip()] = float(Fraction(value) if "/" in value else value)
    return out


def parse_range(text: str) -> list[float]:
    """'start:stop:step' inclusive grid, or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad range {text!r}; expected start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError("range step must be positive")
        grid = []
        v = start
        while v <= stop + 1e-12:
            grid.append(round(v, 12))
            v += step
        return grid
    return [float(p) for p in text.split(",")]


def load_model(path: str) -> qmc.IsingModel:
    try:
        doc = json.loads(Path(path).read_text())
        return qmc.IsingModel.from_json(doc)
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot load model file {path}: {exc}") from exc


def get_scheme(name: str) -> schemes.Scheme:
    cat = schemes.catalog()
    if name not in cat:
        raise ConfigError(f"unknown scheme {name!r}; see `expprod scheme list`")
    return cat[name]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_bch(args) -> int:
    stages = parse_stages(args.stages)
    labels = tuple(sorted({s for s, _ in stages}))
    log = ncalg.product_log(stages, args.order, labels)
    combo = ncalg.lie_project(log)
    lines = []
    for degree in range(1, args.order + 1):
        part = combo.homogeneous(degree)
        lines.append(f"degree {degree}: {part.pretty()}")
    if args.format == "json":
        print(json.dumps(combo.to_json(), indent=2))
    else:
        print("\n".join(lines))
    if args.out:
        Path(args.out).write_text(json.dumps(combo.to_json(), indent=2) + "\n")
        write_manifest(args.out, "bch", {"stages": args.stages, "order": args.order})
    return 0


def cmd_scheme(args) -> int:
    cat = schemes.catalog()
    if args.action == "list":
        for name, sch in cat.items():
            sums = sch.slot_sums()
            print(f"{name:14s} slots={''.join(sch.slots)} stages={len(sch.stages)} "
                  f"order={sch.claimed_order} symmetric={sch.symmetric} "
                  f"negative={schemes.has_negative_coefficient(sch)}")
        return 0
    if not args.name:
        raise ConfigError("scheme show/flatten/check need a scheme name")
    sch = get_scheme(args.name)
    if args.action == "show":
        print(json.dumps(sch.to_json(), indent=2))
    elif args.action == "flatten":
        rows = []
        for st in sch.stages:
            if st.is_commutator():
                rows.append(("commutator", json.dumps(st.target.to_json()),
                             schemes.coeff_value(st.coeff)))
            else:
                rows.append((sch.slots[st.target], "", schemes.coeff_value(st.coeff)))
        for slot, extra, coeff in rows:
            print(f"{slot:10s} {_fmt(coeff)} {extra}")
    elif args.action == "check":
        m = args.order or sch.claimed_order + 1
        achieved = orders.verify_order(sch, m)
        print(json.dumps({"scheme": args.name, "claimed": sch.claimed_order,
                          "verified": achieved}))
        if achieved < sch.claimed_order:
            return NONCONVERGENCE
    if args.out:
        Path(args.out).write_text(json.dumps(sch.to_json(), indent=2) + "\n")
        write_manifest(args.out, "scheme", {"action": args.action, "name": args.name})
    return 0


def cmd_solve(args) -> int:
    conds = orders.order_conditions(args.pattern, args.order)
    fixed = parse_assignments(args.fix) if args.fix else {}
    if args.guess:
        guess = parse_assignments(args.guess)
    else:
        # deterministic default: alternate around the consistency value 1/k
        free = [p for p in conds.parameters if p not in fixed]
        guess = {p: 0.5 + 0.1 * i for i, p in enumerate(free)}
    report = orders.solve(conds, fixed=fixed, guess=guess)
    rational = orders.rationalize_solution(conds, report.solution) if report.converged else None
    doc = {
        "pattern": args.pattern, "order": args.order,
        "converged": report.converged, "iterations": report.iterations,
        "max_residual": report.max_residual,
        "solution": {p: report.solution[p] for p in conds.parameters},
    }
    if rational is not None:
        doc["solution_exact"] = {p: frac_str(v) for p, v in rational.items()}
    print(json.dumps(doc, indent=2))
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
        write_manifest(args.out, "solve", {"pattern": args.pattern, "order": args.order,
                                           "fix": args.fix, "guess": args.guess})
    return 0 if report.converged else NONCONVERGENCE


def cmd_family(args) -> int:
    grid = parse_range(args.p6)
    points = orders.ruth_family(grid)
    csv_text = orders.family_csv(points)
    if args.out:
        Path(args.out).write_text(csv_text, newline="\n")
        write_manifest(args.out, "family", {"p6": args.p6})
    else:
        sys.stdout.write(csv_text)
    return 0


_SPIN_GAMMA = 0.75


def cmd_converge(args) -> int:
    sch = get_scheme(args.scheme)
    if args.dt_list:
        dts = parse_range(args.dt_list)
    elif args.system == "driven":
        dts = [1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32]
    elif sch.claimed_order >= 6:
        dts = [2 ** (-k / 2) for k in range(0, 9)]
    else:
        period = propagate.precession_period(_SPIN_GAMMA)
        dts = [period * 2 ** -k for k in range(6, 13)]
    tf = args.t_final or (2.0 if sch.claimed_order >= 6 else 1.0)
    errors = []
    floors = []
    nstages = len(sch.stages)
    for dt in dts:
        steps = max(1, int(round(tf / dt)))
        if args.system == "driven":
            errors.append(propagate.driven_error(sch, dt, tf))
        else:
            errors.append(propagate.spin_error(sch, _SPIN_GAMMA, dt, tf))
        floors.append(max(1e-13, 2 * 2.2e-16 * nstages * steps))
    scale = 1.25 if args.system == "spin" else 1.0
    usable = [(dt, e) for dt, e, f in zip(dts, errors, floors)
              if e > f and dt * scale <= 1.0]
    doc: dict = {"scheme": args.scheme, "system": args.system,
                 "dt": dts, "error": errors}
    rows = list(zip(dts, errors))
    status = 0
    if len(usable) >= 2:
        slope, _ = propagate.error_slope([d for d, _ in usable], [e for _, e in usable],
                                         floor=0.0)
        doc["slope"] = slope
        doc["points_used"] = len(usable)
    else:
        doc["slope"] = None
        doc["diagnostics"] = "fewer than 2 points above the roundoff floor"
        status = NONCONVERGENCE
    print(json.dumps(doc))
    if args.out:
        write_csv(args.out, ["dt", "error"], rows)
        write_manifest(args.out, "converge", {"scheme": args.scheme, "system": args.system,
                                              "t_final": tf})
    return status


def cmd_precession(args) -> int:
    method = "perturbative" if args.scheme == "perturbative" else get_scheme(args.scheme)
    rows = propagate.run_precession(method, args.gamma, args.dt, args.steps,
                                    args.sample_every)
    if args.out:
        write_csv(args.out, ["t", "energy", "norm"], rows)
        write_manifest(args.out, "precession",
                       {"scheme": args.scheme, "gamma": args.gamma, "dt": args.dt,
                        "steps": args.steps, "sample_every": args.sample_every})
    else:
        for r in rows[:10]:
            print(",".join(_fmt(v) for v in r))
    return 0


def cmd_umeno(args) -> int:
    method = "euler" if args.scheme == "euler" else get_scheme(args.scheme)
    rows = propagate.run_umeno(method, args.dt, args.steps, args.sample_every)
    if args.out:
        write_csv(args.out, ["t", "energy", "q1", "q2"], rows)
        write_manifest(args.out, "umeno",
                       {"scheme": args.scheme, "dt": args.dt, "steps": args.steps,
                        "sample_every": args.sample_every})
    else:
        for r in rows[:10]:
            print(",".join(_fmt(v) for v in r))
    return 0


def cmd_timedep(args) -> int:
    sch = get_scheme(args.scheme)
    if "T" not in sch.slots:
        raise ConfigError("timedep needs a scheme with a T slot (timeordered1/2/4)")
    parts = propagate.driven_two_level()
    psi = propagate.QuantumState.up(2)
    rows = [(0.0, psi.vector[0].real, psi.vector[0].imag,
             psi.vector[1].real, psi.vector[1].imag, psi.norm)]
    t = args.t0
    for k in range(1, args.steps + 1):
        psi = propagate.timeordered_step(sch, parts, t, args.dt, psi)
        t += args.dt
        if k % args.sample_every == 0 or k == args.steps:
            rows.append((t, psi.vector[0].real, psi.vector[0].imag,
                         psi.vector[1].real, psi.vector[1].imag, psi.norm))
    if args.out:
        write_csv(args.out, ["t", "re0", "im0", "re1", "im1", "norm"], rows)
        write_manifest(args.out, "timedep",
                       {"scheme": args.scheme, "dt": args.dt, "steps": args.steps,
                        "t0": args.t0, "sample_every": args.sample_every})
    else:
        for r in rows[:10]:
            print(",".join(_fmt(v) for v in r))
    return 0


def cmd_qmc(args) -> int:
    model = load_model(args.model)
    sweeps = int(float(args.sweeps))
    therm = int(float(args.therm)) if args.therm is not None else sweeps // 5
    stats = qmc.metropolis_run(model, args.n, sweeps, therm, args.seed)
    doc = stats.to_json()
    print(json.dumps(doc, indent=2, sort_keys=True))
    if args.out:
        Path(str(args.out) + ".json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        traces = qmc.run_traces(model, args.n, sweeps, therm, args.seed)
        names = ["bond_zz", "trotter_corr", "diag_energy", "sigma_x"]
        rows = list(zip(range(therm, sweeps), *(traces[nm] for nm in names)))
        write_csv(str(args.out) + ".traces.csv", ["sweep"] + names,
                  [(int(r[0]),) + tuple(float(v) for v in r[1:]) for r in rows])
        write_manifest(args.out, "qmc",
                       {"model": args.model, "n": args.n, "sweeps": sweeps,
                        "therm": therm, "seed": args.seed})
    return 0


def cmd_anneal(args) -> int:
    model = load_model(args.model)
    if args.schedule:
        parts = args.schedule.split(":")
        if len(parts) != 3:
            raise ConfigError("schedule must be g_start:g_end:stages")
        sched = qmc.anneal_schedule(float(parts[0]), float(parts[1]), int(parts[2]))
    else:
        sched = qmc.anneal_schedule()
    result = qmc.anneal(model, args.n, sched, args.sweeps, args.seed)
    doc = {
        "energy": result.energy,
        "configuration": [int(s) for s in result.configuration],
        "gamma_floor_hit": result.gamma_floor_hit,
        "stage_energies": result.stage_energies,
        "seed": result.seed,
        "schedule": sched,
    }
    print(json.dumps(doc, indent=2))
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
        write_manifest(args.out, "anneal",
                       {"model": args.model, "n": args.n, "schedule": args.schedule,
                        "sweeps": args.sweeps, "seed": args.seed})
    return 0


def cmd_extrapolate(args) -> int:
    model = load_model(args.model)
    n_list = [int(v) for v in args.n_list.split(",")]
    sweeps = int(float(args.sweeps))
    result = qmc.trotter_extrapolate(model, n_list, sweeps, args.seed,
                                     observable=args.observable)
    doc = {
        "c0": result.c0, "c1": result.c1, "c2": result.c2,
        "c0_std_error": result.c0_std_error,
        "dominant_power": result.dominant_power,
        "n_list": result.n_list, "values": result.values,
        "errors": result.errors, "residuals": result.residuals,
        "observable": args.observable,
    }
    print(json.dumps(doc, indent=2))
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
        write_manifest(args.out, "extrapolate",
                       {"model": args.model, "n_list": args.n_list,
                        "sweeps": sweeps, "seed": args.seed,
                        "observable": args.observable})
    return 0


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expprod",
        description="Exponential product formulas: schemes, order conditions, demos, QMC")
    parser.add_argument("--config", help="JSON file with argument defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output path (data file; manifest written alongside)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("bch", help="Lie-projected correction terms of a stage product")
    p.add_argument("--stages", required=True, help="e.g. A:x/2,B:x,A:x/2")
    p.add_argument("--order", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_bch)

    p = sub.add_parser("scheme", help="catalog queries")
    p.add_argument("action", choices=["list", "show", "flatten", "check"])
    p.add_argument("name", nargs="?")
    p.add_argument("--order", type=int)
    common(p)
    p.set_defaults(func=cmd_scheme)

    p = sub.add_parser("solve", help="solve order conditions")
    p.add_argument("--pattern", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--fix", help="e.g. p6=1")
    p.add_argument("--guess", help="e.g. p1=0.3,p2=0.7,...")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("family", help="third-order solution family vs p6")
    p.add_argument("--p6", required=True, help="grid start:stop:step or comma list")
    common(p)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("converge", help="error-vs-dt sweep with fitted slope")
    p.add_argument("--scheme", required=True)
    p.add_argument("--system", choices=["spin", "driven"], default="spin")
    p.add_argument("--dt-list", help="comma list or start:stop:step")
    p.add_argument("--t-final", type=float)
    common(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("precession", help="spin precession energy run")
    p.add_argument("--scheme", default="trotter", help="scheme name or 'perturbative'")
    p.add_argument("--gamma", type=float, default=0.75)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--steps", type=int, default=1_000_000)
    p.add_argument("--sample-every", type=int, default=1000)
    common(p)
    p.set_defaults(func=cmd_precession)

    p = sub.add_parser("umeno", help="chaotic two-dof energy run")
    p.add_argument("--scheme", default="trotter", help="scheme name or 'euler'")
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--steps", type=int, default=1_000_000)
    p.add_argument("--sample-every", type=int, default=1000)
    common(p)
    p.set_defaults(func=cmd_umeno)

    p = sub.add_parser("timedep", help="driven two-level trajectory")
    p.add_argument("--scheme", default="timeordered2")
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--sample-every", type=int, default=10)
    common(p)
    p.set_defaults(func=cmd_timedep)

    p = sub.add_parser("qmc", help="world-line Metropolis run")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sweeps", required=True)
    p.add_argument("--therm")
    common(p)
    p.set_defaults(func=cmd_qmc)

    p = sub.add_parser("anneal", help="quantum annealing on the mapped system")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--schedule", help="g_start:g_end:stages")
    p.add_argument("--sweeps", type=int, default=60, help="sweeps per stage")
    common(p)
    p.set_defaults(func=cmd_anneal)

    p = sub.add_parser("extrapolate", help="Trotter extrapolation n -> infinity")
    p.add_argument("--model", required=True)
    p.add_argument("--n-list", required=True, help="comma list, e.g. 4,8,16")
    p.add_argument("--sweeps", default="0", help="0 = exact enumeration")
    p.add_argument("--observable", choices=["bond_zz", "sigma_x", "diag_energy"],
                   default="bond_zz")
    common(p)
    p.set_defaults(func=cmd_extrapolate)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Fold --config file values in as defaults (CLI flags win)."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        raise ConfigError("--config needs a file path")
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    rest = argv[:idx] + argv[idx + 2:]
    if not rest:
        raise ConfigError("config file given but no subcommand")
    command = rest[0]
    known = {"experiment", "command"}
    sub_actions = next(a for a in parser._actions
                       if isinstance(a, argparse._SubParsersAction))
    subparser = sub_actions.choices.get(command)
    if subparser is None:
        raise ConfigError(f"unknown subcommand {command!r}")
    valid = {a.dest for a in subparser._actions}
    injected = []
    for key, value in doc.items():
        if key in known:
            continue
        dest = key.replace("-", "_")
        if dest not in valid:
            raise ConfigError(f"unknown config key {key!r} for {command}")
        flag = "--" + key.replace("_", "-")
        if flag not in rest and value is not None:
            injected.extend([flag, str(value)])
    return rest[:1] + injected + rest[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return CONFIG_ERROR
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
