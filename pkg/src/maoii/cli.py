"""Command-line entry points: scenario runner, verification, table export.

Subcommands
-----------
run     parse a scenario file, sweep population sizes and policies, write a
        CSV of mean empirical ages plus a JSON twin with the same numbers.
verify  run the cross-module consistency suite on a parameter grid and
        emit a pass/fail report.
table   print or export the index tables for one parameter point.

Exit codes: 0 success, 1 runtime failure, 2 configuration/parse failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from maoii.errors import ConfigError, MaoiiError, ParseError, ValidationError
from maoii.metrics import Metric
from maoii.scenarios import bundled_scenario_path
from maoii.sim import ClassSpec, SimConfig, run
from maoii.sources import SourceParams, make_params
from maoii.verification import DEFAULT_GRID, load_grid, run_verification
from maoii.whittle import build_table

DEFAULT_ALPHA = 0.2
DEFAULT_REPLICATIONS = 20


@dataclass(frozen=True)
class Scenario:
    """A parsed experiment description."""

    name: str
    class_params: tuple[SourceParams, ...]
    policies: tuple[str, ...]
    n_users_sweep: tuple[int, ...]
    alpha: float
    horizon: int
    warmup: int
    replications: int
    seed: int
    dynamics: str


def partition_users(n_users: int, n_classes: int) -> list[int]:
    """Equal split of the population, remainder assigned to the first class."""
    base = n_users // n_classes
    counts = [base] * n_classes
    counts[0] += n_users - base * n_classes
    return counts


def parse_scenario(path) -> Scenario:
    """Load and validate a scenario JSON file.

    Raises ParseError for malformed JSON or missing fields and
    ValidationError when a field violates its invariant (for example a
    class whose p and r break p + (N-1)r = 1).
    """
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read scenario file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON (line {exc.lineno}): {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: top level must be a JSON object")

    def need(key):
        if key not in raw:
            raise ParseError(f"{path}: missing required field {key!r}")
        return raw[key]

    classes_raw = need("classes")
    if not isinstance(classes_raw, list) or not classes_raw:
        raise ParseError(f"{path}: 'classes' must be a non-empty list")
    class_params = []
    for i, spec in enumerate(classes_raw):
        try:
            class_params.append(
                make_params(
                    p=spec.get("p"),
                    r=spec.get("r"),
                    num_states=spec["N"],
                    rho=spec["rho"],
                )
            )
        except KeyError as exc:
            raise ParseError(f"{path}: class {i} is missing field {exc}") from exc
        except MaoiiError as exc:
            raise ValidationError(f"{path}: class {i} invalid: {exc}") from exc

    horizon = int(need("horizon"))
    warmup = int(raw.get("warmup", horizon // 10))
    sweep = tuple(int(v) for v in need("n_users_sweep"))
    policies = tuple(need("policies"))
    try:
        scenario = Scenario(
            name=str(raw.get("name", Path(path).stem)),
            class_params=tuple(class_params),
            policies=policies,
            n_users_sweep=sweep,
            alpha=float(raw.get("alpha", DEFAULT_ALPHA)),
            horizon=horizon,
            warmup=warmup,
            replications=int(raw.get("replications", DEFAULT_REPLICATIONS)),
            seed=int(need("seed")),
            dynamics=str(raw.get("dynamics", "reduced")),
        )
        # Surface invariant violations now, not at run time.
        for n_users in scenario.n_users_sweep:
            _sim_config(scenario, n_users, scenario.policies[0], scenario.seed)
    except MaoiiError:
        raise
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return scenario


def _sim_config(scenario: Scenario, n_users: int, policy: str, seed: int) -> SimConfig:
    counts = partition_users(n_users, len(scenario.class_params))
    try:
        return SimConfig(
            classes=tuple(
                ClassSpec(pp, c) for pp, c in zip(scenario.class_params, counts)
            ),
            policy=policy,
            horizon=scenario.horizon,
            warmup=scenario.warmup,
            replications=scenario.replications,
            seed=seed,
            alpha=scenario.alpha,
            dynamics=scenario.dynamics,
        )
    except ConfigError as exc:
        raise ValidationError(str(exc)) from exc


CSV_COLUMNS = (
    "scenario", "policy", "n_users", "m_channels", "mean_cost", "ci95",
    "per_class_means", "seed",
)


def run_experiment(
    scenario: Scenario,
    out_dir,
    seed: int | None = None,
    policies: tuple[str, ...] | None = None,
    backend: str = "auto",
) -> tuple[Path, Path]:
    """Sweep (n_users, policy), write <name>.csv and its JSON twin.

    Rows are ordered by the sweep then by the policy list, and all floats
    are serialized with repr, so a rerun with the same file and seed is
    byte-identical.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = scenario.seed if seed is None else seed
    policies = scenario.policies if policies is None else policies
    rows = []
    for n_users in scenario.n_users_sweep:
        for policy in policies:
            result = run(_sim_config(scenario, n_users, policy, seed), backend=backend)
            rows.append(
                {
                    "scenario": scenario.name,
                    "policy": policy,
                    "n_users": result.n_users,
                    "m_channels": result.m_channels,
                    "mean_cost": result.mean_cost,
                    "ci95": result.ci95,
                    "per_class_means": result.per_class_means,
                    "per_class_ci95": result.per_class_ci95,
                    "seed": seed,
                    "dynamics": result.dynamics,
                    "backend": result.backend,
                    "audit": {
                        "scheduled_per_slot": result.audit.scheduled_per_slot,
                        "measured_slots": result.audit.measured_slots,
                        "violations": result.audit.violations,
                        "overflow_events": result.audit.overflow_events,
                        "total_scheduled": result.audit.total_scheduled,
                    },
                }
            )
    csv_path = out / f"{scenario.name}.csv"
    json_path = out / f"{scenario.name}.json"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row["scenario"],
                    row["policy"],
                    row["n_users"],
                    row["m_channels"],
                    repr(row["mean_cost"]),
                    repr(row["ci95"]),
                    ";".join(repr(v) for v in row["per_class_means"]),
                    row["seed"],
                ]
            )
    with open(json_path, "w") as fh:
        json.dump({"scenario": scenario.name, "rows": rows}, fh, indent=2)
        fh.write("\n")
    return csv_path, json_path


def _resolve_scenario_path(name_or_path: str):
    p = Path(name_or_path)
    if p.exists():
        return p
    bundled = bundled_scenario_path(name_or_path)
    try:
        if bundled.is_file():
            return bundled
    except OSError:
        pass
    raise ParseError(f"scenario file {name_or_path!r} not found")


def _parse_params_flag(text: str) -> SourceParams:
    fields = {}
    for item in text.split(","):
        if not item.strip():
            continue
        key, _, value = item.partition("=")
        fields[key.strip()] = value.strip()
    try:
        return make_params(
            p=float(fields["p"]) if "p" in fields else None,
            r=float(fields["r"]) if "r" in fields else None,
            num_states=int(fields["N"]),
            rho=float(fields["rho"]),
        )
    except KeyError as exc:
        raise ParseError(f"--params is missing field {exc}") from exc
    except ValueError as exc:
        raise ParseError(f"--params: {exc}") from exc


def _cmd_run(args) -> int:
    scenario = parse_scenario(_resolve_scenario_path(args.scenario))
    policies = tuple(args.policies.split(",")) if args.policies else None
    csv_path, json_path = run_experiment(
        scenario, args.out, seed=args.seed, policies=policies, backend=args.backend
    )
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _cmd_verify(args) -> int:
    grid = load_grid(args.grid) if args.grid else DEFAULT_GRID
    report = run_verification(grid, include_mdp=not args.skip_mdp)
    print(report.to_text())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "verification.json").write_text(report.to_json() + "\n")
        print(f"wrote {out / 'verification.json'}")
    return 0 if report.passed else 1


def _cmd_table(args) -> int:
    params = _parse_params_flag(args.params)
    table = build_table(params, Metric(args.metric), args.n_max, validate=True)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", f"W_{args.metric}"])
            for n in range(1, args.n_max + 1):
                writer.writerow([n, repr(table.value(n))])
        print(f"wrote {args.out}")
    else:
        print(f"# params: {params}")
        print(f"n,W_{args.metric}")
        for n in range(1, args.n_max + 1):
            print(f"{n},{table.value(n)!r}")
    if table.errata:
        print(f"# {len(table.errata)} entries replaced by oracle values", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maoii",
        description="Index-policy scheduling experiments for remote Markov source tracking",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario sweep and write CSV/JSON results")
    p_run.add_argument("--scenario", required=True,
                       help="scenario JSON path, or a bundled name like scenario1")
    p_run.add_argument("--out", default="results", help="output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_run.add_argument("--policies", default=None,
                       help="comma-separated policy subset, e.g. wip-maoii")
    p_run.add_argument("--backend", default="auto", choices=("auto", "compiled", "python"))

    p_ver = sub.add_parser("verify", help="run the cross-module consistency suite")
    p_ver.add_argument("--grid", default=None, help="JSON grid file (default: built-in grid)")
    p_ver.add_argument("--out", default=None, help="directory for verification.json")
    p_ver.add_argument("--skip-mdp", action="store_true",
                       help="skip the slower Bellman-solver checks")

    p_tab = sub.add_parser("table", help="print or export an index table")
    p_tab.add_argument("--metric", required=True, choices=("aoi", "maoii"))
    p_tab.add_argument("--params", required=True,
                       help="comma-separated fields, e.g. r=0.1,N=2,rho=1.0")
    p_tab.add_argument("--n-max", type=int, default=50)
    p_tab.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "verify": _cmd_verify, "table": _cmd_table}
    try:
        return handlers[args.command](args)
    except (ParseError, ValidationError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MaoiiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
