"""Batch command-line frontend.

Subcommands run the library end to end and print machine-readable reports:
JSON on stdout (sorted keys, so identical command + seed is byte-identical),
CSV where a table is the natural shape (`gates`, or anywhere via --csv).
Exit codes: 0 success, 2 usage/configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import heston as hs
from .circuits import to_text
from .mitigation import (
    NoiseModel,
    good_fraction,
    mitigated_good_probability,
    sample_noisy,
)
from .problems import sin2_derivative_bound, sin2_problem
from .qae import MlaeSchedule, default_schedule, grover_power, mlae_estimate, oracle_calls
from .quadrature import (
    BASE_RULES,
    RULE_INPUTS,
    RULES,
    combine_estimates,
    error_bound,
    exact_sin2_integral,
)
from .simulator import NumericalError, good_probability, sample, simulate
from .state_prep import FlaggedOperator
from .transpile import ALL_TO_ALL, LINEAR_CHAIN, count_cnots, lower

_BOUND_DERIV_ORDER = {"left": 1, "right": 1, "midpoint": 2, "trapezoid": 2, "simpson": 4}
_MAX_NOISY_N = 2  # noisy sampling caches unitaries; keep the demo circuits small


def _emit(report: dict) -> None:
    print(json.dumps(report, sort_keys=True, indent=2))


def _write(path: str, text: str) -> None:
    Path(path).write_text(text)


def _noise_from_args(args) -> NoiseModel | None:
    wants = args.noise or args.mitigate
    if not wants:
        return None
    return NoiseModel(
        cnot_error=args.cnot_error,
        flip_0_to_1=args.flip01,
        flip_1_to_0=args.flip10,
    )


def _power_hits(op: FlaggedOperator, k: int, shots: int, optimized: bool,
                noise: NoiseModel | None, mitigate: bool, seed) -> dict:
    """Good-state hit count for one scheduled power (fractional when exact
    probabilities or mitigated estimates are used)."""
    circuit = grover_power(op, k, optimized=optimized)
    if shots == 0:
        p = good_probability(simulate(circuit), op.flags)
        return {"k": k, "shots": 1, "hits": p, "mode": "exact"}
    if noise is None:
        state = simulate(circuit)
        hits = sample(state, op.flags, shots, seed).good_hits
        return {"k": k, "shots": shots, "hits": float(hits), "mode": "sampled"}
    lowered = lower(circuit, ALL_TO_ALL)
    if mitigate:
        res = mitigated_good_probability(lowered, op.flags, noise, shots, seed)
        p = min(1.0, max(0.0, res.mitigated))
        return {
            "k": k, "shots": shots, "hits": p * shots, "mode": "mitigated",
            "raw_fraction": res.raw, "folded": list(res.folded.probabilities),
        }
    counts = sample_noisy(lowered, shots, noise, seed)
    return {
        "k": k, "shots": shots,
        "hits": good_fraction(counts, op.flags) * shots, "mode": "noisy",
    }


def _seed_for(base: int, rule: str, k: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([base, RULES.index(rule), k])


def cmd_integrate(args) -> int:
    if args.shots == 0 and (args.noise or args.mitigate):
        raise ValueError("--shots 0 is the exact mode; it cannot be combined with noise")
    noise = _noise_from_args(args)
    if noise is not None and args.n > _MAX_NOISY_N:
        raise ValueError(f"noisy runs support n <= {_MAX_NOISY_N}")
    runs = {}
    for rule in RULE_INPUTS[args.rule]:
        problem = sin2_problem(args.n, args.y, rule)
        powers = default_schedule(args.kmax, max(args.shots, 1)).powers
        rows = [
            _power_hits(problem.operator, k, args.shots, not args.unoptimized,
                        noise, args.mitigate, _seed_for(args.seed, rule, k))
            for k in powers
        ]
        schedule = MlaeSchedule(powers, tuple(r["shots"] for r in rows))
        result = mlae_estimate(schedule, [r["hits"] for r in rows])
        runs[rule] = {
            "rows": rows,
            "a_hat": result.a_hat,
            "theta_hat": result.theta_hat,
            "integral": problem.integral_from_probability(result.a_hat),
            "oracle_calls": oracle_calls(powers, schedule.shots, optimized=not args.unoptimized),
        }
        if args.dump_circuit:
            _write(args.dump_circuit, to_text(problem.operator.circuit))
        if args.dump_state:
            amps = simulate(problem.operator.circuit).amplitudes
            lines = ["index,re,im"] + [
                f"{i},{float(v.real)!r},{float(v.imag)!r}" for i, v in enumerate(amps)
            ]
            _write(args.dump_state, "\n".join(lines) + "\n")
    estimate = combine_estimates(args.rule, {r: runs[r]["integral"] for r in runs})
    exact = exact_sin2_integral(args.y)
    order = _BOUND_DERIV_ORDER[args.rule]
    bound = error_bound(args.rule, args.n, sin2_derivative_bound(order, args.y), args.y)
    report = {
        "command": "integrate",
        "config": {
            "y": args.y, "n": args.n, "rule": args.rule, "kmax": args.kmax,
            "shots": args.shots, "seed": args.seed, "optimized": not args.unoptimized,
            "noise": None if noise is None else {
                "cnot_error": noise.cnot_error,
                "flip_0_to_1": noise.flip_0_to_1,
                "flip_1_to_0": noise.flip_1_to_0,
            },
            "mitigate": bool(args.mitigate),
        },
        "runs": runs,
        "integral_estimate": estimate,
        "exact_integral": exact,
        "abs_error": abs(estimate - exact),
        "model_error_bound": bound.bound,
    }
    if args.csv:
        lines = ["rule,k,shots,hits"]
        for rule, run in runs.items():
            lines += [f"{rule},{r['k']},{r['shots']},{r['hits']!r}" for r in run["rows"]]
        _write(args.csv, "\n".join(lines) + "\n")
    _emit(report)
    return 0


def cmd_gates(args) -> int:
    if args.qubits not in (2, 3):
        raise ValueError("gate counting covers the 2- and 3-qubit benchmark circuits")
    ks = [int(v) for v in args.k.split(",") if v.strip() != ""] if args.k else []
    topo = LINEAR_CHAIN if args.topology == "linear_chain" else ALL_TO_ALL
    problem = sin2_problem(args.qubits - 1, 1.0, "left")
    modes = [True, False] if args.variant == "both" else [args.variant == "optimized"]
    lines = ["qubits,topology,optimized,drop_final,k,cnots"]
    for optimized in modes:
        drop = optimized if args.drop_final == "auto" else args.drop_final == "always"
        for k in ks:
            rep = count_cnots(problem.operator, k, optimized=optimized, topo=topo, drop_final=drop)
            lines.append(
                f"{args.qubits},{rep.topology},{str(rep.optimized).lower()},"
                f"{str(rep.drop_final).lower()},{rep.k},{rep.cnot_count}"
            )
    text = "\n".join(lines) + "\n"
    if args.csv:
        _write(args.csv, text)
    else:
        sys.stdout.write(text)
    return 0


def _load_heston_config(path: str | None):
    params = hs.HestonParams()
    grids = hs.HestonGrids()
    if path is None:
        return params, grids
    raw = Path(path).read_bytes()
    if path.endswith(".json"):
        data = json.loads(raw)
    else:
        try:
            import tomllib  # py >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        data = tomllib.loads(raw.decode())
    if not isinstance(data, dict):
        raise ValueError("config must be a table/object")
    pdata = dict(data.get("params", {}))
    gdata = {k: tuple(v) for k, v in dict(data.get("grids", {})).items()}
    try:
        params = hs.HestonParams(**pdata)
        grids = hs.HestonGrids(**gdata)
    except TypeError as e:
        raise ValueError(f"bad config field: {e}") from None
    return params, grids


def cmd_heston(args) -> int:
    params, grids = _load_heston_config(args.config)
    if args.tables == "reference":
        tables = hs.reference_tables()
    elif args.tables == "self":
        tables = hs.compute_tables(params, grids)
    else:
        tables = hs.tables_from_csv(Path(args.tables).read_text())
    op = hs.build_operator(tables, grids, params.strike)
    p_good = good_probability(simulate(op.circuit), op.flags)
    normalized = p_good * (1 << hs.N_STATE_QUBITS)
    unnormalized_ref = hs.expected_payoff_reference(tables, grids, params.strike)
    divisor = max(grids.s2) - params.strike
    report = {
        "command": "heston",
        "config": {
            "params": {f: getattr(params, f) for f in (
                "kappa", "theta", "xi", "mu", "rho", "nu0", "s0", "dt", "steps", "strike")},
            "grids": {"nu1": list(grids.nu1), "s1": list(grids.s1), "s2": list(grids.s2)},
            "tables_source": args.tables,
            "shots": args.shots,
            "kmax": args.kmax,
            "seed": args.seed,
        },
        "tables": {
            "p_nu1": list(tables.p_nu1),
            "p_s1": list(tables.p_s1),
            "p_s2_cond": [list(r) for r in tables.p_s2_cond],
            "row_sums": tables.row_sums(),
        },
        "marginal_s2": [float(v) for v in tables.marginal_s2()],
        "good_probability": p_good,
        "normalized_expected_payoff": normalized,
        "classical_reference": {
            "unnormalized_expected_payoff": unnormalized_ref,
            "normalized_expected_payoff": unnormalized_ref / divisor if divisor > 0 else 0.0,
        },
    }
    if args.tables == "self":
        report["comparison_to_reference"] = hs.compare_tables(tables, hs.reference_tables())
    if args.kmax is not None:
        powers = default_schedule(args.kmax, max(args.shots, 1)).powers
        rows = [
            _power_hits(op, k, args.shots, False, None, False,
                        np.random.SeedSequence([args.seed, k]))
            for k in powers
        ]
        schedule = MlaeSchedule(powers, tuple(r["shots"] for r in rows))
        result = mlae_estimate(schedule, [r["hits"] for r in rows])
        report["mlae"] = {
            "rows": rows,
            "a_hat": result.a_hat,
            "normalized_expected_payoff": result.a_hat * (1 << hs.N_STATE_QUBITS),
            "oracle_calls": oracle_calls(powers, schedule.shots, optimized=False),
        }
    if args.csv:
        _write(args.csv, hs.tables_to_csv(tables))
    _emit(report)
    return 0


def cmd_mitigate_demo(args) -> int:
    noise = NoiseModel(cnot_error=args.cnot_error, flip_0_to_1=args.flip01, flip_1_to_0=args.flip10)
    if args.n > _MAX_NOISY_N:
        raise ValueError(f"the demo benchmark supports n <= {_MAX_NOISY_N}")
    problem = sin2_problem(args.n, args.y, "midpoint")
    circuit = lower(grover_power(problem.operator, args.k, optimized=True), ALL_TO_ALL)
    truth = good_probability(simulate(circuit), problem.flags)
    per_seed = []
    improved = 0
    for s in range(args.seeds):
        res = mitigated_good_probability(circuit, problem.flags, noise,
                                         shots=args.shots, seed=args.seed + s)
        raw_err = abs(res.raw - truth)
        mit_err = abs(res.mitigated - truth)
        improved += int(mit_err < raw_err)
        per_seed.append({
            "seed": args.seed + s,
            "raw": res.raw,
            "mitigated": res.mitigated,
            "raw_error": raw_err,
            "mitigated_error": mit_err,
            "folded": list(res.folded.probabilities),
        })
    report = {
        "command": "mitigate-demo",
        "config": {
            "n": args.n, "k": args.k, "y": args.y, "seeds": args.seeds,
            "shots": args.shots, "seed": args.seed,
            "noise": {"cnot_error": noise.cnot_error, "flip_0_to_1": noise.flip_0_to_1,
                      "flip_1_to_0": noise.flip_1_to_0},
        },
        "truth": truth,
        "per_seed": per_seed,
        "mean_raw_error": float(np.mean([r["raw_error"] for r in per_seed])),
        "mean_mitigated_error": float(np.mean([r["mitigated_error"] for r in per_seed])),
        "fraction_improved": improved / args.seeds,
    }
    _emit(report)
    return 0


def _add_noise_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cnot-error", type=float, default=0.01)
    p.add_argument("--flip01", type=float, default=0.02, help="readout P(1|0)")
    p.add_argument("--flip10", type=float, default=0.04, help="readout P(0|1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qaekit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("integrate", help="amplitude-estimate the integral of sin^2(pi x)")
    p.add_argument("--y", type=float, default=1.0, help="upper integration limit")
    p.add_argument("--n", type=int, default=2, help="qubits for the grid (2^n nodes)")
    p.add_argument("--rule", choices=RULES, default="midpoint")
    p.add_argument("--kmax", type=int, default=3, help="largest power is 2^kmax")
    p.add_argument("--shots", type=int, default=8192, help="0 = exact probabilities")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--unoptimized", action="store_true")
    p.add_argument("--noise", action="store_true", help="sample under the synthetic noise model")
    p.add_argument("--mitigate", action="store_true", help="noise + readout correction + folding")
    _add_noise_args(p)
    p.add_argument("--csv", help="also write per-power hit counts as CSV")
    p.add_argument("--dump-circuit", help="write the preparation circuit as text")
    p.add_argument("--dump-state", help="write the prepared statevector as CSV")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("gates", help="CNOT counts of the amplified benchmark circuits")
    p.add_argument("--qubits", type=int, default=2, help="total circuit width (2 or 3)")
    p.add_argument("--topology", choices=("all_to_all", "linear_chain"), default="all_to_all")
    p.add_argument("--k", default="1,2,4,8,16", help="comma-separated powers; empty = header only")
    p.add_argument("--variant", choices=("optimized", "unoptimized", "both"), default="both")
    p.add_argument("--drop-final", choices=("auto", "always", "never"), default="auto",
                   help="auto drops the final CNOT for optimized circuits only")
    p.add_argument("--csv", help="write the table to a file instead of stdout")
    p.set_defaults(func=cmd_gates)

    p = sub.add_parser("heston", help="two-step stochastic-volatility call pricing")
    p.add_argument("--config", help="TOML or JSON file with [params] and [grids]")
    p.add_argument("--tables", default="reference",
                   help="'reference', 'self', or a CSV path of probability tables")
    p.add_argument("--shots", type=int, default=0, help="0 = exact probabilities")
    p.add_argument("--kmax", type=int, default=None, help="enable MLAE with powers up to 2^kmax")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="write the probability tables as CSV")
    p.set_defaults(func=cmd_heston)

    p = sub.add_parser("mitigate-demo", help="folding + readout correction on a small benchmark")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--y", type=float, default=0.7)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--shots", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    _add_noise_args(p)
    p.set_defaults(func=cmd_mitigate_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3
    except (ValueError, NotImplementedError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
