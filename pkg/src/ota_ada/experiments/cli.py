"""``ota-ada`` command line: bounds, figure, simulate, attack-demo.

Exit codes: 0 success, 2 usage/config error, 3 bound-domain error,
4 runtime failure during a simulation.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import sys
from contextlib import contextmanager
from typing import Any, Iterable, Sequence

import numpy as np

from .. import __version__, bounds
from ..analyst_harness import AnalystPolicy, SimTemplate, evaluate_accuracy, run_policy_session
from ..bounds import MechanismPoint, SystemConfig
from ..federated_sim import Population
from ..special_functions import DomainError, RootFindingError
from .config import POLICIES, SEED_ENV, ConfigError, ExperimentConfig, load_config
from .figures import FIGURES, FIXED_RATIO_L, figure_rows

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_RUNTIME = 0, 2, 3, 4
MAX_SIM_ROUNDS = 10_000


class BoundDomainError(Exception):
    pass


class SimulationError(Exception):
    pass


def _fmt(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_rows(fh, rows: Sequence[dict], header: Iterable[str] = ()) -> None:
    """CSV with ``#`` header comments; columns follow the first row."""
    for line in header:
        fh.write(f"# {line}\n")
    if not rows:
        return
    writer = csv.writer(fh, lineterminator="\n")
    columns = list(rows[0])
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c, "")) for c in columns])


@contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _header(command: str, cfg: ExperimentConfig) -> list[str]:
    return [f"artifact = ota_ada {__version__}", f"command = {command}", *cfg.echo()]


def _add_common(p: argparse.ArgumentParser, *, sim: bool = False) -> None:
    p.add_argument("--config", metavar="PATH", help="flat key = value config file")
    p.add_argument("--seed", metavar="U64",
                   help=f"master seed (default: ${SEED_ENV}, then 0)")
    p.add_argument("--out", metavar="PATH", help="CSV output path (default: stdout)")
    p.add_argument("--alpha", help="target accuracy, in (0, 1]")
    p.add_argument("--beta", help="failure probability, in (0, 1)")
    p.add_argument("--lenient", action="store_true", help="warn on unknown config keys instead of failing")
    if sim:
        p.add_argument("--n0", help="samples per EP")
        p.add_argument("--L", help="number of EPs")
        p.add_argument("--sigma", help="channel noise std sigma_ch")
        p.add_argument("--At", help="transmit amplitude, or 'opt' for the optimal amplitude")
        p.add_argument("--trials", help="Monte-Carlo trials")
        p.add_argument("--k", help="rounds per session")
        p.add_argument("--domain-size", dest="domain_size", help="domain size N")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ota-ada",
        description="Query budgets and simulations for adaptive data analysis over Gaussian channels.",
        epilog=f"The default master seed is read from ${SEED_ENV} when --seed and the config omit it.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="evaluate k, k1, k2, s_opt and SNR at one operating point")
    _add_common(p)
    p.add_argument("--n", help="dataset size (per EP when --L > 1)")
    p.add_argument("--sigma", help="channel noise std")
    p.add_argument("--At", help="transmit amplitude, or 'opt'")
    p.add_argument("--L", help="number of EPs (default 1)")
    p.add_argument("--k", help="also report the accuracy alpha reached after k queries")
    p.add_argument("--floor", action="store_true", help="report k as an integer")

    p = sub.add_parser("figure", help="write the dataset of one figure as CSV")
    p.add_argument("name", choices=FIGURES)
    _add_common(p)
    p.add_argument("--floor", action="store_true", help="accepted for symmetry; figure CSVs carry both k and k_floor")

    p = sub.add_parser("simulate", help="Monte-Carlo (alpha, beta)-accuracy of an analyst policy")
    _add_common(p, sim=True)
    p.add_argument("--policy", choices=POLICIES)
    p.add_argument("--transcript", metavar="PATH", help="also write the first trial's transcript CSV")

    p = sub.add_parser("attack-demo", help="overfitting attack across a ladder of noise levels")
    _add_common(p, sim=True)
    return parser


def _overrides(args: argparse.Namespace, mapping: dict[str, str]) -> dict[str, Any]:
    return {key: getattr(args, attr, None) for attr, key in mapping.items()}


SIM_FLAGS = {
    "alpha": "alpha", "beta": "beta", "seed": "seed", "out": "output_path", "n0": "n0", "L": "L",
    "sigma": "sigma_ch", "At": "A_t", "trials": "trials", "k": "k", "domain_size": "domain_size",
    "policy": "policy",
}


def _resolve_amplitude(cfg: ExperimentConfig) -> SystemConfig:
    system = cfg.system
    if cfg.optimize_amplitude:
        try:
            a_t = bounds.optimal_amplitude(system, cfg.accuracy)
        except (DomainError, RootFindingError) as exc:
            raise BoundDomainError(f"cannot pick the optimal amplitude: {exc}") from exc
        system = dataclasses.replace(system, A_t=a_t)
    return system


def cmd_bounds(args: argparse.Namespace) -> int:
    flags = {"alpha": "alpha", "beta": "beta", "seed": "seed", "out": "output_path",
             "n": "n0", "L": "L", "sigma": "sigma_ch", "At": "A_t", "k": "k"}
    cfg = load_config(args.config, _overrides(args, flags), args.lenient, require=("n0",))
    if "sigma_ch" not in cfg.given:
        raise ConfigError("missing required key 'sigma_ch' (--sigma)", key="sigma_ch")
    acc = cfg.accuracy
    system = _resolve_amplitude(cfg)
    if system.sigma_ch <= 0:
        raise BoundDomainError("bounds need sigma > 0")
    eq = bounds.to_equivalent(system)
    ratio = eq.sigma_eq_normalized
    budget = bounds.k_budget(ratio, eq.n_eq, acc)
    try:
        s_opt = bounds.s_opt(eq.n_eq, acc)
    except (DomainError, RootFindingError):
        s_opt = None

    k_shown = budget.k_floor if args.floor else budget.k
    row = {
        "n_eq": eq.n_eq, "sigma_over_At": ratio, "alpha": acc.alpha, "beta": acc.beta,
        "k": k_shown, "k1": budget.k1, "k2": "" if budget.k2_saturated else budget.k2,
        "log10_k2": budget.log_k2 / np.log(10.0), "k2_saturated": int(budget.k2_saturated),
        "regime": budget.regime, "s_opt": "" if s_opt is None else s_opt,
        "snr_db": bounds.snr_db(system), "amplitude_ratio": bounds.amplitude_ratio(system),
    }
    if cfg.k is not None:
        row["alpha_at_k"] = bounds.alpha_of(MechanismPoint(eq.n_eq, ratio, cfg.k), acc.beta)

    print(f"n_eq            = {eq.n_eq}")
    print(f"sigma/A_t (eq)  = {ratio:.6g}")
    print(f"k               = {_fmt(k_shown)}")
    print(f"k1              = {budget.k1:.6g}" + ("" if budget.k1_in_range else "  (out of range)"))
    if budget.k2_saturated:
        print(f"k2              = unbounded by k2 (log10 k2 = {row['log10_k2']:.6g})")
    else:
        print(f"k2              = {budget.k2:.6g}")
    print(f"regime          = {budget.regime}")
    print(f"s_opt           = {'undefined' if s_opt is None else f'{s_opt:.6g}'}")
    print(f"SNR             = {row['snr_db']:.4g} dB (A_t/sigma = {row['amplitude_ratio']:.6g})")
    if "alpha_at_k" in row:
        print(f"alpha(k={cfg.k})    = {row['alpha_at_k']:.6g}")

    if cfg.output_path:
        with _output(cfg.output_path) as fh:
            write_rows(fh, [row], _header("bounds", cfg))
    if not budget.k1_in_range:
        print(f"error: {budget.reason}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_figure(args: argparse.Namespace) -> int:
    flags = {"alpha": "alpha", "beta": "beta", "seed": "seed", "out": "output_path"}
    cfg = load_config(args.config, _overrides(args, flags), args.lenient, require=())
    ratio = FIXED_RATIO_L
    if {"sigma_ch", "A_t"} & cfg.given and cfg.system is not None:
        ratio = cfg.system.sigma_ch / cfg.system.A_t
    try:
        rows = figure_rows(args.name, cfg.accuracy, cfg.sweep, n_values=cfg.n_values,
                           n0_values=cfg.n0_values, ratio=ratio)
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise ConfigError(str(exc)) from exc
    with _output(cfg.output_path) as fh:
        write_rows(fh, [r.as_dict() for r in rows], _header(f"figure {args.name}", cfg))
    return EXIT_OK


def _sim_setup(args, defaults=None):
    cfg = load_config(args.config, _overrides(args, SIM_FLAGS), args.lenient,
                      require=("n0",) if defaults is None else (), defaults=defaults)
    system = _resolve_amplitude(cfg)
    return cfg, system


def _calibrated_k(cfg: ExperimentConfig, system: SystemConfig) -> int:
    if cfg.k is not None:
        return cfg.k
    if system.sigma_ch <= 0:
        raise BoundDomainError("k must be given when sigma_ch = 0")
    eq = bounds.to_equivalent(system)
    budget = bounds.k_budget(eq.sigma_eq_normalized, eq.n_eq, cfg.accuracy)
    k = min(budget.k_floor, MAX_SIM_ROUNDS)
    if k < 1:
        raise BoundDomainError(f"bound-calibrated k is {budget.k:.4g} < 1; set k explicitly")
    return k


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg, system = _sim_setup(args)
    k = _calibrated_k(cfg, system)
    policy = AnalystPolicy(cfg.policy)
    template = SimTemplate(Population.uniform(cfg.domain_size), system)
    try:
        report = evaluate_accuracy(policy, template, k, cfg.accuracy.alpha, cfg.trials, cfg.master_seed)
        transcript = None
        if args.transcript:
            first = np.random.SeedSequence(cfg.master_seed).spawn(cfg.trials)[0]
            transcript = run_policy_session(policy, template.context(first), k)
    except (ValueError, ArithmeticError, MemoryError) as exc:
        raise SimulationError(str(exc)) from exc

    header = _header("simulate", cfg) + [f"resolved_A_t = {system.A_t!r}", f"resolved_k = {k}"]
    with _output(cfg.output_path) as fh:
        report.to_csv(fh, header)
    if transcript is not None:
        with _output(args.transcript) as fh:
            transcript.to_csv(fh, header)
    lo, hi = report.wilson_interval
    summary = sys.stdout if cfg.output_path else sys.stderr
    print(f"failure_rate = {report.failure_rate:.4f} over {report.trials} trials "
          f"(95% Wilson [{lo:.4f}, {hi:.4f}]) at alpha = {cfg.accuracy.alpha}, k = {k}", file=summary)
    return EXIT_OK


def ladder_reference(n_eq: int, acc: bounds.AccuracySpec) -> tuple[float, str]:
    """Reference ratio of the attack ladder: s_opt, or the k2 = 1 ratio when n is too small."""
    try:
        return bounds.s_opt(n_eq, acc), "s_opt"
    except (DomainError, RootFindingError):
        return bounds.k2_threshold_sigma(acc), "k2_threshold"


def attack_ladder(cfg: ExperimentConfig, system: SystemConfig, k: int) -> list[dict]:
    """Run the overfitting attack at ``sigma_eq/A_t`` in {0, ref/10, ref, 10 ref}."""
    eq = bounds.to_equivalent(system)
    ref, ref_name = ladder_reference(eq.n_eq, cfg.accuracy)
    population = Population.uniform(cfg.domain_size)
    rows = []
    for label, ratio in (("0", 0.0), (f"{ref_name}/10", ref / 10), (ref_name, ref), (f"10*{ref_name}", 10 * ref)):
        rung = dataclasses.replace(system, sigma_ch=ratio * system.L * system.A_t)
        report = evaluate_accuracy(AnalystPolicy("overfit_attack"), SimTemplate(population, rung),
                                   k, cfg.accuracy.alpha, cfg.trials, cfg.master_seed)
        lo, hi = report.wilson_interval
        rows.append({"rung": label, "sigma_over_At": ratio, "n_eq": eq.n_eq, "k": k,
                     "trials": report.trials, "failure_rate": report.failure_rate,
                     "wilson_lo": lo, "wilson_hi": hi,
                     "mean_final_gap": float(np.mean(report.final_gaps))})
    return rows


ATTACK_DEFAULTS = {"n0": "100", "k": "1001", "trials": "100"}


def cmd_attack_demo(args: argparse.Namespace) -> int:
    cfg, system = _sim_setup(args, defaults=ATTACK_DEFAULTS)
    if cfg.k < 2:
        raise ConfigError("attack-demo needs k >= 2", key="k")
    try:
        rows = attack_ladder(cfg, system, cfg.k)
    except (ValueError, ArithmeticError, MemoryError) as exc:
        raise SimulationError(str(exc)) from exc
    table = io.StringIO()
    write_rows(table, rows)
    print(table.getvalue(), end="")
    if cfg.output_path:
        with _output(cfg.output_path) as fh:
            write_rows(fh, rows, _header("attack-demo", cfg))
    return EXIT_OK


COMMANDS = {
    "bounds": cmd_bounds,
    "figure": cmd_figure,
    "simulate": cmd_simulate,
    "attack-demo": cmd_attack_demo,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"ota-ada: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BoundDomainError, DomainError, RootFindingError) as exc:
        print(f"ota-ada: bound domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except SimulationError as exc:
        print(f"ota-ada: simulation aborted: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def run() -> None:
    sys.exit(main())
