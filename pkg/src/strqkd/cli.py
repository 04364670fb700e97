"""Command-line surface: scenario runs, sweeps, CSV emission, verification.

Subcommands
-----------
qubit-rate   STR qubit rate for a node count and per-link error rate.
fig2-sweep   Rate-vs-link-error curves (conventional, STR-1, STR-2).
decoy-sweep  Rate-vs-loss curves for the weak-coherent model.
montecarlo   Protocol simulation; emits the basis-vector error table.
verify       Numerical verification suites for the module invariants.

Grids are start:stop:step strings.  A JSON config file may provide any
defaults; explicit flags take precedence.  Every run prints its fully
resolved configuration for reproducibility.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from . import decoy, keyrate, qubit, relay

__all__ = ["main", "emit_csv", "parse_grid", "run_verification"]


def parse_grid(spec: str) -> list[float]:
    """Parse a start:stop:step grid string (stop inclusive up to rounding)."""
    try:
        start, stop, step = (float(part) for part in spec.split(":"))
    except ValueError:
        raise SystemExit(f"error: grid must be start:stop:step, got {spec!r}")
    if step <= 0 or stop < start:
        raise SystemExit(f"error: invalid grid {spec!r}")
    count = int(round((stop - start) / step)) + 1
    return [start + i * step for i in range(count)]


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def emit_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Write comma-separated rows: UTF-8, 12 significant digits, LF endings."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_format_value(v) for v in row) + "\n")
    except OSError as exc:
        raise SystemExit(f"error: cannot write {path}: {exc}")


def _print_config(name: str, config: dict[str, Any]) -> None:
    print(f"strqkd {__version__} :: {name}")
    for key in sorted(config):
        print(f"  {key} = {config[key]}")


def _print_report(label: str, report: keyrate.KeyRateReport) -> None:
    print(
        f"{label}: rate={report.rate:.12g} "
        f"(entropy={report.entropy_term:.12g} leak={report.leak_term:.12g} "
        f"holevo={report.holevo_term:.12g} tagged={report.tagged_term:.12g})"
    )


def _load_config(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SystemExit(f"error: cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        raise SystemExit(f"error: config {path} must be a JSON object")
    return data


def _cmd_qubit_rate(args: argparse.Namespace) -> int:
    links = args.nodes + 1
    e_total = relay.compound_error(args.e_link, links)
    table = {u: e_total for u in keyrate._all_basis_vectors(links)}
    inputs = keyrate.RateInputs(error_rates=table, p_z=args.p_z, f_ec=args.f_ec)
    report = keyrate.str_rate_qubit(inputs, num_nodes=args.nodes)
    _print_config(
        "qubit-rate",
        {
            "nodes": args.nodes,
            "e_link": args.e_link,
            "e_end_to_end": e_total,
            "f_ec": args.f_ec,
            "p_z": args.p_z,
        },
    )
    _print_report(f"STR-{args.nodes}", report)
    return 0


def _cmd_fig2_sweep(args: argparse.Namespace) -> int:
    grid = parse_grid(args.e_link)
    node_counts = [int(v) for v in args.nodes.split(",")]
    _print_config(
        "fig2-sweep",
        {"e_link": args.e_link, "nodes": args.nodes, "output": args.output},
    )
    rows = keyrate.fig2_curves(grid, node_counts=node_counts)
    header = ["e_link"] + [
        "rate_conventional" if m == 0 else f"rate_str{m}" for m in node_counts
    ]
    emit_csv(args.output, header, ([row[col] for col in header] for row in rows))
    print(f"wrote {len(rows)} rows to {args.output}")
    return 0


def _cmd_decoy_sweep(args: argparse.Namespace) -> int:
    grid = parse_grid(args.loss_db)
    num_links = 1 if args.scenario == "conventional" else args.nodes + 1
    mu_fixed = None if args.mu == "auto" else float(args.mu)
    _print_config(
        "decoy-sweep",
        {
            "loss_db": args.loss_db,
            "nodes": args.nodes,
            "scenario": args.scenario,
            "mu": args.mu,
            "f_ec": args.f_ec,
            "p_z": args.p_z,
            "detector_efficiency": args.eta_det,
            "dark_count_prob": args.dark,
            "intrinsic_error": args.e_det,
            "conservative": args.conservative,
            "output": args.output,
        },
    )
    header = [
        "loss_db",
        "mu",
        "rate",
        "entropy_term",
        "leak_term",
        "holevo_term",
        "tagged_term",
    ]
    rows = []
    mode = "conventional" if args.scenario == "conventional" else "str"
    for loss in grid:
        links = [
            decoy.LinkPhysics(
                loss_db=loss,
                detector_efficiency=args.eta_det,
                dark_count_prob=args.dark,
                intrinsic_error=args.e_det,
                mu=mu_fixed if mu_fixed is not None else 0.5,
            )
        ] * max(num_links, 2 if mode == "conventional" else num_links)
        if mu_fixed is None:
            mu, report = decoy.optimize_intensity(
                links,
                f_ec=args.f_ec,
                p_z=args.p_z,
                mode=mode,
                conservative=args.conservative,
            )
        else:
            mu = mu_fixed
            if mode == "conventional":
                report = decoy.conventional_decoy_rate(
                    links, f_ec=args.f_ec, p_z=args.p_z
                )
            else:
                report = decoy.decoy_rate(
                    links, f_ec=args.f_ec, p_z=args.p_z, conservative=args.conservative
                )
        rows.append(
            [
                loss,
                mu,
                report.rate,
                report.entropy_term,
                report.leak_term,
                report.holevo_term,
                report.tagged_term,
            ]
        )
    emit_csv(args.output, header, rows)
    print(f"wrote {len(rows)} rows to {args.output}")
    return 0


def _cmd_montecarlo(args: argparse.Namespace) -> int:
    cfg = relay.ChainConfig(
        num_nodes=args.nodes,
        rounds=args.rounds,
        flip_prob=args.flip,
        detect_prob=args.detect,
        p_z=args.p_z,
        seed=args.seed,
    )
    _print_config(
        "montecarlo",
        {
            "nodes": cfg.num_nodes,
            "rounds": cfg.rounds,
            "flip_prob": cfg.flip_prob,
            "detect_prob": cfg.detect_prob,
            "p_z": cfg.p_z,
            "seed": cfg.seed,
            "workers": args.workers,
            "output": args.output,
        },
    )
    table, survivors = relay.run_protocol(cfg, workers=args.workers)
    print(f"survivors per link: {survivors}")
    analytic = relay.compound_error(cfg.flip_prob, cfg.num_links)
    header = ["basis_vector", "errors", "samples", "rate", "analytic_rate"]
    rows = []
    for u in sorted(table.counts):
        errors, samples = table.counts[u]
        rows.append(
            ["".join(str(b) for b in u), errors, samples, table.rate(u), analytic]
        )
        print(
            f"u={''.join(str(b) for b in u)}: {errors}/{samples} "
            f"rate={table.rate(u):.6g} (analytic {analytic:.6g})"
        )
    if args.output:
        emit_csv(args.output, header, rows)
        print(f"wrote {len(rows)} rows to {args.output}")
    return 0


def run_verification(trials: int = 100, seed: int = 2024) -> list[tuple[str, bool, str]]:
    """Numerical verification of the module invariants.

    Returns (name, passed, detail) per suite; used by the ``verify``
    subcommand and exercised end-to-end by the test suite.
    """
    rng = np.random.default_rng(seed)
    results: list[tuple[str, bool, str]] = []

    def record(name: str, passed: bool, detail: str) -> None:
        results.append((name, passed, detail))

    # Twirl: Bell-basis diagonality, idempotence, error-rate invariance.
    basis = qubit.tensored_bell_basis_matrix()
    worst_off = worst_idem = worst_inv = 0.0
    for _ in range(min(trials, 50)):
        rho = qubit.random_density_matrix(16, rng)
        tw = qubit.twirl(rho)
        diag = basis.conj().T @ tw @ basis
        worst_off = max(worst_off, float(np.abs(diag - np.diag(np.diag(diag))).max()))
        worst_idem = max(worst_idem, float(np.abs(qubit.twirl(tw) - tw).max()))
        for u1 in (0, 1):
            for u2 in (0, 1):
                delta = abs(
                    qubit.basis_error_rate(rho, u1, u2)
                    - qubit.basis_error_rate(tw, u1, u2)
                )
                worst_inv = max(worst_inv, delta)
    record("twirl-diagonality", worst_off < 1e-12, f"max off-diagonal {worst_off:.3g}")
    record("twirl-idempotence", worst_idem < 1e-12, f"max deviation {worst_idem:.3g}")
    record("twirl-error-invariance", worst_inv < 1e-10, f"max delta {worst_inv:.3g}")

    # Rotated Bell bases are orthonormal and complete.
    worst_ortho = 0.0
    for u1 in (0, 1):
        for u2 in (0, 1):
            vecs = np.column_stack(qubit.rotated_bell_basis(u1, u2))
            worst_ortho = max(
                worst_ortho, float(np.abs(vecs.conj().T @ vecs - np.eye(4)).max())
            )
    record("rotated-bases-orthonormal", worst_ortho < 1e-12, f"max {worst_ortho:.3g}")

    # Holevo oracle never exceeds the entropy bound.
    worst_gap = -np.inf
    for _ in range(trials):
        alpha = qubit.random_bell_diagonal(rng)
        for u1 in (0, 1):
            for u2 in (0, 1):
                gap = qubit.holevo_oracle(alpha, u1, u2) - qubit.holevo_bound(
                    alpha, u1, u2
                )
                worst_gap = max(worst_gap, gap)
    record("holevo-bound", worst_gap < 1e-9, f"max chi - bound = {worst_gap:.3g}")

    # Relabeling symmetry: the conditioned end-user state at (u1, u2, a, b)
    # equals the one at the complementary bases with (a, b) swapped.
    worst_sym = 0.0
    for _ in range(min(trials, 20)):
        alpha = qubit.random_bell_diagonal(rng)
        for u1 in (0, 1):
            for u2 in (0, 1):
                for a in (0, 1):
                    for b in (0, 1):
                        p, rho = qubit.conditional_end_user_state(alpha, u1, u2, a, b)
                        p2, rho2 = qubit.conditional_end_user_state(
                            alpha, u1 ^ 1, u2 ^ 1, b, a
                        )
                        worst_sym = max(
                            worst_sym, abs(p - p2), float(np.abs(rho - rho2).max())
                        )
    record("announcement-relabeling", worst_sym < 1e-10, f"max delta {worst_sym:.3g}")

    # Monte Carlo error rates against the analytic compound model.
    mc_ok = True
    mc_detail = []
    for nodes, flip in ((1, 0.05), (2, 0.01)):
        cfg = relay.ChainConfig(
            num_nodes=nodes, rounds=200_000, flip_prob=flip, seed=seed + nodes
        )
        table, _ = relay.run_protocol(cfg)
        expected = relay.compound_error(flip, cfg.num_links)
        for u in table.counts:
            _, samples = table.counts[u]
            sigma = (expected * (1 - expected) / samples) ** 0.5
            z = abs(table.rate(u) - expected) / sigma
            if z > 4.0:
                mc_ok = False
                mc_detail.append(f"u={u} z={z:.2f}")
    record("montecarlo-vs-analytic", mc_ok, "; ".join(mc_detail) or "within 4 sigma")

    # Qubit rate curves: zero crossings and ordering.
    from .acceptance_checks import fig2_zero_crossings

    crossings = fig2_zero_crossings()
    fig2_ok = (
        abs(crossings["conventional"] - 0.1100) < 0.0005
        and abs(crossings["str1"] - 0.0584) < 0.0005
        and abs(crossings["str2"] - 0.0398) < 0.0005
    )
    record(
        "fig2-zero-crossings",
        fig2_ok,
        ", ".join(f"{k}={v:.4f}" for k, v in crossings.items()),
    )

    # Decoy closed forms against the truncated Poisson sum.
    worst_decoy = 0.0
    for loss in (0.0, 10.0, 20.0):
        for mu in (0.05, 0.3, 1.0):
            for dark in (0.0, 6e-6, 1e-4):
                phys = decoy.LinkPhysics(loss_db=loss, dark_count_prob=dark, mu=mu)
                closed = decoy.link_statistics(phys)
                oracle = decoy.poisson_sum_statistics(phys)
                worst_decoy = max(
                    worst_decoy,
                    abs(closed.gain - oracle.gain),
                    abs(closed.qber - oracle.qber),
                )
    record("decoy-poisson-oracle", worst_decoy < 1e-9, f"max delta {worst_decoy:.3g}")

    fr = decoy.decoy_fractions([decoy.LinkPhysics(loss_db=5.0, mu=0.2)] * 2)
    ident = abs(fr.f_v + fr.f_s_vs + fr.f_m - 1.0)
    record("decoy-fraction-identity", ident == 0.0, f"residual {ident:.3g}")

    return results


def _cmd_verify(args: argparse.Namespace) -> int:
    _print_config("verify", {"trials": args.trials, "seed": args.seed})
    results = run_verification(trials=args.trials, seed=args.seed)
    failures = 0
    for name, passed, detail in results:
        status = "PASS" if passed else "FAIL"
        print(f"[{status}] {name}: {detail}")
        failures += not passed
    print(f"{len(results) - failures}/{len(results)} suites passed")
    return 1 if failures else 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strqkd",
        description="Simplified trusted relay QKD simulation and key-rate toolkit",
    )
    parser.add_argument("--config", help="JSON config file with default values")
    parser.add_argument(
        "--version", action="version", version=f"strqkd {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qubit-rate", help="STR qubit rate for one scenario")
    p.add_argument("--nodes", type=int, default=1)
    p.add_argument("--e-link", type=float, required=True)
    p.add_argument("--f-ec", type=float, default=1.0)
    p.add_argument("--p-z", type=float, default=0.5)
    p.set_defaults(func=_cmd_qubit_rate)

    p = sub.add_parser("fig2-sweep", help="rate vs per-link error rate curves")
    p.add_argument("--e-link", default="0:0.12:0.002", help="grid start:stop:step")
    p.add_argument("--nodes", default="0,1,2", help="comma-separated node counts")
    p.add_argument("--output", default="fig2.csv")
    p.set_defaults(func=_cmd_fig2_sweep)

    p = sub.add_parser("decoy-sweep", help="rate vs per-link loss curves")
    p.add_argument("--loss-db", default="0:40:0.5", help="grid start:stop:step")
    p.add_argument("--nodes", type=int, default=1)
    p.add_argument("--scenario", choices=["str", "conventional"], default="str")
    p.add_argument("--mu", default="auto", help="'auto' (optimized) or a value")
    p.add_argument("--f-ec", type=float, default=1.2)
    p.add_argument("--p-z", type=float, default=0.5)
    p.add_argument("--eta-det", type=float, default=0.5)
    p.add_argument("--dark", type=float, default=6e-6)
    p.add_argument("--e-det", type=float, default=0.0185)
    p.add_argument("--conservative", action="store_true")
    p.add_argument("--output", default="decoy.csv")
    p.set_defaults(func=_cmd_decoy_sweep)

    p = sub.add_parser("montecarlo", help="protocol Monte Carlo simulation")
    p.add_argument("--rounds", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--flip", type=float, default=0.0)
    p.add_argument("--detect", type=float, default=1.0)
    p.add_argument("--nodes", type=int, default=1)
    p.add_argument("--p-z", type=float, default=0.5)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_montecarlo)

    p = sub.add_parser("verify", help="run numerical verification suites")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=2024)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    config = _load_config(args.config)
    # Config-file values fill in for flags left at their parser defaults.
    defaults: dict[str, Any] = {}
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for subparser in action.choices.values():
                for sub_action in subparser._actions:
                    defaults[sub_action.dest] = sub_action.default
        else:
            defaults[action.dest] = action.default
    for key, value in config.items():
        dest = key.replace("-", "_")
        if hasattr(args, dest) and getattr(args, dest) == defaults.get(dest):
            setattr(args, dest, value)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
