"""Shared numerical checks used by the verify subcommand and the test suite."""

from __future__ import annotations

from . import decoy, keyrate, relay

__all__ = ["fig2_zero_crossings", "decoy_cutoff_loss"]


def _bisect_root(fn, lo: float, hi: float, tol: float = 1e-7) -> float:
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo * f_hi > 0:
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fn(mid) * f_lo <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def fig2_zero_crossings() -> dict[str, float]:
    """Per-link error rates where the qubit-model curves hit zero."""

    def conventional(e: float) -> float:
        return keyrate.conventional_relay_rate(e, f_ec=1.0).unclamped

    def str_rate(e_link: float, nodes: int) -> float:
        links = nodes + 1
        e_total = relay.compound_error(e_link, links)
        table = {u: e_total for u in keyrate._all_basis_vectors(links)}
        return keyrate.str_rate_qubit(
            keyrate.RateInputs(error_rates=table), num_nodes=nodes
        ).unclamped

    return {
        "conventional": _bisect_root(conventional, 1e-6, 0.25),
        "str1": _bisect_root(lambda e: str_rate(e, 1), 1e-6, 0.25),
        "str2": _bisect_root(lambda e: str_rate(e, 2), 1e-6, 0.25),
    }


def decoy_cutoff_loss(
    mode: str,
    num_links: int,
    f_ec: float = 1.2,
    intrinsic_error: float = 0.0185,
    dark_count_prob: float = 6e-6,
    max_loss_db: float = 80.0,
    step_db: float = 1.0,
) -> float:
    """Smallest per-link loss (on a step_db grid) with zero optimized rate."""
    loss = 0.0
    while loss <= max_loss_db:
        links = [
            decoy.LinkPhysics(
                loss_db=loss,
                dark_count_prob=dark_count_prob,
                intrinsic_error=intrinsic_error,
            )
        ] * num_links
        _, report = decoy.optimize_intensity(links, f_ec=f_ec, mode=mode)
        if report.rate <= 0.0:
            return loss
        loss += step_db
    return float("inf")
