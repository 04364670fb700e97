"""Asymptotic key-rate formulas for the simplified trusted relay (STR).

Rates are reported per sifted paired signal. The STR rate subtracts, on top
of the error-correction leak, a privacy-amplification term evaluated at the
complementary basis vector of every announcement combination. A conventional
trusted-relay baseline (chain limited by its worst link) is included for
comparison curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

__all__ = [
    "KeyRateReport",
    "RateInputs",
    "binary_entropy",
    "str_rate_qubit",
    "node_focused_rate",
    "conventional_relay_rate",
    "fig2_curves",
]


def binary_entropy(e: float) -> float:
    """Binary entropy h(e) = -e log2 e - (1-e) log2(1-e), in bits.

    Endpoints e = 0 and e = 1 return 0.
    """
    if e < 0.0 or e > 1.0:
        raise ValueError(f"binary_entropy argument must lie in [0, 1], got {e}")
    if e == 0.0 or e == 1.0:
        return 0.0
    return -e * math.log2(e) - (1.0 - e) * math.log2(1.0 - e)


@dataclass(frozen=True)
class KeyRateReport:
    """Key rate with its decomposition.

    ``rate`` clamps at zero for reporting; ``unclamped`` keeps the signed
    value needed for zero-crossing root finds.  ``tagged_term`` is only
    nonzero for decoy rates (multi-photon fraction subtracted outright).
    All terms share the same normalization (per sifted signal, or per clock
    cycle once scaled by the physical layer).
    """

    entropy_term: float
    leak_term: float
    holevo_term: float
    tagged_term: float = 0.0

    @property
    def unclamped(self) -> float:
        return self.entropy_term - self.leak_term - self.holevo_term - self.tagged_term

    @property
    def rate(self) -> float:
        return max(0.0, self.unclamped)

    def scaled(self, factor: float) -> "KeyRateReport":
        """Rescale every term by ``factor`` (e.g. per-clock-cycle conversion)."""
        return KeyRateReport(
            entropy_term=self.entropy_term * factor,
            leak_term=self.leak_term * factor,
            holevo_term=self.holevo_term * factor,
            tagged_term=self.tagged_term * factor,
        )


@dataclass(frozen=True)
class RateInputs:
    """Inputs for the STR qubit rate.

    ``error_rates`` maps each basis vector u = (u_1, ..., u_{m+1}) (0 = Z,
    1 = X, one entry per link) to the observed error rate between Alice's
    raw key and Bob's corrected raw key.  ``key_entropy`` is the Shannon
    entropy of Alice's key data per basis combination; the default of one
    bit corresponds to uniformly random signal bits.
    """

    error_rates: Mapping[tuple[int, ...], float]
    p_z: float = 0.5
    f_ec: float = 1.0
    key_entropy: float | Mapping[tuple[int, ...], float] = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.p_z < 1.0:
            raise ValueError(f"p_z must lie in (0, 1), got {self.p_z}")
        if self.f_ec < 1.0:
            raise ValueError(f"f_ec must be >= 1, got {self.f_ec}")
        for u, e in self.error_rates.items():
            if not 0.0 <= e <= 1.0:
                raise ValueError(f"error rate for {u} out of [0, 1]: {e}")

    def entropy_for(self, u: tuple[int, ...]) -> float:
        if isinstance(self.key_entropy, Mapping):
            return self.key_entropy[u]
        return float(self.key_entropy)


def _link_basis_weight(p_z: float, u: int) -> float:
    # Probability that a sifted event in one link used basis u: both parties
    # chose u, renormalized over the two matching combinations.
    match = p_z * p_z + (1.0 - p_z) * (1.0 - p_z)
    w_z = p_z * p_z / match
    return w_z if u == 0 else 1.0 - w_z


def _basis_vector_weight(p_z: float, u: tuple[int, ...]) -> float:
    w = 1.0
    for ui in u:
        w *= _link_basis_weight(p_z, ui)
    return w


def str_rate_qubit(inputs: RateInputs, num_nodes: int) -> KeyRateReport:
    """STR key rate for a chain with ``num_nodes`` intermediate nodes.

    rate = sum_u p_u H(K^u) - f_EC sum_u p_u h(e^u) - sum_u p_~u h(e^u),
    where ~u complements every link's basis choice and p_u is the product of
    per-link basis weights.
    """
    links = num_nodes + 1
    expected = 1 << links
    if len(inputs.error_rates) != expected:
        raise ValueError(
            f"error-rate table must have {expected} entries for "
            f"{num_nodes} node(s), got {len(inputs.error_rates)}"
        )
    entropy = leak = holevo = 0.0
    for u, e in inputs.error_rates.items():
        if len(u) != links:
            raise ValueError(f"basis vector {u} has wrong length, expected {links}")
        p_u = _basis_vector_weight(inputs.p_z, u)
        u_comp = tuple(ui ^ 1 for ui in u)
        p_comp = _basis_vector_weight(inputs.p_z, u_comp)
        h_e = binary_entropy(e)
        entropy += p_u * inputs.entropy_for(u)
        leak += inputs.f_ec * p_u * h_e
        holevo += p_comp * h_e
    return KeyRateReport(entropy_term=entropy, leak_term=leak, holevo_term=holevo)


def node_focused_rate(
    key_entropies: Sequence[float] | float,
    leak: float,
    e_overall: float,
    num_nodes: int = 1,
) -> KeyRateReport:
    """Key rate for the variant where the single node defines the key map.

    Valid only for one node with uniformly chosen bases:
    rate = (1/4) sum_{u1,u2} H(K_T^{u1,u2}) - leak - h(e).
    """
    if num_nodes != 1:
        raise ValueError("node-focused rate is only defined for a single node")
    if isinstance(key_entropies, (int, float)):
        entropies = [float(key_entropies)] * 4
    else:
        entropies = [float(v) for v in key_entropies]
        if len(entropies) != 4:
            raise ValueError("need one key entropy per (u1, u2) combination")
    entropy = sum(entropies) / 4.0
    return KeyRateReport(
        entropy_term=entropy,
        leak_term=leak,
        holevo_term=binary_entropy(e_overall),
    )


def conventional_relay_rate(
    e_links: Sequence[float] | float, f_ec: float = 1.0
) -> KeyRateReport:
    """Conventional trusted-relay baseline: standard asymptotic BB84 rate per
    link, the chain limited by its worst link."""
    if isinstance(e_links, (int, float)):
        e_links = [float(e_links)]
    if not e_links:
        raise ValueError("need at least one link")
    worst: KeyRateReport | None = None
    for e in e_links:
        if not 0.0 <= e <= 0.5:
            raise ValueError(f"per-link error rate must lie in [0, 1/2], got {e}")
        h_e = binary_entropy(e)
        report = KeyRateReport(entropy_term=1.0, leak_term=f_ec * h_e, holevo_term=h_e)
        if worst is None or report.unclamped < worst.unclamped:
            worst = report
    assert worst is not None
    return worst


def _compound_error(e_link: float, links: int) -> float:
    # Probability of an odd number of independent flips; mirrors
    # relay.compound_error, duplicated to keep this module dependency-free.
    return 0.5 * (1.0 - (1.0 - 2.0 * e_link) ** links)


def fig2_curves(
    e_link_grid: Iterable[float], node_counts: Sequence[int] = (0, 1, 2)
) -> list[dict[str, float]]:
    """Rate-vs-link-error curves for the qubit model.

    For each per-link error rate: the conventional baseline (equal links, so
    a single-link rate) plus one STR curve per node count >= 1, each with all
    basis-vector error rates set to the compound per-link value, uniform
    bases, and Shannon-limit error correction.  A node count of 0 is the
    conventional baseline itself.
    """
    rows: list[dict[str, float]] = []
    for e_link in e_link_grid:
        row: dict[str, float] = {"e_link": float(e_link)}
        for m in node_counts:
            if m == 0:
                report = conventional_relay_rate(e_link, f_ec=1.0)
                row["rate_conventional"] = report.rate
                row["unclamped_conventional"] = report.unclamped
            else:
                e_total = _compound_error(e_link, m + 1)
                table = {
                    u: e_total
                    for u in _all_basis_vectors(m + 1)
                }
                report = str_rate_qubit(RateInputs(error_rates=table), num_nodes=m)
                row[f"rate_str{m}"] = report.rate
                row[f"unclamped_str{m}"] = report.unclamped
        rows.append(row)
    return rows


def _all_basis_vectors(links: int) -> list[tuple[int, ...]]:
    return [
        tuple((idx >> k) & 1 for k in range(links - 1, -1, -1))
        for idx in range(1 << links)
    ]
