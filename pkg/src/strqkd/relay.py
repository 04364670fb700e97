"""Monte Carlo execution of the simplified-trusted-relay protocol.

A chain of m intermediate nodes is m+1 point-to-point links.  Each link is a
classical stochastic channel: the sender draws a basis and a uniform bit, the
receiver independently draws a basis, the event is detected with a fixed
probability, and the received bit is flipped with a fixed probability.
Sifting keeps events with matching bases and a detection, reading only bases
and detection flags.  Surviving events are paired across links in order of
survival (truncated to the shortest link), nodes announce per-index parities,
and Bob's corrected key is compared against Alice's to fill the
2^(m+1)-entry basis-vector error table.

Randomness is drawn from per-(link, block) Philox substreams keyed on the
scenario seed, so results are bit-identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ChainConfig",
    "SiftedLinkData",
    "PairedData",
    "ErrorRateTable",
    "run_quantum_phase",
    "pair_and_announce",
    "correct_and_estimate",
    "compound_error",
    "run_protocol",
]

BLOCK_SIZE = 1 << 16


@dataclass(frozen=True)
class ChainConfig:
    """Scenario parameters for one protocol run."""

    num_nodes: int
    rounds: int
    flip_prob: float
    detect_prob: float = 1.0
    p_z: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_nodes < 0:
            raise ValueError(f"num_nodes must be >= 0, got {self.num_nodes}")
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if not 0.0 <= self.flip_prob <= 0.5:
            raise ValueError(f"flip_prob must lie in [0, 1/2], got {self.flip_prob}")
        if not 0.0 < self.detect_prob <= 1.0:
            raise ValueError(f"detect_prob must lie in (0, 1], got {self.detect_prob}")
        if not 0.0 <= self.p_z <= 1.0:
            raise ValueError(f"p_z must lie in [0, 1], got {self.p_z}")

    @property
    def num_links(self) -> int:
        return self.num_nodes + 1


@dataclass
class SiftedLinkData:
    """Post-sifting events of one link, in round order."""

    round_index: np.ndarray  # int64
    basis: np.ndarray  # uint8, 0 = Z / 1 = X
    sent: np.ndarray  # uint8
    received: np.ndarray  # uint8

    def __len__(self) -> int:
        return len(self.round_index)


@dataclass
class PairedData:
    """Index-aligned events across all links after pairing.

    ``bases`` has one column per link; ``parities`` one column per node.
    ``empty`` flags a chain where some link had no survivors.
    """

    alice_bits: np.ndarray
    bob_bits: np.ndarray
    bases: np.ndarray  # shape (n, links)
    parities: np.ndarray  # shape (n, nodes)
    empty: bool = False


@dataclass
class ErrorRateTable:
    """Error and sample counts per basis vector u = (u_1, ..., u_{m+1})."""

    counts: dict[tuple[int, ...], tuple[int, int]] = field(default_factory=dict)

    def rate(self, u: tuple[int, ...]) -> float:
        errors, total = self.counts[u]
        return errors / total if total else 0.0

    def rates(self) -> dict[tuple[int, ...], float]:
        return {u: self.rate(u) for u in sorted(self.counts)}

    def total_errors(self) -> int:
        return sum(e for e, _ in self.counts.values())

    def total_samples(self) -> int:
        return sum(n for _, n in self.counts.values())


def _link_block(cfg: ChainConfig, link: int, block: int) -> SiftedLinkData:
    start = block * BLOCK_SIZE
    n = min(BLOCK_SIZE, cfg.rounds - start)
    rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(link, block)))
    )
    draws = rng.random((5, n))
    sender_basis = (draws[0] >= cfg.p_z).astype(np.uint8)
    sender_bit = (draws[1] < 0.5).astype(np.uint8)
    receiver_basis = (draws[2] >= cfg.p_z).astype(np.uint8)
    detected = draws[3] < cfg.detect_prob
    flipped = draws[4] < cfg.flip_prob
    # Sifting looks only at bases and detection flags, never at bit values.
    keep = detected & (sender_basis == receiver_basis)
    received = sender_bit ^ flipped.astype(np.uint8)
    idx = np.nonzero(keep)[0]
    return SiftedLinkData(
        round_index=(start + idx).astype(np.int64),
        basis=sender_basis[idx],
        sent=sender_bit[idx],
        received=received[idx],
    )


def run_quantum_phase(cfg: ChainConfig, workers: int = 1) -> list[SiftedLinkData]:
    """Simulate point-to-point data creation and sifting for every link."""
    num_blocks = (cfg.rounds + BLOCK_SIZE - 1) // BLOCK_SIZE
    tasks = [(link, block) for link in range(cfg.num_links) for block in range(num_blocks)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pieces = list(pool.map(lambda t: _link_block(cfg, *t), tasks))
    else:
        pieces = [_link_block(cfg, *t) for t in tasks]
    links: list[SiftedLinkData] = []
    for link in range(cfg.num_links):
        chunk = pieces[link * num_blocks : (link + 1) * num_blocks]
        links.append(
            SiftedLinkData(
                round_index=np.concatenate([c.round_index for c in chunk]),
                basis=np.concatenate([c.basis for c in chunk]),
                sent=np.concatenate([c.sent for c in chunk]),
                received=np.concatenate([c.received for c in chunk]),
            )
        )
    return links


def pair_and_announce(links: list[SiftedLinkData]) -> PairedData:
    """Pair the i-th survivor of each link and compute node parities.

    Node j's parity combines its receive bit from link j with its
    independently prepared send bit for link j+1.
    """
    if not links:
        raise ValueError("need at least one link")
    n = min(len(link) for link in links)
    if n == 0:
        return PairedData(
            alice_bits=np.empty(0, dtype=np.uint8),
            bob_bits=np.empty(0, dtype=np.uint8),
            bases=np.empty((0, len(links)), dtype=np.uint8),
            parities=np.empty((0, len(links) - 1), dtype=np.uint8),
            empty=True,
        )
    bases = np.column_stack([link.basis[:n] for link in links])
    parities = np.column_stack(
        [links[j].received[:n] ^ links[j + 1].sent[:n] for j in range(len(links) - 1)]
    ) if len(links) > 1 else np.empty((n, 0), dtype=np.uint8)
    return PairedData(
        alice_bits=links[0].sent[:n],
        bob_bits=links[-1].received[:n],
        bases=bases,
        parities=parities,
    )


def correct_and_estimate(paired: PairedData) -> ErrorRateTable:
    """Apply parity corrections and bin disagreements by basis vector."""
    links = paired.bases.shape[1]
    table = ErrorRateTable(
        counts={_u_vector(i, links): (0, 0) for i in range(1 << links)}
    )
    if paired.empty or len(paired.alice_bits) == 0:
        return table
    corrected = paired.bob_bits.copy()
    for j in range(paired.parities.shape[1]):
        corrected ^= paired.parities[:, j]
    errors = paired.alice_bits != corrected
    weights = (1 << np.arange(links - 1, -1, -1)).astype(np.int64)
    codes = paired.bases.astype(np.int64) @ weights
    total_per = np.bincount(codes, minlength=1 << links)
    error_per = np.bincount(codes, weights=errors.astype(np.int64), minlength=1 << links)
    for i in range(1 << links):
        table.counts[_u_vector(i, links)] = (int(error_per[i]), int(total_per[i]))
    return table


def _u_vector(code: int, links: int) -> tuple[int, ...]:
    return tuple((code >> k) & 1 for k in range(links - 1, -1, -1))


def compound_error(e_link: float, links: int) -> float:
    """Probability of an odd number of independent per-link flips:
    (1 - (1 - 2 e_link)^links) / 2."""
    if not 0.0 <= e_link <= 0.5:
        raise ValueError(f"e_link must lie in [0, 1/2], got {e_link}")
    if links < 1:
        raise ValueError(f"links must be >= 1, got {links}")
    return 0.5 * (1.0 - (1.0 - 2.0 * e_link) ** links)


def run_protocol(cfg: ChainConfig, workers: int = 1) -> tuple[ErrorRateTable, list[int]]:
    """Full pipeline: quantum phase, pairing, correction, estimation.

    Returns the error table and per-link survivor counts.
    """
    links = run_quantum_phase(cfg, workers=workers)
    paired = pair_and_announce(links)
    return correct_and_estimate(paired), [len(link) for link in links]
