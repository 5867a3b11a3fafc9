"""End-to-end secrecy-rate evaluation of a chosen relay combination.

This is the measurement side of the simulator: whichever criterion picked
the combination, the achieved rates are computed here from the ground-truth
channels (eavesdropper blocks included). Rates are log-det mutual-information
terms with receiver noise added at the destination antennas; the two-hop
legitimate rate is the bottleneck of the hops, and the half-duplex two-slot
protocol contributes a factor 1/2 unless disabled.

Phase 2 uses the coordinated relay re-transmission: the selected relays
jointly apply a zero-forcing precoder on the stacked user channels, exactly
mirroring the source-side precoding of phase 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model
from .criteria import _rate_bits
from .model import ChannelRealization, Precoder, SystemConfig

EVE_MODELS = ("phase1", "both")
EVE_AGGREGATES = ("sum", "max")


@dataclass(frozen=True)
class SecrecySample:
    """Achieved rates of one (realization, combination) evaluation."""

    criterion: str
    snr_db: float
    secrecy_rate: float
    legit_rate: float
    eve_rate: float
    combination: tuple


def _split_covariances(matrix: np.ndarray, num_users: int, user_antennas: int):
    """Per-user desired and interference covariances of one precoder."""
    total = matrix @ matrix.conj().T
    rd = np.stack([
        matrix[:, u * user_antennas:(u + 1) * user_antennas]
        @ matrix[:, u * user_antennas:(u + 1) * user_antennas].conj().T
        for u in range(num_users)
    ])
    ri = total[None] - rd
    return rd, ri


def _per_user_rates(channels: np.ndarray, rd: np.ndarray, ri: np.ndarray,
                    noise: float) -> np.ndarray:
    """log-det rates of stacked per-user channels against covariance pairs.

    ``channels`` is (M, k, n); receiver noise enters outside the sandwich.
    """
    eye = np.eye(channels.shape[1])
    gram_num = np.einsum("uki,uij,ulj->ukl", channels, rd, channels.conj())
    gram_den = np.einsum("uki,uij,ulj->ukl", channels, ri, channels.conj()) + noise * eye
    return np.maximum(_rate_bits(gram_num, gram_den), 0.0)


def _cross_rates(channels: np.ndarray, rd: np.ndarray, ri: np.ndarray,
                 noise: float) -> np.ndarray:
    """(K, M) intercept rates of observer channels against per-user pairs."""
    eye = np.eye(channels.shape[1])
    gram_num = np.einsum("kei,uij,kfj->kuef", channels, rd, channels.conj())
    gram_den = np.einsum("kei,uij,kfj->kuef", channels, ri, channels.conj()) + noise * eye
    return np.maximum(_rate_bits(gram_num, gram_den), 0.0)


def _resolve_relay_precoder(realization, combination, config, relay_pre):
    if relay_pre is not None:
        return relay_pre
    return model.relay_precoder(realization, combination, config)


def legit_rate(realization: ChannelRealization, precoder: Precoder, combination,
               config: SystemConfig, half_duplex: bool = True,
               relay_pre: Precoder | None = None) -> float:
    """Legitimate rate of the two-hop link, bits/s/Hz.

    Sum over users of the per-hop log-det rates, bottlenecked over the hops,
    times the two-slot factor.
    """
    noise = config.noise_power
    m, n_r = config.num_users, config.user_antennas
    relay_pre = _resolve_relay_precoder(realization, combination, config, relay_pre)

    rd1, ri1 = _split_covariances(precoder.matrix, m, n_r)
    hop1_channels = realization.stacked_source_channel(combination).reshape(m, n_r, -1)
    hop1 = float(_per_user_rates(hop1_channels, rd1, ri1, noise).sum())

    rd2, ri2 = _split_covariances(relay_pre.matrix, m, n_r)
    hop2_channels = realization.all_users_channel(combination, m).reshape(m, n_r, -1)
    hop2 = float(_per_user_rates(hop2_channels, rd2, ri2, noise).sum())

    rate = min(hop1, hop2)
    return 0.5 * rate if half_duplex else rate


def eve_rate(realization: ChannelRealization, precoder: Precoder, combination,
             config: SystemConfig, half_duplex: bool = True,
             eve_model: str = "both", eve_aggregate: str = "sum",
             relay_pre: Precoder | None = None) -> float:
    """Total eavesdropper intercept rate, bits/s/Hz.

    Every eavesdropper always overhears phase 1 through its source-side
    channel; with ``eve_model="both"`` it also overhears the relays' phase-2
    transmission. Per eavesdropper the per-user intercept rates accumulate;
    eavesdroppers combine by ``sum`` (default) or worst-case ``max``.
    Evaluation always uses the true eavesdropper channels, even for criteria
    that selected without them.
    """
    if eve_model not in EVE_MODELS:
        raise ValueError(f"eve_model must be one of {EVE_MODELS}, got {eve_model!r}")
    if eve_aggregate not in EVE_AGGREGATES:
        raise ValueError(
            f"eve_aggregate must be one of {EVE_AGGREGATES}, got {eve_aggregate!r}"
        )
    noise = config.noise_power
    m, n_r = config.num_users, config.user_antennas
    k = config.num_eves

    rd1, ri1 = _split_covariances(precoder.matrix, m, n_r)
    eve1 = np.stack([realization.eve_channel(i) for i in range(k)])
    per_eve = _cross_rates(eve1, rd1, ri1, noise).sum(axis=1)

    if eve_model == "both":
        relay_pre = _resolve_relay_precoder(realization, combination, config, relay_pre)
        rd2, ri2 = _split_covariances(relay_pre.matrix, m, n_r)
        eve2 = np.stack([realization.relay_eve_channel(combination, i) for i in range(k)])
        per_eve = per_eve + _cross_rates(eve2, rd2, ri2, noise).sum(axis=1)

    rate = float(per_eve.sum() if eve_aggregate == "sum" else per_eve.max())
    return 0.5 * rate if half_duplex else rate


def secrecy_rate(realization: ChannelRealization, precoder: Precoder, combination,
                 config: SystemConfig, criterion: str = "",
                 half_duplex: bool = True, clamp: bool = True,
                 eve_model: str = "both", eve_aggregate: str = "sum",
                 relay_pre: Precoder | None = None) -> SecrecySample:
    """Achieved secrecy rate: legitimate rate minus eavesdropper rate.

    Clamped at zero by default (an overheard link conveys no secret bits);
    set ``clamp=False`` for the signed difference.
    """
    relay_pre = _resolve_relay_precoder(realization, combination, config, relay_pre)
    legit = legit_rate(realization, precoder, combination, config, half_duplex,
                       relay_pre)
    eve = eve_rate(realization, precoder, combination, config, half_duplex,
                   eve_model, eve_aggregate, relay_pre)
    diff = legit - eve
    if clamp:
        diff = max(diff, 0.0)
    return SecrecySample(
        criterion=str(criterion),
        snr_db=config.snr_db,
        secrecy_rate=float(diff),
        legit_rate=float(legit),
        eve_rate=float(eve),
        combination=tuple(combination),
    )
