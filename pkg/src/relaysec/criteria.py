"""Relay-selection criteria for the two-hop wiretap network.

Six selection rules are provided:

* ``channel-gain``: greedy two-pass selection on channel-gain traces.
* ``max-ratio``: single-antenna legitimate-to-eavesdropper gain ratios.
* ``sinr``: exhaustive search on per-stream signal-to-interference-plus-noise
  ratios of both hops (needs precoders and interference knowledge).
* ``sr``: exhaustive search on the two-hop secrecy score with full knowledge
  of the eavesdropper channels.
* ``s-sinr``: reduced SINR rule using only channel column norms.
* ``s-sr``: reduced secrecy rule whose eavesdropper term is computed from the
  precoders alone; eavesdropper channels are never read on this path.

Exhaustive rules score every T-combination of the relay pool. Each candidate
is scored under its own pair of zero-forcing precoders (source side for
phase 1, coordinated relay side for phase 2); :class:`CandidateSet` caches
the per-candidate channels, precoders and rate terms so several criteria can
share them on one realization (paired comparisons). Ties break toward the
candidate that enumerates first (lexicographic order).
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .model import (
    ChannelRealization,
    Precoder,
    SystemConfig,
    hermitize,
    zf_core_batch,
    zf_precoder,
)

_LN2 = math.log(2.0)
GRAM_CONDITION_LIMIT = 1e12
RIDGE_SCALE = 1e-10


class NotSingleAntennaError(ValueError):
    """max-ratio selection is defined only for single-antenna nodes."""


class SingularGramError(RuntimeError):
    """A sandwiched covariance was numerically singular."""


class SingularInterferenceError(RuntimeError):
    """Interference covariance stayed singular even after ridge loading."""


class NoViableCandidateError(RuntimeError):
    """Every candidate combination was numerically unusable."""


class CriterionKind(Enum):
    CHANNEL_GAIN = "channel-gain"
    MAX_RATIO = "max-ratio"
    SINR = "sinr"
    SECRECY_RATE = "sr"
    S_SINR = "s-sinr"
    S_SR = "s-sr"

    @classmethod
    def from_name(cls, name: str) -> "CriterionKind":
        for kind in cls:
            if kind.value == name:
                return kind
        names = ", ".join(k.value for k in cls)
        raise ValueError(f"unknown criterion {name!r}; expected one of: {names}")


CRITERION_NAMES = tuple(kind.value for kind in CriterionKind)

# Exhaustive rules share the candidate machinery; the other two are greedy.
EXHAUSTIVE_KINDS = (
    CriterionKind.SINR,
    CriterionKind.SECRECY_RATE,
    CriterionKind.S_SINR,
    CriterionKind.S_SR,
)


@dataclass(frozen=True)
class CriterionScore:
    """Hop metrics of the winning combination and their combined value."""

    eta1: float
    eta2: float
    combined: float


def combine_metrics(eta1, eta2, rule: str = "min"):
    """Scalarize the two hop metrics. ``min`` treats the weaker hop as the
    bottleneck; ``sum`` accumulates both."""
    if rule == "min":
        return np.minimum(eta1, eta2)
    if rule == "sum":
        return np.asarray(eta1) + np.asarray(eta2)
    raise ValueError(f"unknown combine rule {rule!r}; expected 'min' or 'sum'")


def enumerate_combinations(pool_size: int, selected: int) -> list:
    """All ``C(pool_size, selected)`` relay subsets in lexicographic order."""
    if selected > pool_size:
        raise ValueError(
            f"cannot select {selected} relays from a pool of {pool_size}"
        )
    return list(itertools.combinations(range(pool_size), selected))


# ---------------------------------------------------------------------------
# candidate cache
# ---------------------------------------------------------------------------


@dataclass
class CandidateSet:
    """Per-candidate channels, precoders and cached rate terms.

    ``hop1[c]`` stacks the members' source->relay blocks (square, N_t x N_t);
    ``hop2[c, u]`` concatenates the members' relay->user blocks for user
    ``u``. ``precoders[c]`` / ``relay_precoders[c]`` hold the candidate's
    scaled ZF matrices for the two hops; candidates where either hop's
    channel was singular have ``valid[c]`` False and identity placeholders so
    batched linear algebra stays finite.
    """

    config: SystemConfig
    combinations: list
    hop1: np.ndarray
    hop2: np.ndarray
    precoders: np.ndarray
    cores: np.ndarray
    relay_precoders: np.ndarray
    relay_cores: np.ndarray
    valid: np.ndarray
    residuals: np.ndarray
    _index: dict = field(default_factory=dict, repr=False)
    _cov1: tuple | None = field(default=None, repr=False)
    _cov2: tuple | None = field(default=None, repr=False)
    _legit_cache: dict = field(default_factory=dict, repr=False)
    _eve_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {combo: pos for pos, combo in enumerate(self.combinations)}

    def position(self, combination) -> int:
        return self._index[tuple(combination)]

    def precoder_for(self, combination) -> Precoder | None:
        """Source-side precoder of one candidate; None if it was singular."""
        pos = self.position(combination)
        if not self.valid[pos]:
            return None
        return Precoder(
            matrix=self.precoders[pos],
            core=self.cores[pos],
            signal_power=self.config.signal_power,
            user_antennas=self.config.user_antennas,
        )

    def relay_precoder_for(self, combination) -> Precoder | None:
        """Coordinated relay-side precoder of one candidate."""
        pos = self.position(combination)
        if not self.valid[pos]:
            return None
        return Precoder(
            matrix=self.relay_precoders[pos],
            core=self.relay_cores[pos],
            signal_power=self.config.signal_power,
            user_antennas=self.config.user_antennas,
        )

    def _user_split(self, matrices: np.ndarray) -> tuple:
        """Per-user desired/interference covariances for a precoder batch."""
        n_r = self.config.user_antennas
        total = matrices @ matrices.conj().transpose(0, 2, 1)
        rd = np.stack(
            [
                matrices[:, :, u * n_r:(u + 1) * n_r]
                @ matrices[:, :, u * n_r:(u + 1) * n_r].conj().transpose(0, 2, 1)
                for u in range(self.config.num_users)
            ],
            axis=1,
        )
        ri = hermitize(total[:, None, :, :] - rd)
        return hermitize(rd), ri

    def user_covariances(self) -> tuple:
        """Phase-1 ``(rd, ri)`` with shape ``(C, M, N_t, N_t)``, noise-free."""
        if self._cov1 is None:
            self._cov1 = self._user_split(self.precoders)
        return self._cov1

    def relay_covariances(self) -> tuple:
        """Phase-2 ``(rd, ri)`` of the relay-side precoders, noise-free."""
        if self._cov2 is None:
            self._cov2 = self._user_split(self.relay_precoders)
        return self._cov2

    def share_caches(self, other: "CandidateSet"):
        """Adopt ``other``'s mutable caches (channels must be identical)."""
        self._cov1 = other._cov1 or self._cov1
        self._cov2 = other._cov2 or self._cov2
        self._legit_cache = other._legit_cache
        self._eve_cache = other._eve_cache


def prepare_candidates(realization: ChannelRealization, config: SystemConfig,
                       combinations=None) -> CandidateSet:
    """Stack channels and build both ZF precoders for every candidate."""
    if combinations is None:
        combinations = enumerate_combinations(config.pool_size, config.selected_relays)
    combinations = [tuple(c) for c in combinations]
    pool = sorted(realization.source_to_relay)
    pos = {relay: p for p, relay in enumerate(pool)}
    src = np.stack([realization.source_to_relay[i] for i in pool])
    r2u = np.stack(
        [[realization.relay_to_user[(i, r)] for r in range(config.num_users)] for i in pool]
    )
    idx = np.array([[pos[i] for i in combo] for combo in combinations])
    n_t = config.transmit_antennas
    c = len(combinations)
    hop1 = src[idx].reshape(c, n_t, n_t)
    # (C, T, M, N_r, N_i) -> (C, M, N_r, T, N_i) -> concatenate member blocks
    hop2 = r2u[idx].transpose(0, 2, 3, 1, 4).reshape(
        c, config.num_users, config.user_antennas, n_t
    )
    matrix1, core1, valid1, residuals = zf_core_batch(hop1, config.signal_power)
    # All users' antennas stacked give a square phase-2 channel as well.
    hop2_all = hop2.reshape(c, n_t, n_t)
    matrix2, core2, valid2, _ = zf_core_batch(hop2_all, config.signal_power)
    valid = valid1 & valid2
    eye = np.eye(n_t, dtype=complex)
    matrix1 = np.where(valid[:, None, None], matrix1, eye)
    core1 = np.where(valid[:, None, None], core1, eye)
    matrix2 = np.where(valid[:, None, None], matrix2, eye)
    core2 = np.where(valid[:, None, None], core2, eye)
    return CandidateSet(
        config=config,
        combinations=combinations,
        hop1=hop1,
        hop2=hop2,
        precoders=matrix1,
        cores=core1,
        relay_precoders=matrix2,
        relay_cores=core2,
        valid=valid,
        residuals=residuals,
    )


# ---------------------------------------------------------------------------
# rate kernels
# ---------------------------------------------------------------------------


def _rate_bits(gram_num: np.ndarray, gram_den: np.ndarray) -> np.ndarray:
    """``log2 det(I + gram_den^{-1} gram_num)`` over batches of PSD grams.

    A singular denominator yields 0 when the numerator is also negligible
    (dead link) and +inf otherwise (unbounded ratio).
    """
    total = gram_den + gram_num
    sign_t, logdet_t = np.linalg.slogdet(total)
    sign_d, logdet_d = np.linalg.slogdet(gram_den)
    ok = (np.abs(sign_t) > 0.5) & (np.abs(sign_d) > 0.5)
    out = np.zeros(np.shape(ok))
    np.subtract(logdet_t, logdet_d, out=out, where=ok)
    out /= _LN2
    num_scale = np.max(np.abs(gram_num), axis=(-2, -1))
    den_scale = np.max(np.abs(gram_den), axis=(-2, -1))
    dead = ~ok & (num_scale <= 1e-14 * (1.0 + den_scale))
    out = np.where(~ok & ~dead, np.inf, out)
    return out


def _gram(channels: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Batched ``B @ cov @ B^H`` where rows of ``channels`` are streams."""
    return np.einsum("...ki,...ij,...lj->...kl", channels, cov, channels.conj())


def secrecy_gamma(channel: np.ndarray, cov_num: np.ndarray, cov_den: np.ndarray,
                  noise_power: float = 0.0) -> np.ndarray:
    """Generalized SINR matrix ``(H R_den H^H + s I)^{-1} (H R_num H^H)``.

    ``noise_power`` adds receiver noise outside the sandwich (set 0 for the
    criterion-side form where noise already sits inside ``cov_den``).
    """
    channel = np.asarray(channel)
    gram_den = channel @ cov_den @ channel.conj().T
    if noise_power:
        gram_den = gram_den + noise_power * np.eye(channel.shape[0])
    cond = np.linalg.cond(gram_den)
    if not np.isfinite(cond) or cond >= GRAM_CONDITION_LIMIT:
        raise SingularGramError(
            f"sandwiched covariance is numerically singular (cond {cond:.3e})"
        )
    gram_num = channel @ cov_num @ channel.conj().T
    return np.linalg.solve(gram_den, gram_num)


def gamma_rate_bits(channel, cov_num, cov_den, noise_power: float = 0.0) -> float:
    """``log2 det(I + gamma)`` for one destination, via the stable det ratio."""
    channel = np.asarray(channel)
    gram_den = channel @ cov_den @ channel.conj().T
    if noise_power:
        gram_den = gram_den + noise_power * np.eye(channel.shape[0])
    gram_num = channel @ cov_num @ channel.conj().T
    return float(_rate_bits(gram_num[None], gram_den[None])[0])


def ssr_eve_term(precoder: Precoder, own_user: int, interference: np.ndarray,
                 symbol_covariance: np.ndarray | None = None) -> float:
    """Eavesdropper-side log-det term computed without eavesdropper channels.

    ``log2 det(I + U_u^H R^{-1} U_u S)`` where ``R`` is the interference
    covariance seen by the eavesdroppers (plus noise, when the caller keeps
    it) and ``S`` the symbol covariance (identity for unit-power streams).
    Nearly singular ``R`` gets a trace-scaled ridge before giving up.
    """
    r = np.asarray(interference)
    n_t = r.shape[0]
    cond = np.linalg.cond(r)
    if not np.isfinite(cond) or cond >= GRAM_CONDITION_LIMIT:
        ridge = RIDGE_SCALE * np.real(np.trace(r)) / n_t
        r = r + ridge * np.eye(n_t)
        cond = np.linalg.cond(r)
        if ridge <= 0 or not np.isfinite(cond) or cond >= GRAM_CONDITION_LIMIT:
            raise SingularInterferenceError(
                "interference covariance is singular and ridge loading failed; "
                "include the noise term or pass a better-conditioned covariance"
            )
    u_u = precoder.user_block(own_user)
    inner = u_u.conj().T @ np.linalg.solve(r, u_u)
    if symbol_covariance is not None:
        inner = inner @ symbol_covariance
    sign, logdet = np.linalg.slogdet(np.eye(inner.shape[0]) + inner)
    if np.abs(sign) < 0.5:
        raise SingularInterferenceError("eavesdropper-side determinant vanished")
    return float(logdet / _LN2)


# ---------------------------------------------------------------------------
# per-candidate stream metrics (operation surface)
# ---------------------------------------------------------------------------


def sinr_relay_metric(realization: ChannelRealization, precoder: Precoder,
                      combination, config: SystemConfig,
                      aggregate: str = "min") -> float:
    """First-hop SINR metric of one candidate combination.

    Per relay antenna ``l`` the SINR is ``(h^H R_d h) / (h^H R_I h + s_n^2)``
    with ``h`` the antenna's channel row and the covariances taken for the
    user whose stream the antenna carries. Antenna values are averaged per
    relay; ``aggregate`` reduces over the members (``min`` scores the
    bottleneck relay, ``max`` the literal best member).
    """
    h = realization.stacked_source_channel(combination)
    noise = config.noise_power
    total = precoder.matrix @ precoder.matrix.conj().T
    rd = [None] * config.num_users
    per_stream = np.empty(h.shape[0])
    for stream in range(h.shape[0]):
        user = config.stream_user(stream)
        if rd[user] is None:
            u_u = precoder.user_block(user)
            rd[user] = u_u @ u_u.conj().T
        row = h[stream]
        num = float(np.real(row @ rd[user] @ row.conj()))
        den = float(np.real(row @ (total - rd[user]) @ row.conj())) + noise
        if den <= 0:
            warnings.warn("zero SINR denominator: noiseless stream with no "
                          "interference projection", RuntimeWarning)
            per_stream[stream] = np.inf
        else:
            per_stream[stream] = num / den
    per_relay = per_stream.reshape(len(combination), config.relay_antennas).mean(axis=1)
    return float(per_relay.min() if aggregate == "min" else per_relay.max())


def sinr_user_metric(realization: ChannelRealization, combination, config: SystemConfig,
                     relay_output_covariance: np.ndarray | None = None,
                     aggregate: str = "min") -> float:
    """Second-hop SINR metric of one candidate combination.

    By default the selected relays re-transmit through their coordinated
    zero-forcing precoder, so the per-user covariances mirror the first hop.
    Passing ``relay_output_covariance`` replaces the numerator covariance
    with an explicit relay output covariance (the interference model stays).
    """
    noise = config.noise_power
    stacked = realization.all_users_channel(combination, config.num_users)
    v = zf_precoder(stacked, config.signal_power, config.user_antennas)
    total = v.matrix @ v.matrix.conj().T
    per_user = np.empty(config.num_users)
    n_r = config.user_antennas
    for user in range(config.num_users):
        h2 = stacked[user * n_r:(user + 1) * n_r, :]
        v_u = v.user_block(user)
        own = v_u @ v_u.conj().T
        ratios = np.empty(n_r)
        for n in range(n_r):
            row = h2[n]
            if relay_output_covariance is None:
                num = float(np.real(row @ own @ row.conj()))
            else:
                num = float(np.real(row @ relay_output_covariance @ row.conj()))
            den = float(np.real(row @ (total - own) @ row.conj())) + noise
            if den <= 0:
                warnings.warn("zero SINR denominator on the second hop", RuntimeWarning)
                ratios[n] = np.inf
            else:
                ratios[n] = num / den
        per_user[user] = ratios.mean()
    return float(per_user.min() if aggregate == "min" else per_user.max())


def ssinr_metric(channel_block: np.ndarray) -> float:
    """Weakest-stream squared gain: min over columns of the column norm^2.

    Needs only the channel block itself; no interference covariance and no
    eavesdropper information.
    """
    block = np.asarray(channel_block)
    return float(np.min(np.sum(np.abs(block) ** 2, axis=0)))


# ---------------------------------------------------------------------------
# batched exhaustive scorers
# ---------------------------------------------------------------------------


def _per_stream(cov_user: np.ndarray, config: SystemConfig) -> np.ndarray:
    """Expand (C, M, n, n) per-user covariances to (C, streams, n, n)."""
    users = np.repeat(np.arange(config.num_users), config.user_antennas)
    return cov_user[:, users]


def _stream_sinr(rows: np.ndarray, rd: np.ndarray, ri: np.ndarray,
                 noise: float) -> np.ndarray:
    num = np.real(np.einsum("cki,ckij,ckj->ck", rows, rd, rows.conj()))
    den = np.real(np.einsum("cki,ckij,ckj->ck", rows, ri, rows.conj())) + noise
    with np.errstate(divide="ignore"):
        return np.where(den > 0, num / den, np.inf)


def _score_sinr(cs: CandidateSet, config: SystemConfig, combine: str,
                aggregate: str = "min"):
    noise = config.noise_power
    rd1, ri1 = cs.user_covariances()
    sinr1 = _stream_sinr(cs.hop1, _per_stream(rd1, config), _per_stream(ri1, config),
                         noise)
    per_relay = sinr1.reshape(len(cs.combinations), config.selected_relays,
                              config.relay_antennas).mean(axis=2)
    eta1 = per_relay.min(axis=1) if aggregate == "min" else per_relay.max(axis=1)

    rd2, ri2 = cs.relay_covariances()
    rows2 = cs.hop2.reshape(cs.hop1.shape)
    sinr2 = _stream_sinr(rows2, _per_stream(rd2, config), _per_stream(ri2, config),
                         noise)
    per_user = sinr2.reshape(len(cs.combinations), config.num_users,
                             config.user_antennas).mean(axis=2)
    eta2 = per_user.min(axis=1) if aggregate == "min" else per_user.max(axis=1)
    combined = combine_metrics(eta1, eta2, combine)
    combined = np.where(cs.valid, combined, -np.inf)
    return eta1, eta2, combined


def _score_ssinr(cs: CandidateSet, config: SystemConfig, combine: str,
                 aggregate: str = "min"):
    # Channel-norm metrics only; precoder validity does not constrain them
    # and the aggregate flag has no effect on a plain min over streams.
    eta1 = np.min(np.sum(np.abs(cs.hop1) ** 2, axis=2), axis=1)
    eta2 = np.min(np.sum(np.abs(cs.hop2) ** 2, axis=3), axis=(1, 2))
    combined = combine_metrics(eta1, eta2, combine)
    return eta1, eta2, combined


def _legit_rates(cs: CandidateSet, config: SystemConfig):
    """Per-user first- and second-hop log-det rates of every candidate.

    Same convention as the evaluation side: interference sandwiched by the
    destination channel, receiver noise added at the destination antennas.
    """
    noise = config.noise_power
    cached = cs._legit_cache.get(noise)
    if cached is not None:
        return cached
    rd1, ri1 = cs.user_covariances()
    rd2, ri2 = cs.relay_covariances()
    n_r = config.user_antennas
    eye = np.eye(n_r)
    rate1 = np.empty((len(cs.combinations), config.num_users))
    rate2 = np.empty_like(rate1)
    for u in range(config.num_users):
        rows = cs.hop1[:, u * n_r:(u + 1) * n_r, :]
        rate1[:, u] = _rate_bits(_gram(rows, rd1[:, u]),
                                 _gram(rows, ri1[:, u]) + noise * eye)
        rows2 = cs.hop2[:, u]
        rate2[:, u] = _rate_bits(_gram(rows2, rd2[:, u]),
                                 _gram(rows2, ri2[:, u]) + noise * eye)
    cs._legit_cache[noise] = (rate1, rate2)
    return rate1, rate2


def _eve_terms_full(cs: CandidateSet, eve_stack: np.ndarray, config: SystemConfig):
    """Eavesdropper log-det terms from the stacked eavesdropper channel."""
    key = ("full", config.noise_power)
    cached = cs._eve_cache.get(key)
    if cached is not None:
        return cached
    rd1, ri1 = cs.user_covariances()
    noise = config.noise_power
    eye = np.eye(config.transmit_antennas)
    out = np.empty((len(cs.combinations), config.num_users))
    for u in range(config.num_users):
        r_in = ri1[:, u] + noise * eye
        gram_den = np.einsum("ki,cij,lj->ckl", eve_stack, r_in, eve_stack.conj())
        gram_num = np.einsum("ki,cij,lj->ckl", eve_stack, rd1[:, u], eve_stack.conj())
        out[:, u] = _rate_bits(gram_num, gram_den)
    cs._eve_cache[key] = out
    return out


def _eve_terms_reduced(cs: CandidateSet, config: SystemConfig):
    """Eavesdropper log-det terms from precoders and symbol statistics alone."""
    key = ("reduced", config.noise_power)
    cached = cs._eve_cache.get(key)
    if cached is not None:
        return cached
    _, ri1 = cs.user_covariances()
    noise = config.noise_power
    n_r = config.user_antennas
    eye = np.eye(config.transmit_antennas)
    out = np.empty((len(cs.combinations), config.num_users))
    for u in range(config.num_users):
        r_in = ri1[:, u] + noise * eye
        u_u = cs.precoders[:, :, u * n_r:(u + 1) * n_r]
        inner = u_u.conj().transpose(0, 2, 1) @ np.linalg.solve(r_in, u_u)
        sign, logdet = np.linalg.slogdet(np.eye(n_r) + inner)
        out[:, u] = np.where(np.abs(sign) > 0.5, logdet / _LN2, np.inf)
    cs._eve_cache[key] = out
    return out


def _score_secrecy(cs: CandidateSet, config: SystemConfig, combine: str,
                   eve_terms: np.ndarray):
    rate1, rate2 = _legit_rates(cs, config)
    legit1 = rate1.sum(axis=1)
    legit2 = rate2.sum(axis=1)
    eve = eve_terms.sum(axis=1)
    eta1 = legit1 - eve
    eta2 = legit2 - eve
    combined = combine_metrics(eta1, eta2, combine)
    bad = ~np.isfinite(legit1) | ~np.isfinite(legit2) | ~cs.valid
    combined = np.where(bad, -np.inf, combined)
    return eta1, eta2, combined


def _score_sr(cs: CandidateSet, realization: ChannelRealization,
              config: SystemConfig, combine: str):
    eve_stack = realization.stacked_eve_channel()
    return _score_secrecy(cs, config, combine, _eve_terms_full(cs, eve_stack, config))


def _score_ssr(cs: CandidateSet, config: SystemConfig, combine: str):
    return _score_secrecy(cs, config, combine, _eve_terms_reduced(cs, config))


def score_candidates(kind: CriterionKind, realization: ChannelRealization,
                     config: SystemConfig, candidates: CandidateSet | None = None,
                     combine: str = "min", aggregate: str = "min"):
    """Score every candidate under an exhaustive criterion.

    Returns ``(candidate_set, eta1, eta2, combined)`` arrays aligned with
    ``candidate_set.combinations``. Greedy criteria (channel-gain, max-ratio)
    do not enumerate candidates and are rejected here.
    """
    if kind not in EXHAUSTIVE_KINDS:
        raise ValueError(f"{kind.value} does not score the full candidate list")
    cs = candidates if candidates is not None else prepare_candidates(realization, config)
    if kind is CriterionKind.SINR:
        eta1, eta2, combined = _score_sinr(cs, config, combine, aggregate)
    elif kind is CriterionKind.S_SINR:
        eta1, eta2, combined = _score_ssinr(cs, config, combine, aggregate)
    elif kind is CriterionKind.SECRECY_RATE:
        eta1, eta2, combined = _score_sr(cs, realization, config, combine)
    else:
        eta1, eta2, combined = _score_ssr(cs, config, combine)
    return cs, eta1, eta2, combined


def _pick_best(cs: CandidateSet, eta1, eta2, combined):
    best = int(np.argmax(combined))
    if not np.isfinite(combined[best]):
        raise NoViableCandidateError(
            "all candidate combinations were numerically singular; redraw"
        )
    score = CriterionScore(float(eta1[best]), float(eta2[best]), float(combined[best]))
    return cs.combinations[best], score


# ---------------------------------------------------------------------------
# selection entry points
# ---------------------------------------------------------------------------


def channel_gain_select(realization: ChannelRealization, config: SystemConfig,
                        combine: str = "min"):
    """Greedy two-pass selection on channel-gain traces.

    Pass one picks the ``T`` relays with the largest source-side
    ``trace(H H^H)``, each pickable once. Pass two walks the users and
    scores, among the picked relays still holding a pick token, the best
    relay->user trace. Ties fall to the lowest relay index.
    """
    pool = sorted(realization.source_to_relay)
    theta1 = {
        i: float(np.sum(np.abs(realization.source_to_relay[i]) ** 2)) for i in pool
    }
    order = sorted(pool, key=lambda i: (-theta1[i], i))
    picked = order[:config.selected_relays]
    eta1 = float(sum(theta1[i] for i in picked))
    tokens = {i: 1 for i in picked}
    eta2 = 0.0
    for user in range(config.num_users):
        available = [i for i in picked if tokens[i] != 0]
        if not available:
            break
        theta2 = {
            i: float(np.sum(np.abs(realization.relay_to_user[(i, user)]) ** 2))
            for i in available
        }
        winner = sorted(available, key=lambda i: (-theta2[i], i))[0]
        eta2 += theta2[winner]
        tokens[winner] -= 1
    combo = tuple(sorted(picked))
    combined = float(combine_metrics(eta1, eta2, combine))
    return combo, CriterionScore(eta1, eta2, combined)


def max_ratio_select(realization: ChannelRealization, config: SystemConfig,
                     combine: str = "min"):
    """Legitimate-to-eavesdropper gain-ratio selection (single-antenna only).

    Per relay, the first-hop metric is its source-side gain over the total
    source->eavesdropper gain and the second-hop metric its user-side gain
    over its own relay->eavesdropper gain. The ``T`` relays with the best
    combined ratio are kept. All relays are always eligible (no buffer
    state is tracked).
    """
    if (config.relay_antennas, config.user_antennas, config.eve_antennas) != (1, 1, 1):
        raise NotSingleAntennaError(
            "max-ratio selection requires relay_antennas == user_antennas == "
            "eve_antennas == 1"
        )
    pool = sorted(realization.source_to_relay)
    se_gain = float(sum(np.sum(np.abs(realization.eve_channel(k)) ** 2)
                        for k in range(config.num_eves)))
    m1 = {}
    m2 = {}
    for i in pool:
        gain_src = float(np.sum(np.abs(realization.source_to_relay[i]) ** 2))
        m1[i] = gain_src / se_gain if se_gain > 0 else np.inf
        gain_user = float(sum(np.sum(np.abs(realization.relay_to_user[(i, r)]) ** 2)
                              for r in range(config.num_users)))
        gain_eve = float(sum(np.sum(np.abs(realization.relay_to_eve[(i, k)]) ** 2)
                             for k in range(config.num_eves)))
        m2[i] = gain_user / gain_eve if gain_eve > 0 else np.inf
    scored = sorted(pool, key=lambda i: (-float(combine_metrics(m1[i], m2[i], combine)), i))
    picked = scored[:config.selected_relays]
    eta1 = float(max(m1[i] for i in picked))
    eta2 = float(max(m2[i] for i in picked))
    combo = tuple(sorted(picked))
    combined = float(combine_metrics(eta1, eta2, combine))
    return combo, CriterionScore(eta1, eta2, combined)


def sinr_select(realization: ChannelRealization, config: SystemConfig,
                candidates: CandidateSet | None = None, combine: str = "min",
                aggregate: str = "min"):
    """Exhaustive selection on the two-hop SINR metrics."""
    return _pick_best(*score_candidates(CriterionKind.SINR, realization, config,
                                        candidates, combine, aggregate))


def ssinr_select(realization: ChannelRealization, config: SystemConfig,
                 candidates: CandidateSet | None = None, combine: str = "min"):
    """Exhaustive selection on weakest-stream channel norms (both hops)."""
    return _pick_best(*score_candidates(CriterionKind.S_SINR, realization, config,
                                        candidates, combine))


def sr_select(realization: ChannelRealization, config: SystemConfig,
              candidates: CandidateSet | None = None, combine: str = "min"):
    """Exhaustive selection on the full-knowledge secrecy score."""
    return _pick_best(*score_candidates(CriterionKind.SECRECY_RATE, realization,
                                        config, candidates, combine))


def ssr_select(realization: ChannelRealization, config: SystemConfig,
               candidates: CandidateSet | None = None, combine: str = "min"):
    """Exhaustive selection on the reduced secrecy score.

    The realization is stripped of its eavesdropper channels before scoring,
    so this code path cannot read them by construction.
    """
    blind = realization.without_eavesdroppers()
    return _pick_best(*score_candidates(CriterionKind.S_SR, blind, config,
                                        candidates, combine))


def select(kind: CriterionKind, realization: ChannelRealization, config: SystemConfig,
           candidates: CandidateSet | None = None, combine: str = "min",
           aggregate: str = "min"):
    """Run one selection criterion and return ``(combination, score)``."""
    if isinstance(kind, str):
        kind = CriterionKind.from_name(kind)
    if kind is CriterionKind.CHANNEL_GAIN:
        return channel_gain_select(realization, config, combine)
    if kind is CriterionKind.MAX_RATIO:
        return max_ratio_select(realization, config, combine)
    if kind is CriterionKind.SINR:
        return sinr_select(realization, config, candidates, combine, aggregate)
    if kind is CriterionKind.S_SINR:
        return ssinr_select(realization, config, candidates, combine)
    if kind is CriterionKind.SECRECY_RATE:
        return sr_select(realization, config, candidates, combine)
    return ssr_select(realization, config, candidates, combine)
