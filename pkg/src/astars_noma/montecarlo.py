"""Exact Monte Carlo simulation of the two-sided amplifying-surface NOMA
signal model, plus the orthogonal-access and passive-surface baselines and
the power-budget fairness mapping.

This simulator is the ground truth the closed forms are validated against:
it draws the actual Rician fades, the actual per-element thermal noise
(phase-unaligned, unlike the analysis, which substitutes the mean power
zeta sigma_s^2 - flip ``mean_noise_mode`` to isolate that approximation),
the exponential residual-interference power, and the disk-law user
distances.

Determinism contract: trials are partitioned into fixed-size blocks and
each block draws from its own counter-based substream keyed by
(seed, block index).  Per-block partials are reduced in block order with
exact (fsum) accumulation, so results are bit-identical for a given
(config, seed) regardless of the worker count used to compute the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .analytic import SicMode, target_sinr
from .model import ConfigError, NetworkConfig, noise_power_factor, sample_distance

__all__ = [
    "BLOCK_TRIALS",
    "Estimate",
    "SCHEMES",
    "SinrSet",
    "TrialDraw",
    "baseline_estimate",
    "budget_to_ps",
    "draw_trial",
    "estimate_ergodic",
    "estimate_outage",
    "simulate",
    "sinr_set",
    "surface_output_power",
]

BLOCK_TRIALS = 8192

SCHEMES = ("astars_noma", "astars_oma", "pstars_noma")

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class TrialDraw:
    """One channel realization: small-scale gains (BS->surface and
    surface->user), per-element thermal noise, residual-interference
    power, and the two user distances."""

    h_s: np.ndarray
    h_r: np.ndarray
    h_t: np.ndarray
    n_s: np.ndarray
    h_re_sq: float
    d_r: float
    d_t: float


class SinrSet(NamedTuple):
    """The four link SINRs of one trial at one transmit power."""

    gamma_r_to_t: float
    gamma_r_psic: float
    gamma_r_ipsic: float
    gamma_t: float


@dataclass(frozen=True)
class Estimate:
    """A simulated metric with its 95% confidence half-width."""

    mean: float
    trials: int
    ci95_halfwidth: float
    kind: str


def _rng_for_block(seed: int, block: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, block & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _rician(rng: np.random.Generator, kappa: float, shape) -> np.ndarray:
    los = math.sqrt(kappa / (kappa + 1.0))
    scatter = math.sqrt(1.0 / (2.0 * (kappa + 1.0)))
    return (los + scatter * rng.standard_normal(shape)
            + 1j * scatter * rng.standard_normal(shape))


def draw_trial(rng: np.random.Generator, cfg: NetworkConfig) -> TrialDraw:
    """Draw one independent channel realization."""
    L = cfg.num_elements
    h_s = _rician(rng, cfg.rician_kappa, L)
    h_r = _rician(rng, cfg.rician_kappa, L)
    h_t = _rician(rng, cfg.rician_kappa, L)
    scale = math.sqrt(cfg.noise_sigma_s2 / 2.0)
    n_s = scale * (rng.standard_normal(L) + 1j * rng.standard_normal(L))
    h_re_sq = float(rng.exponential(cfg.noise_sigma_re2))
    d_r = float(sample_distance(rng, cfg.radius_d))
    d_t = float(sample_distance(rng, cfg.radius_d))
    return TrialDraw(h_s=h_s, h_r=h_r, h_t=h_t, n_s=n_s,
                     h_re_sq=h_re_sq, d_r=d_r, d_t=d_t)


def _side_terms(cfg: NetworkConfig, h_s, h_user, n_s, dist, beta):
    """Per-trial received-signal gain and amplified-noise power on one side.

    The phase controller aligns the cascade, so its amplitude is the sum of
    per-element products of envelopes; the thermal noise keeps its random
    phases and rides the same path loss.  In mean-noise mode the drawn
    noise power is replaced by its analysis value zeta sigma_s^2.
    """
    alpha = cfg.path_alpha
    eta0 = cfg.path_eta0
    cascade_amp = np.sum(np.abs(h_s) * np.abs(h_user), axis=-1)
    gain = eta0 ** 2 * (cfg.dist_bs * dist) ** -alpha * cascade_amp ** 2
    if cfg.mean_noise_mode:
        zeta = noise_power_factor(cfg.rician_kappa, cfg.num_elements)
        noise_sum = np.broadcast_to(zeta * cfg.noise_sigma_s2,
                                    np.shape(dist)).astype(float)
    else:
        noise_sum = np.abs(np.sum(n_s * h_user, axis=-1)) ** 2
    noise_amp = cfg.amp_lambda * beta * eta0 * dist ** -alpha * noise_sum
    return gain, noise_amp


def sinr_set(trial: TrialDraw, cfg: NetworkConfig, ps: float) -> SinrSet:
    """The four SINRs of one trial: the reflection user decoding the
    transmission user's signal, then its own signal under pSIC and ipSIC,
    and the transmission user decoding its own signal."""
    if ps <= 0.0:
        raise ValueError(f"transmit power must be positive, got {ps}")
    lam = cfg.amp_lambda
    g_r, noise_r = _side_terms(cfg, trial.h_s, trial.h_r, trial.n_s, trial.d_r, cfg.beta_r)
    g_t, noise_t = _side_terms(cfg, trial.h_s, trial.h_t, trial.n_s, trial.d_t, cfg.beta_t)
    s_r = lam * cfg.beta_r * ps * g_r
    s_t = lam * cfg.beta_t * ps * g_t
    den_r = noise_r + cfg.noise_sigma_02
    return SinrSet(
        gamma_r_to_t=cfg.a_t * s_r / (cfg.a_r * s_r + den_r),
        gamma_r_psic=cfg.a_r * s_r / den_r,
        gamma_r_ipsic=cfg.a_r * s_r / (den_r + trial.h_re_sq * ps),
        gamma_t=cfg.a_t * s_t / (cfg.a_r * s_t + noise_t + cfg.noise_sigma_02),
    )


def _moments(values: np.ndarray) -> tuple[float, float, int]:
    return float(values.sum()), float((values * values).sum()), values.size


def _block_partials(cfg: NetworkConfig, scheme: str, ps: float,
                    seed: int, block: int, size: int) -> dict[str, tuple | int]:
    """Simulate one block of trials and return raw partial sums."""
    rng = _rng_for_block(seed, block)
    L = cfg.num_elements
    kappa = cfg.rician_kappa
    h_s = _rician(rng, kappa, (size, L))
    h_r = _rician(rng, kappa, (size, L))
    h_t = _rician(rng, kappa, (size, L))
    if scheme == "pstars_noma":
        n_s = None
    else:
        scale = math.sqrt(cfg.noise_sigma_s2 / 2.0)
        n_s = scale * (rng.standard_normal((size, L))
                       + 1j * rng.standard_normal((size, L)))
    h_re_sq = rng.exponential(cfg.noise_sigma_re2, size)
    d_r = sample_distance(rng, cfg.radius_d, size)
    d_t = sample_distance(rng, cfg.radius_d, size)

    gamma_r_hat = target_sinr(cfg.target_rate_r)
    gamma_t_hat = target_sinr(cfg.target_rate_t)
    alpha = cfg.path_alpha
    eta0 = cfg.path_eta0
    sigma_02 = cfg.noise_sigma_02

    def side(h_user, dist, beta):
        cascade_amp = np.sum(np.abs(h_s) * np.abs(h_user), axis=1)
        gain = eta0 ** 2 * (cfg.dist_bs * dist) ** -alpha * cascade_amp ** 2
        if scheme == "pstars_noma":
            noise_amp = np.zeros(size)
        elif cfg.mean_noise_mode:
            zeta = noise_power_factor(kappa, L)
            noise_amp = (cfg.amp_lambda * beta * eta0 * dist ** -alpha
                         * zeta * cfg.noise_sigma_s2) * np.ones(size)
        else:
            noise_sum = np.abs(np.sum(n_s * h_user, axis=1)) ** 2
            noise_amp = cfg.amp_lambda * beta * eta0 * dist ** -alpha * noise_sum
        return gain, noise_amp

    lam = 1.0 if scheme == "pstars_noma" else cfg.amp_lambda
    g_r, noise_r = side(h_r, d_r, cfg.beta_r)
    g_t, noise_t = side(h_t, d_t, cfg.beta_t)
    s_r = lam * cfg.beta_r * ps * g_r
    s_t = lam * cfg.beta_t * ps * g_t

    out: dict[str, tuple | int] = {"n": size}
    if scheme == "astars_oma":
        # dedicated slots: full power, doubled spectral-efficiency target,
        # per-user rate halved by the slot structure
        gamma_r = s_r / (noise_r + sigma_02)
        gamma_t = s_t / (noise_t + sigma_02)
        out_r = gamma_r <= target_sinr(2.0 * cfg.target_rate_r)
        out_t = gamma_t <= target_sinr(2.0 * cfg.target_rate_t)
        rate_r = 0.5 * np.log2(1.0 + gamma_r)
        rate_t = 0.5 * np.log2(1.0 + gamma_t)
        out["out_r"] = int(out_r.sum())
        out["out_t"] = int(out_t.sum())
        out["out_sys"] = int((out_r | out_t).sum())
        out["rate_r"] = _moments(rate_r)[:2]
        out["rate_t"] = _moments(rate_t)[:2]
        tol = rate_r + rate_t
        lim = ((1.0 - out_r) * cfg.target_rate_r + (1.0 - out_t) * cfg.target_rate_t)
        out["thr_tolerant"] = _moments(tol)[:2]
        out["thr_limited"] = _moments(lim)[:2]
        return out

    den_r = noise_r + sigma_02
    gamma_r_to_t = cfg.a_t * s_r / (cfg.a_r * s_r + den_r)
    gamma_r_psic = cfg.a_r * s_r / den_r
    gamma_r_ipsic = cfg.a_r * s_r / (den_r + h_re_sq * ps)
    gamma_t = cfg.a_t * s_t / (cfg.a_r * s_t + noise_t + sigma_02)

    out_r_psic = (gamma_r_to_t <= gamma_t_hat) | (gamma_r_psic <= gamma_r_hat)
    out_r_ipsic = (gamma_r_to_t <= gamma_t_hat) | (gamma_r_ipsic <= gamma_r_hat)
    out_t = gamma_t <= gamma_t_hat
    rate_r_psic = np.log2(1.0 + gamma_r_psic)
    rate_r_ipsic = np.log2(1.0 + gamma_r_ipsic)
    rate_t = np.log2(1.0 + gamma_t)

    out["out_r_psic"] = int(out_r_psic.sum())
    out["out_r_ipsic"] = int(out_r_ipsic.sum())
    out["out_t"] = int(out_t.sum())
    out["out_sys_psic"] = int((out_r_psic | out_t).sum())
    out["out_sys_ipsic"] = int((out_r_ipsic | out_t).sum())
    out["rate_r_psic"] = _moments(rate_r_psic)[:2]
    out["rate_r_ipsic"] = _moments(rate_r_ipsic)[:2]
    out["rate_t"] = _moments(rate_t)[:2]
    for mode, out_r, rate_r in (("psic", out_r_psic, rate_r_psic),
                                ("ipsic", out_r_ipsic, rate_r_ipsic)):
        lim = ((1.0 - out_r) * cfg.target_rate_r + (1.0 - out_t) * cfg.target_rate_t)
        out[f"thr_limited_{mode}"] = _moments(lim)[:2]
        out[f"thr_tolerant_{mode}"] = _moments(rate_r + rate_t)[:2]
    return out


def _outage_estimate(count: float, trials: int, kind: str) -> Estimate:
    p = count / trials
    hw = 1.96 * math.sqrt(max(p * (1.0 - p), 0.0) / trials)
    return Estimate(mean=p, trials=trials, ci95_halfwidth=hw, kind=kind)


def _mean_estimate(total: float, total_sq: float, trials: int, kind: str) -> Estimate:
    mean = total / trials
    if trials > 1:
        var = max(total_sq - total * total / trials, 0.0) / (trials - 1)
    else:
        var = 0.0
    hw = 1.96 * math.sqrt(var / trials)
    return Estimate(mean=mean, trials=trials, ci95_halfwidth=hw, kind=kind)


def simulate(cfg: NetworkConfig, scheme: str, ps: float, trials: int | None = None,
             seed: int | None = None, workers: int = 1) -> dict[str, Estimate]:
    """Run the block simulator for one scheme at one transmit power.

    Returns estimates keyed by metric:
    NOMA schemes: outage_r_psic, outage_r_ipsic, outage_t,
    outage_system_psic, outage_system_ipsic, rate_r_psic, rate_r_ipsic,
    rate_t, throughput_limited_{psic,ipsic}, throughput_tolerant_{psic,ipsic}.
    astars_oma: outage_r, outage_t, outage_system, rate_r, rate_t,
    throughput_limited, throughput_tolerant.
    """
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if ps <= 0.0:
        raise ValueError(f"transmit power must be positive, got {ps}")
    trials = cfg.mc_trials if trials is None else int(trials)
    if trials < 1:
        raise ValueError("at least one trial required")
    seed = cfg.seed if seed is None else int(seed)
    sizes = [BLOCK_TRIALS] * (trials // BLOCK_TRIALS)
    if trials % BLOCK_TRIALS:
        sizes.append(trials % BLOCK_TRIALS)

    def run(block: int) -> dict:
        return _block_partials(cfg, scheme, ps, seed, block, sizes[block])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(run, range(len(sizes))))
    else:
        partials = [run(b) for b in range(len(sizes))]

    keys = [k for k in partials[0] if k != "n"]
    merged: dict[str, float | tuple] = {}
    for key in keys:
        first = partials[0][key]
        if isinstance(first, tuple):
            merged[key] = (math.fsum(p[key][0] for p in partials),
                           math.fsum(p[key][1] for p in partials))
        else:
            merged[key] = sum(p[key] for p in partials)

    tag = f"{scheme}:"
    estimates: dict[str, Estimate] = {}
    renames = {
        "out_r_psic": "outage_r_psic", "out_r_ipsic": "outage_r_ipsic",
        "out_r": "outage_r", "out_t": "outage_t",
        "out_sys_psic": "outage_system_psic", "out_sys_ipsic": "outage_system_ipsic",
        "out_sys": "outage_system",
        "thr_limited_psic": "throughput_limited_psic",
        "thr_limited_ipsic": "throughput_limited_ipsic",
        "thr_limited": "throughput_limited",
        "thr_tolerant_psic": "throughput_tolerant_psic",
        "thr_tolerant_ipsic": "throughput_tolerant_ipsic",
        "thr_tolerant": "throughput_tolerant",
    }
    for key, value in merged.items():
        name = renames.get(key, key)
        if isinstance(value, tuple):
            estimates[name] = _mean_estimate(value[0], value[1], trials, tag + name)
        else:
            estimates[name] = _outage_estimate(value, trials, tag + name)
    return estimates


def estimate_outage(cfg: NetworkConfig, mode: SicMode, ps: float,
                    trials: int | None = None, seed: int | None = None,
                    workers: int = 1) -> dict[str, Estimate]:
    """Outage estimates for the main scheme under the given SIC mode,
    keyed "r", "t", "system".

    The reflection-user failure event is the exact compound one: the
    companion signal could not be decoded, or the own signal could not
    after cancellation.
    """
    sims = simulate(cfg, "astars_noma", ps, trials=trials, seed=seed, workers=workers)
    suffix = "psic" if mode is SicMode.PSIC else "ipsic"
    return {
        "r": sims[f"outage_r_{suffix}"],
        "t": sims["outage_t"],
        "system": sims[f"outage_system_{suffix}"],
    }


def estimate_ergodic(cfg: NetworkConfig, mode: SicMode, ps: float,
                     trials: int | None = None, seed: int | None = None,
                     workers: int = 1) -> dict[str, Estimate]:
    """Ergodic-rate estimates for the main scheme, keyed "r", "t"."""
    sims = simulate(cfg, "astars_noma", ps, trials=trials, seed=seed, workers=workers)
    suffix = "psic" if mode is SicMode.PSIC else "ipsic"
    return {"r": sims[f"rate_r_{suffix}"], "t": sims["rate_t"]}


def baseline_estimate(cfg: NetworkConfig, scheme: str, ps: float,
                      trials: int | None = None, seed: int | None = None,
                      workers: int = 1, mode: SicMode = SicMode.PSIC) -> dict[str, Estimate]:
    """Estimates for a comparison scheme, normalized to mode-free keys:
    outage_r, outage_t, outage_system, rate_r, rate_t, throughput_limited,
    throughput_tolerant.  For the passive-surface NOMA baseline the SIC
    mode selects which reflection-user variant is reported."""
    if scheme not in ("astars_oma", "pstars_noma"):
        raise ConfigError(f"unknown baseline scheme {scheme!r}")
    sims = simulate(cfg, scheme, ps, trials=trials, seed=seed, workers=workers)
    if scheme == "astars_oma":
        return sims
    suffix = "psic" if mode is SicMode.PSIC else "ipsic"
    return {
        "outage_r": sims[f"outage_r_{suffix}"],
        "outage_t": sims["outage_t"],
        "outage_system": sims[f"outage_system_{suffix}"],
        "rate_r": sims[f"rate_r_{suffix}"],
        "rate_t": sims["rate_t"],
        "throughput_limited": sims[f"throughput_limited_{suffix}"],
        "throughput_tolerant": sims[f"throughput_tolerant_{suffix}"],
    }


def surface_output_power(cfg: NetworkConfig, ps: float) -> float:
    """Expected amplifier output power of the active surface: each element
    re-radiates lambda (beta_r + beta_t) times its mean incident power
    eta0 d_s^{-alpha} ps plus its injected thermal power sigma_s^2."""
    return (cfg.amp_lambda * (cfg.beta_r + cfg.beta_t) * cfg.num_elements
            * (cfg.path_eta0 * cfg.dist_bs ** -cfg.path_alpha * ps + cfg.noise_sigma_s2))


def budget_to_ps(q_tot: float, cfg: NetworkConfig, active: bool = True) -> float:
    """Solve the total power budget for the BS transmit power.

    Active surface: q_tot = ps + P_out(ps) + L (P_c + P_d) with the
    expected amplifier output P_out linear in ps, solved exactly.
    Passive surface: q_tot = ps + L P_c.
    """
    if q_tot <= 0.0:
        raise ConfigError(f"budget must be positive, got {q_tot}")
    L = cfg.num_elements
    if not active:
        ps = q_tot - L * cfg.pc_watts
        if ps <= 0.0:
            raise ConfigError(f"infeasible passive budget {q_tot} W: "
                              f"circuit draw {L * cfg.pc_watts} W")
        return ps
    drain = L * (cfg.pc_watts + cfg.pd_watts)
    amp = cfg.amp_lambda * (cfg.beta_r + cfg.beta_t) * L
    slope = amp * cfg.path_eta0 * cfg.dist_bs ** -cfg.path_alpha
    ps = (q_tot - drain - amp * cfg.noise_sigma_s2) / (1.0 + slope)
    if ps <= 0.0:
        raise ConfigError(f"infeasible active budget {q_tot} W: "
                          f"static draw {drain + amp * cfg.noise_sigma_s2} W")
    return ps
