"""Simulator tests: channel-draw statistics, SINR structure, determinism
under worker-count changes, the power-budget model, and the baselines.

The archived reference block pins the exact estimates produced at the
default seed with 10^6 trials; any change to the draw order or reduction
is a breaking change and must show up here.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from astars_noma.analytic import SicMode
from astars_noma.model import ConfigError, NetworkConfig, dbm_to_watts, noise_power_factor
from astars_noma.montecarlo import (BLOCK_TRIALS, Estimate, baseline_estimate,
                                    budget_to_ps, draw_trial, estimate_ergodic,
                                    estimate_outage, simulate, sinr_set,
                                    surface_output_power)

CFG = NetworkConfig()

# frozen at seed=123456789, 10^6 trials, Q_tot = 30 dBm (active budget)
ARCHIVE_PS = 0.9997799994000122
ARCHIVE = {
    "outage_r_ipsic": (8e-05, 1.753007169865543e-05),
    "outage_r_psic": (0.0, 0.0),
    "outage_system_ipsic": (8e-05, 1.753007169865543e-05),
    "outage_system_psic": (0.0, 0.0),
    "outage_t": (0.0, 0.0),
    "rate_r_ipsic": (4.982607178504838, 0.0031760584153001353),
    "rate_r_psic": (5.796432021207335, 0.0029876550758733368),
    "rate_t": (1.6751452004814409, 9.787872196616522e-05),
    "throughput_limited_ipsic": (1.99992, 1.753008046371557e-05),
    "throughput_limited_psic": (2.0, 0.0),
    "throughput_tolerant_ipsic": (6.657752378986279, 0.0031887274274555776),
    "throughput_tolerant_psic": (7.471577221688776, 0.003001362710158058),
}


# ---------------------------------------------------------------------------
# single-trial draws
# ---------------------------------------------------------------------------

def test_draw_trial_shapes_and_ranges():
    rng = np.random.default_rng(0)
    trial = draw_trial(rng, CFG)
    L = CFG.num_elements
    assert trial.h_s.shape == trial.h_r.shape == trial.h_t.shape == (L,)
    assert trial.n_s.shape == (L,)
    assert trial.h_re_sq >= 0.0
    assert 0.0 < trial.d_r <= CFG.radius_d
    assert 0.0 < trial.d_t <= CFG.radius_d


def test_pure_los_limit_gains_become_deterministic():
    rng = np.random.default_rng(1)
    cfg = replace(CFG, rician_kappa=1e12)
    trial = draw_trial(rng, cfg)
    assert np.allclose(trial.h_s, 1.0, atol=1e-5)
    assert np.allclose(trial.h_r, 1.0, atol=1e-5)


def test_small_scale_gain_unit_power():
    rng = np.random.default_rng(2)
    n = 1_000_000
    trials = [draw_trial(rng, replace(CFG, num_elements=1)) for _ in range(0)]
    # vectorized equivalent: draw a block of gains directly
    from astars_noma.montecarlo import _rician
    h = _rician(rng, CFG.rician_kappa, n)
    power = np.abs(h) ** 2
    se = power.std(ddof=1) / math.sqrt(n)
    assert abs(power.mean() - 1.0) < 3.0 * se


def test_random_phase_sum_power_matches_noise_factor():
    rng = np.random.default_rng(3)
    from astars_noma.montecarlo import _rician
    n, L = 1_000_000, CFG.num_elements
    h = _rician(rng, CFG.rician_kappa, (n, L))
    power = np.abs(h.sum(axis=1)) ** 2
    zeta = noise_power_factor(CFG.rician_kappa, L)
    se = power.std(ddof=1) / math.sqrt(n)
    assert abs(power.mean() - zeta) < 3.0 * se


def test_residual_power_is_exponential_with_configured_mean():
    rng = np.random.default_rng(4)
    draws = np.array([draw_trial(rng, CFG).h_re_sq for _ in range(20_000)])
    se = draws.std(ddof=1) / math.sqrt(draws.size)
    assert abs(draws.mean() - CFG.noise_sigma_re2) < 3.0 * se


# ---------------------------------------------------------------------------
# SINR structure
# ---------------------------------------------------------------------------

def test_sinr_set_positive_and_ordered():
    rng = np.random.default_rng(5)
    for _ in range(50):
        trial = draw_trial(rng, CFG)
        s = sinr_set(trial, CFG, 1.0)
        assert all(v > 0.0 for v in s)
        # residual interference can only hurt the post-SIC SINR
        assert s.gamma_r_ipsic <= s.gamma_r_psic
        # interference-limited ceilings
        assert s.gamma_r_to_t < CFG.a_t / CFG.a_r
        assert s.gamma_t < CFG.a_t / CFG.a_r


def test_sinr_monotone_in_power():
    rng = np.random.default_rng(6)
    trial = draw_trial(rng, CFG)
    lo = sinr_set(trial, CFG, 0.1)
    hi = sinr_set(trial, CFG, 10.0)
    assert hi.gamma_r_psic > lo.gamma_r_psic
    assert hi.gamma_t > lo.gamma_t


def test_sinr_set_rejects_nonpositive_power():
    rng = np.random.default_rng(7)
    trial = draw_trial(rng, CFG)
    with pytest.raises(ValueError):
        sinr_set(trial, CFG, 0.0)


def test_mean_noise_mode_isolates_the_analysis_noise_substitution():
    # the analysis replaces the drawn amplified noise by its mean power;
    # flipping the switch makes the simulator adopt the same substitution,
    # so the remaining analytic-vs-mc gap is the Gamma moment fit alone
    cfg = NetworkConfig(a_r=0.2, a_t=0.8)
    ps = dbm_to_watts(20.0)
    from astars_noma.analytic import ergodic_rate_r
    analytic = ergodic_rate_r(cfg, SicMode.PSIC, ps)
    exact = simulate(cfg, "astars_noma", ps, trials=400_000, seed=77)
    matched = simulate(replace(cfg, mean_noise_mode=True), "astars_noma", ps,
                       trials=400_000, seed=77)
    gap_exact = abs(analytic - exact["rate_r_psic"].mean)
    gap_matched = abs(analytic - matched["rate_r_psic"].mean)
    assert gap_matched < gap_exact
    assert gap_matched / analytic < 0.005


def test_mean_noise_mode_freezes_amplified_noise():
    rng = np.random.default_rng(8)
    cfg = replace(CFG, mean_noise_mode=True)
    zeta = noise_power_factor(cfg.rician_kappa, cfg.num_elements)
    trial = draw_trial(rng, cfg)
    s = sinr_set(trial, cfg, 1.0)
    # reconstruct: gamma_r_psic uses lambda beta_r eta0 d^-a sigma_s^2 zeta
    gain = (cfg.path_eta0 ** 2 * (cfg.dist_bs * trial.d_r) ** -2.0
            * np.sum(np.abs(trial.h_s) * np.abs(trial.h_r)) ** 2)
    noise = (cfg.amp_lambda * cfg.beta_r * cfg.path_eta0 * trial.d_r ** -2.0
             * zeta * cfg.noise_sigma_s2 + cfg.noise_sigma_02)
    expect = cfg.a_r * cfg.amp_lambda * cfg.beta_r * 1.0 * gain / noise
    assert s.gamma_r_psic == pytest.approx(expect, rel=1e-12)


# ---------------------------------------------------------------------------
# estimates: determinism, archive, bounds
# ---------------------------------------------------------------------------

def test_archived_reference_block_bit_exact():
    sims = simulate(CFG, "astars_noma", ARCHIVE_PS, trials=1_000_000)
    assert set(ARCHIVE) <= set(sims)
    for key, (mean, hw) in ARCHIVE.items():
        assert sims[key].mean == mean, key
        assert sims[key].ci95_halfwidth == hw, key
        assert sims[key].trials == 1_000_000


def test_worker_count_leaves_estimates_bit_identical():
    ps = dbm_to_watts(20.0)
    runs = [simulate(CFG, "astars_noma", ps, trials=3 * BLOCK_TRIALS + 17,
                     seed=99, workers=w) for w in (1, 2, 7)]
    for other in runs[1:]:
        for key, est in runs[0].items():
            assert other[key].mean == est.mean
            assert other[key].ci95_halfwidth == est.ci95_halfwidth


def test_seed_changes_estimates():
    ps = dbm_to_watts(15.0)
    a = simulate(CFG, "astars_noma", ps, trials=20_000, seed=1)
    b = simulate(CFG, "astars_noma", ps, trials=20_000, seed=2)
    assert a["outage_r_psic"].mean != b["outage_r_psic"].mean


def test_zero_targets_never_outage():
    cfg = replace(CFG, target_rate_r=0.0, target_rate_t=0.0)
    out = estimate_outage(cfg, SicMode.PSIC, dbm_to_watts(0.0), trials=20_000)
    assert out["r"].mean == 0.0
    assert out["t"].mean == 0.0
    assert out["system"].mean == 0.0


def test_degenerate_allocation_sure_outage():
    cfg = replace(CFG, target_rate_t=2.0)  # a_t < gamma_t_hat a_r
    out = estimate_outage(cfg, SicMode.PSIC, dbm_to_watts(30.0), trials=20_000)
    assert out["t"].mean == 1.0


def test_estimate_outage_compound_event_consistency():
    ps = dbm_to_watts(15.0)
    psic = estimate_outage(CFG, SicMode.PSIC, ps, trials=50_000)
    ipsic = estimate_outage(CFG, SicMode.IPSIC, ps, trials=50_000)
    assert ipsic["r"].mean >= psic["r"].mean
    # system event contains each per-user event
    assert psic["system"].mean >= psic["r"].mean
    assert psic["system"].mean >= psic["t"].mean
    # and is at most their sum
    assert psic["system"].mean <= psic["r"].mean + psic["t"].mean


def test_ci_definitions():
    ps = dbm_to_watts(15.0)
    out = estimate_outage(CFG, SicMode.PSIC, ps, trials=50_000)["r"]
    assert out.ci95_halfwidth == pytest.approx(
        1.96 * math.sqrt(out.mean * (1.0 - out.mean) / out.trials), rel=1e-12)
    rate = estimate_ergodic(CFG, SicMode.PSIC, ps, trials=50_000)["r"]
    assert rate.ci95_halfwidth > 0.0
    assert rate.trials == 50_000


def test_rate_t_estimate_respects_allocation_ceiling():
    est = estimate_ergodic(CFG, SicMode.PSIC, dbm_to_watts(45.0), trials=50_000)
    ceiling = math.log2(1.0 + CFG.a_t / CFG.a_r)
    assert est["t"].mean <= ceiling + est["t"].ci95_halfwidth
    assert est["t"].mean == pytest.approx(ceiling, abs=0.01)


def test_rates_vanish_at_tiny_power():
    est = estimate_ergodic(CFG, SicMode.PSIC, 1e-12, trials=5_000)
    assert est["r"].mean < 1e-6
    assert est["t"].mean < 1e-6


# ---------------------------------------------------------------------------
# baselines
# ---------------------------------------------------------------------------

def test_oma_rate_is_half_log_of_full_power_sinr():
    # symmetric toy: with matched draws the OMA rate per user is exactly
    # half the log of its dedicated-slot SINR; verify through the ceiling:
    # at high power the OMA t-rate has no interference cap
    noma = simulate(CFG, "astars_noma", dbm_to_watts(40.0), trials=30_000, seed=5)
    oma = simulate(CFG, "astars_oma", dbm_to_watts(40.0), trials=30_000, seed=5)
    assert oma["rate_t"].mean > noma["rate_t"].mean  # beyond log2(1+a_t/a_r)
    # and the OMA slot factor halves the slope: compare two powers
    lo = simulate(CFG, "astars_oma", dbm_to_watts(30.0), trials=30_000, seed=5)
    gain = oma["rate_r"].mean - lo["rate_r"].mean
    assert gain == pytest.approx(0.5 * 10.0 * math.log2(10.0) / 10.0, abs=0.1)


def test_oma_outage_uses_doubled_spectral_target():
    # at a power where NOMA t-outage is already tiny the OMA one is larger
    # only through its 2^{2R}-1 threshold; both must vanish by 30 dBm
    oma = simulate(CFG, "astars_oma", dbm_to_watts(30.0), trials=30_000, seed=6)
    assert oma["outage_r"].mean < 0.01
    assert oma["outage_t"].mean < 0.01


def test_pstars_reduction_matches_unamplified_astars():
    # lambda -> 1+ with silent surface noise reduces the active model to the
    # passive one (identical draws cannot be compared directly because the
    # passive stream skips the noise draws; compare distributions instead)
    cfg = replace(CFG, amp_lambda=1.0 + 1e-12, noise_sigma_s2=1e-30)
    ps = dbm_to_watts(20.0)
    act = simulate(cfg, "astars_noma", ps, trials=400_000, seed=11)
    pas = simulate(cfg, "pstars_noma", ps, trials=400_000, seed=12)
    for key in ("outage_r_psic", "outage_t"):
        diff = abs(act[key].mean - pas[key].mean)
        assert diff <= 3.0 * (act[key].ci95_halfwidth + pas[key].ci95_halfwidth)


def test_baseline_estimate_key_normalization():
    ps = dbm_to_watts(20.0)
    oma = baseline_estimate(CFG, "astars_oma", ps, trials=10_000)
    pst = baseline_estimate(CFG, "pstars_noma", ps, trials=10_000)
    expected = {"outage_r", "outage_t", "outage_system", "rate_r", "rate_t",
                "throughput_limited", "throughput_tolerant"}
    assert expected <= set(oma)
    assert expected == set(pst)
    with pytest.raises(ConfigError):
        baseline_estimate(CFG, "astars_noma", ps, trials=10)
    with pytest.raises(ConfigError):
        simulate(CFG, "no_such_scheme", ps, trials=10)


def test_throughput_estimates_are_consistent_compositions():
    ps = dbm_to_watts(20.0)
    sims = simulate(CFG, "astars_noma", ps, trials=50_000, seed=3)
    lim = sims["throughput_limited_psic"]
    composed = ((1.0 - sims["outage_r_psic"].mean) * CFG.target_rate_r
                + (1.0 - sims["outage_t"].mean) * CFG.target_rate_t)
    assert lim.mean == pytest.approx(composed, abs=1e-12)
    tol = sims["throughput_tolerant_psic"]
    assert tol.mean == pytest.approx(sims["rate_r_psic"].mean + sims["rate_t"].mean,
                                     abs=1e-12)


# ---------------------------------------------------------------------------
# power budget
# ---------------------------------------------------------------------------

def test_passive_budget_linear_subtraction():
    cfg = replace(CFG, pc_watts=1e-5)
    assert budget_to_ps(0.1, cfg, active=False) == pytest.approx(0.1 - 1e-4, rel=1e-12)


def test_active_budget_round_trip():
    for q_dbm in (5.0, 20.0, 30.0, 50.0):
        q = dbm_to_watts(q_dbm)
        ps = budget_to_ps(q, CFG, active=True)
        back = (ps + surface_output_power(CFG, ps)
                + CFG.num_elements * (CFG.pc_watts + CFG.pd_watts))
        assert back == pytest.approx(q, rel=1e-12)
        assert ps > 0.0


def test_active_budget_amplifier_vanishing_limit():
    cfg = replace(CFG, amp_lambda=1.0 + 1e-9, beta_r=1e-9, beta_t=1e-9,
                  a_r=0.5, a_t=0.5)
    q = 0.01
    drain = cfg.num_elements * (cfg.pc_watts + cfg.pd_watts)
    assert budget_to_ps(q, cfg, active=True) == pytest.approx(q - drain, rel=1e-6)


def test_infeasible_budgets_raise():
    with pytest.raises(ConfigError):
        budget_to_ps(1e-5, CFG, active=True)  # below the static drain
    with pytest.raises(ConfigError):
        budget_to_ps(CFG.num_elements * CFG.pc_watts, CFG, active=False)
    with pytest.raises(ConfigError):
        budget_to_ps(-1.0, CFG)


def test_estimate_dataclass_tags():
    est = Estimate(mean=0.5, trials=10, ci95_halfwidth=0.1, kind="outage_r")
    assert est.kind == "outage_r"
