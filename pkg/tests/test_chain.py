import numpy as np
import pytest
from scipy import stats

from svolkit.chain import Chain, ChainConfig, ChainState, chain_summary, kde_mode, run_chain
from svolkit.model import PAPER_PARAMS, ErrorSpec, ModelParams, Priors, simulate_path
from svolkit.pipeline import (
    ReplicationReport,
    Scenario,
    c_star_sweep,
    fit_models,
    fit_two_stage,
    replicate,
    residuals,
    run_replication,
    scenario_preset,
)
from svolkit.pipeline import ReplicationResult
from svolkit.rng import derive
from svolkit.samplers import TargetKind

# tiny chains wander past |delta| = 1; the warning is expected there
pytestmark = pytest.mark.filterwarnings("ignore:.delta. >= 1:RuntimeWarning")

PRI = Priors()
TINY = ChainConfig(iterations=20, burn_in=10, seed=3)


@pytest.fixture(scope="module")
def gauss_path():
    return simulate_path(PAPER_PARAMS, ErrorSpec.gaussian(), ErrorSpec.gaussian(), 500, 101)


def fake_chain(draws):
    d = np.asarray(draws, dtype=float)
    return Chain(h_draws=np.ones((d.size, 3)), alpha_draws=d, delta_draws=d, sigma2_draws=d ** 2,
                 counters={}, final_state=ChainState(np.zeros(3), 0.0, 0.0, 1.0),
                 model=TargetKind.GAUSSIAN, seed=0)


class TestRunChain:
    def test_single_sweep_invokes_every_sampler_once(self, gauss_path):
        y = gauss_path.returns
        c = run_chain(y, PRI, ChainConfig(iterations=1, burn_in=0, seed=1))
        assert len(c) == 1 and c.h_draws.shape == (1, y.size)
        assert c.counters["h_updates"] == y.size - 2
        for k in ("sigma2_draws", "alpha_draws", "delta_draws"):
            assert c.counters[k] == 1  # conjugate draws: one proposal each

    def test_retained_rows_ignore_burn_in(self, gauss_path):
        y = gauss_path.returns[:50]
        c = run_chain(y, PRI, ChainConfig(iterations=3, burn_in=4, seed=1))
        assert len(c) == 3
        assert c.counters["h_updates"] == 7 * 48

    def test_deterministic(self, gauss_path):
        y = gauss_path.returns[:100]
        a = run_chain(y, PRI, TINY)
        b = run_chain(y, PRI, TINY)
        assert a.equals(b)
        assert not a.equals(run_chain(y, PRI, TINY.with_(seed=4)))

    def test_positive_finite(self, gauss_path):
        c = run_chain(gauss_path.returns, PRI, TINY)
        assert np.all(c.h_draws > 0) and np.all(np.isfinite(c.h_draws))
        assert np.all(c.sigma2_draws > 0)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            run_chain([0.1, 0.2], PRI, TINY)
        with pytest.raises(ValueError):
            run_chain([0.1, 0.1, 0.1, 0.1], PRI, TINY)
        with pytest.raises(ValueError):
            ChainConfig(iterations=0)
        with pytest.raises(ValueError):
            ChainConfig(c_star=0.0)

    def test_gaussian_recovers_persistence(self, gauss_path):
        c = run_chain(gauss_path.returns, PRI, ChainConfig(iterations=5000, burn_in=5000, seed=2))
        assert abs(c.delta_draws.mean() - 0.985) < 0.03
        assert abs(c.alpha_draws.mean() + 0.15) < 0.45


class TestSummaries:
    def test_hand_example(self):
        s = chain_summary(fake_chain([1, 1, 1, 2]), volatility=False)
        assert s.param("alpha", "mean") == 1.25
        assert s.param("alpha", "median") == 1.0
        assert s.param("alpha", "mode") == 1.0

    def test_constant(self):
        s = chain_summary(fake_chain([0.7] * 10))
        assert s.params["delta"] == {"mean": pytest.approx(0.7), "median": 0.7, "mode": 0.7}
        assert np.array_equal(s.volatility["mode"], np.ones(3))

    def test_symmetric_unimodal(self):
        x = stats.norm.ppf((np.arange(20_000) + 0.5) / 20_000)
        assert abs(kde_mode(x)) < 0.01
        assert abs(np.median(x)) < 1e-12

    def test_discard(self):
        s = chain_summary(fake_chain([5, 1, 1, 1]), discard=1, volatility=False)
        assert s.param("alpha") == 1.0
        with pytest.raises(ValueError):
            chain_summary(fake_chain([1, 2]), discard=2)


class TestResiduals:
    def test_scaled_return(self):
        u, w = residuals([2.0, 2.0, 2.0], [4.0, 4.0, 4.0], ModelParams(0.0, 0.5, 1.0))
        assert u.tolist() == [1.0, 1.0, 1.0]
        assert w.size == 1

    def test_constant_path(self):
        m, a, s = -2.0, 0.3, 0.5
        _, w = residuals(np.ones(6), np.full(6, np.exp(m)), ModelParams(a, 0.0, s))
        np.testing.assert_allclose(w, (m - a) / s, rtol=1e-12)

    def test_true_path_gives_normal_u(self):
        p = simulate_path(PAPER_PARAMS, ErrorSpec.gaussian(), ErrorSpec.gaussian(), 5000, 8)
        u, _ = residuals(p.returns, p.volatility, PAPER_PARAMS)
        z = (u - u.mean()) / u.std(ddof=1)
        assert stats.kstest(z, "norm").statistic < 0.05

    def test_errors(self):
        with pytest.raises(ValueError):
            residuals([1.0, 2.0], [1.0], PAPER_PARAMS)
        with pytest.raises(ValueError):
            residuals([1.0, 2.0, 3.0], [1.0, 0.0, 1.0], PAPER_PARAMS)


@pytest.fixture(scope="module")
def fits(gauss_path):
    cfg = ChainConfig(iterations=2000, burn_in=1000, seed=9)
    return fit_models(gauss_path.returns, PRI, cfg, ["gaussian", "nsvm1", "nsvm2"])


class TestTwoStage:
    def test_gaussian_data_self_consistent(self, fits):
        s1 = fits[TargetKind.GAUSSIAN].stage1
        s2 = fits[TargetKind.NSVM1].stage2
        for name in ("alpha", "delta", "sigma_nu"):
            a, b = s1.param_draws(name), s2.param_draws(name)
            assert abs(a.mean() - b.mean()) < 2 * a.std()

    def test_stage2_finite_and_kdes_attached(self, fits):
        for m in (TargetKind.NSVM1, TargetKind.NSVM2):
            f = fits[m]
            assert np.all(np.isfinite(f.stage2.h_draws)) and np.all(f.stage2.h_draws > 0)
            assert f.f_hat is not None
            assert (f.g_hat is not None) == (m is TargetKind.NSVM2)
            assert f.stage2.model is m

    def test_volatility_summaries(self, fits, gauss_path):
        for f in fits.values():
            for s in ("mean", "median", "mode"):
                v = f.summary.volatility[s]
                assert v.shape == gauss_path.returns.shape and np.all(v > 0)

    def test_seed_layout(self, gauss_path):
        cfg = TINY.with_(seed=77)
        fit = fit_two_stage(gauss_path.returns[:80], PRI, cfg, "nsvm2")
        assert fit.stage1.seed == derive(77, 0)
        assert fit.stage2.seed == derive(77, 1, TargetKind.NSVM2.code)
        shared = fit_models(gauss_path.returns[:80], PRI, cfg, ["nsvm2"])[TargetKind.NSVM2]
        assert shared.stage2.equals(fit.stage2)

    def test_refit_rounds_seeds(self, gauss_path):
        fit = fit_two_stage(gauss_path.returns[:80], PRI, TINY.with_(refit_rounds=3), "nsvm1")
        assert fit.stage2.seed == derive(TINY.seed, 3, TargetKind.NSVM1.code)


SMALL = scenario_preset("t", n=60, config=ChainConfig(iterations=15, burn_in=5))


class TestHarness:
    def test_replicate_matches_standalone(self):
        rep = replicate(SMALL, ["gaussian", "nsvm1"], 2, seed=5)
        solo = run_replication(SMALL, ["gaussian", "nsvm1"], derive(5, 1))
        assert rep.results[1] == solo
        assert rep.results[1].path_seed == derive(derive(5, 1), 0)

    def test_mse_zero_at_truth(self):
        truth = {p: {"mean": getattr(PAPER_PARAMS, p), "median": 0.0, "mode": 0.0}
                 for p in ("alpha", "delta", "sigma_nu")}
        r = ReplicationResult(seed=0, estimates={"gaussian": truth}, vol={}, path_seed=0)
        rep = ReplicationReport(Scenario(), (TargetKind.GAUSSIAN,), (r,))
        for p in ("alpha", "delta", "sigma_nu"):
            assert rep.mse("gaussian", p) == 0.0

    def test_tables(self):
        rep = replicate(SMALL, ["gaussian", "nsvm1", "nsvm2"], 2, seed=6)
        assert rep.mse_table().shape == (9, 3)
        assert rep.vol_table().shape == (3, 9)
        assert len(rep.estimates_table()) == 2 * 3 * 3

    def test_c_star_sweep_shape(self):
        t = c_star_sweep([0.8, 1.2], SMALL, ["gaussian", "nsvm1", "nsvm2"], 1, seed=7)
        assert t.shape == (9, 2)
        t1 = c_star_sweep([1.2], SMALL, ["gaussian"], 1, seed=7)
        assert t1.shape == (3, 1)
        with pytest.raises(ValueError):
            c_star_sweep([0.0], SMALL, ["gaussian"], 1, seed=7)

    def test_replicate_needs_reps(self):
        with pytest.raises(ValueError):
            replicate(SMALL, ["gaussian"], 0, seed=1)
