import numpy as np
import pytest
from scipy.special import ndtr

from codiv.channel import (
    ChannelModel,
    TransitionModel,
    UnregisteredAnalyticError,
    add_noise,
    qpsk_bit_error,
    sample_channel,
    symbol_confusion,
    symbol_confusion_mc,
    transition_model,
    transition_table,
)
from codiv.gf import default_field
from codiv.sigmap import DegenerateChannelError, NodeRule, custom_constellation, make_constellation

F1 = default_field(1)
RULES = {g: NodeRule(F1.vector(g)) for g in [(1, 0), (0, 1), (1, 1)]}


def test_rayleigh_statistics():
    rng = np.random.default_rng(1)
    h = sample_channel(ChannelModel("iid_rayleigh", 4), rng, 250_000)
    assert h.shape == (250_000, 4)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.01)
    assert np.var(h.real) == pytest.approx(0.5, abs=0.01)
    assert np.var(h.imag) == pytest.approx(0.5, abs=0.01)


def test_fixed_gain():
    model = ChannelModel("fixed_gain", 3, (1.5, 0.3, 1.5))
    h = sample_channel(model, np.random.default_rng(2), 1000)
    assert np.allclose(np.abs(h), [1.5, 0.3, 1.5])
    assert np.std(np.angle(h[:, 0])) > 1.0
    with pytest.raises(ValueError):
        ChannelModel("fixed_gain", 3)
    with pytest.raises(ValueError):
        ChannelModel("fixed_gain", 2, (1.0, -1.0))
    with pytest.raises(ValueError):
        ChannelModel("awgn", 2)


def test_same_seed_same_draws():
    model = ChannelModel("iid_rayleigh", 3)
    a = sample_channel(model, np.random.default_rng(5))
    b = sample_channel(model, np.random.default_rng(5))
    assert np.array_equal(a, b)


def test_noise_statistics():
    rng = np.random.default_rng(3)
    x = np.full(1_000_000, 0.5 - 2j)
    n = add_noise(x, rng) - x
    assert np.mean(n) == pytest.approx(0, abs=0.01)
    assert np.mean(np.abs(n) ** 2) == pytest.approx(1.0, abs=0.01)
    assert np.var(n.real) == pytest.approx(0.5, abs=0.01)
    assert np.var(n.imag) == pytest.approx(0.5, abs=0.01)
    assert abs(np.corrcoef(n.real, n.imag)[0, 1]) < 0.01
    assert isinstance(add_noise(1.0, rng), complex)


@pytest.mark.parametrize("name", ["QPSK", "16QAM", "8PSK", "BPSK"])
def test_zero_snr_is_uniform(name):
    c = make_constellation(name, rho=0)
    conf = symbol_confusion(c, 0.0)
    assert np.allclose(conf, 1.0 / c.M)
    if name == "QPSK":
        for rule in RULES.values():
            assert np.allclose(transition_table(0.7, c, rule), 0.5)


def test_qpsk_closed_forms():
    for gamma in [0.1, 1.0, 4.0, 30.0]:
        p = ndtr(-np.sqrt(gamma))
        assert qpsk_bit_error(gamma) == pytest.approx(p)
        c = make_constellation("QPSK", rho=gamma)
        for g, rule in RULES.items():
            t = transition_table(1.0, c, rule)
            right = rule.outputs(c)
            wrong = t[np.arange(4), 1 - right]
            want = 2 * p * (1 - p) if g == (1, 1) else p
            assert np.allclose(wrong, want, rtol=1e-12)


@pytest.mark.parametrize("name", ["QPSK", "16QAM", "8PSK"])
def test_analytic_matches_monte_carlo(name):
    rng = np.random.default_rng(4)
    c = make_constellation(name, rho=3.0)
    n = 200_000
    for h in [0.4 + 0.2j, 1.3j, -0.9]:
        exact = symbol_confusion(c, 3.0 * abs(h) ** 2)
        mc = symbol_confusion_mc(c, np.array(h), rng, n)
        tol = 4 * np.sqrt(exact * (1 - exact) / n) + 1e-12
        assert np.all(np.abs(exact - mc) <= tol)


@pytest.mark.parametrize("name", ["QPSK", "16QAM", "8PSK"])
def test_rows_stochastic_and_monotone(name):
    c = make_constellation(name, rho=1.0)
    gammas = np.logspace(-3, 4, 80)
    conf = symbol_confusion(c, gammas)
    assert np.all(conf >= 0) and np.all(conf <= 1)
    assert np.allclose(conf.sum(axis=-1), 1, atol=1e-9)
    err = 1 - np.einsum("gmm->gm", conf).mean(axis=1)
    assert np.all(np.diff(err) <= 1e-12)


def test_transition_model_and_errors():
    c = make_constellation("QPSK", rho=2.0)
    rules = list(RULES.values())
    tm = transition_model([1.0, 0.5j, 2.0], c, rules)
    assert isinstance(tm, TransitionModel)
    assert tm.tables.shape == (3, 4, 2)
    assert np.allclose(tm.tables.sum(axis=-1), 1, atol=1e-9)
    assert np.all(np.isfinite(tm.log_tables))
    mc = transition_model([1.0, 0.5j, 2.0], c, rules, "monte_carlo", np.random.default_rng(0), 20_000)
    assert mc.method == "monte_carlo" and mc.mc_samples == 20_000
    assert np.allclose(mc.tables.sum(axis=-1), 1, atol=1e-3)
    with pytest.raises(DegenerateChannelError):
        transition_table(0.0, c, rules[0])
    with pytest.raises(ValueError):
        transition_table(1.0, c, rules[0], method="monte_carlo")
    with pytest.raises(ValueError):
        transition_table(1.0, c, rules[0], method="exact")
    custom = custom_constellation([(1, 0, "1"), (-1, 0, "0")])
    with pytest.raises(UnregisteredAnalyticError):
        transition_table(1.0, custom, NodeRule(F1.vector([1])))
