import json

import numpy as np
import pytest

from codiv.cli import main
from codiv.harness import (
    ConfigError,
    ExperimentConfig,
    achievable_rate,
    estimate_diversity,
    load_config,
    read_csv,
    run_ser_sweep,
)
from codiv.harness.rate import mutual_information
from codiv.harness.sweep import SweepPoint, clopper_pearson


def test_noiseless_sweep_has_no_errors():
    for family, decoders, constellation, B, N in [
        ("scrs", ["ml", "subset_ml", "hamming", "mrc", "uncoded_majority"], "QPSK", 1, 10),
        ("scrs", ["ml", "hamming"], "16QAM", 2, 7),
        ("simplex", ["ml", "subset_ml"], "8PSK", 1, 7),
        ("codeword_set", ["ml", "hamming"], "QPSK", 1, 10),
    ]:
        cfg = ExperimentConfig(constellation=constellation, B=B, N=N, family=family, decoders=decoders,
                               snr_db=[-5.0, 10.0], trials=2000, noise=False)
        res = run_ser_sweep(cfg)
        assert all(p.errors == 0 for p in res.points), family


def test_validation_lists_every_problem():
    cfg = ExperimentConfig(constellation="QPSK", B=3, trials=0, decoders=["ml", "viterbi"], snr_db=[])
    with pytest.raises(ConfigError) as exc:
        cfg.validate()
    text = " ".join(exc.value.problems)
    assert len(exc.value.problems) >= 4
    for needle in ("2/3", "trials", "viterbi", "snr_db"):
        assert needle in text
    with pytest.raises(ConfigError):
        ExperimentConfig(channel="fixed_gain", gains=[1.0, 1.0]).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(family="simplex", N=4).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(constellation="8PSK", family="codeword_set", N=10).validate()


def test_load_config(tmp_path):
    path = tmp_path / "exp.toml"
    path.write_text(
        'seed = 4\n[constellation]\nname = "16QAM"\n[code]\nfamily = "scrs"\nB = 2\nN = 7\n'
        '[channel]\nkind = "fixed_gain"\ngains = [1, 1, 1, 1, 1, 1, 1]\n'
        '[sim]\ntrials = 10\nsnr_db = [0.0, 3.0]\ndecoders = ["ml", "hamming"]\n'
    )
    cfg = load_config(path)
    assert (cfg.constellation, cfg.B, cfg.N, cfg.K, cfg.channel, cfg.seed) == ("16QAM", 2, 7, 2, "fixed_gain", 4)
    cfg.validate()
    path.write_text("colour = 3\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_synthetic_slopes():
    snr = np.arange(0, 31, 2.5)
    for d in (1, 2, 3.5):
        for c in (1.0, 0.01, 40.0):
            curve = [(s, c * 10 ** (-d * s / 10)) for s in snr]
            fit = estimate_diversity(curve, window=(10, 30))
            assert fit.estimable and fit.slope == pytest.approx(d, abs=1e-12)


def test_diversity_not_estimable():
    pts = [SweepPoint("ml", s, 1000, e) for s, e in [(0, 500), (5, 150), (10, 40), (15, 3)]]
    fit = estimate_diversity(pts)
    assert not fit.estimable and fit.slope is None and fit.reason
    fit = estimate_diversity(pts, window=(0, 10))
    assert not fit.estimable
    assert "not estimable" in str(fit)


def test_diversity_confidence_from_counts():
    rng = np.random.default_rng(0)
    snr = np.arange(0, 21, 2.5)
    n = 10**6
    pts = [SweepPoint("x", s, n, int(rng.binomial(n, 0.3 * 10 ** (-s / 10)))) for s in snr]
    fit = estimate_diversity(pts)
    lo, hi = fit.ci95
    assert fit.stderr > 0 and lo < 1.0 < hi


def test_csv_round_trip():
    cfg = ExperimentConfig(N=3, family="simplex", decoders=["ml", "hamming"], snr_db=[0.0, 4.0], trials=3000)
    res = run_ser_sweep(cfg)
    back = read_csv(res.to_csv())
    assert back.body_csv() == res.body_csv()
    assert back.metadata["d_min"] == 2
    for p in res.points:
        lo, hi = p.interval
        assert lo <= p.ser <= hi
    assert clopper_pearson(0, 10)[0] == 0.0
    assert clopper_pearson(10, 10)[1] == 1.0
    assert json.dumps(res.to_json())


def test_ml_beats_hamming_statistically():
    cfg = ExperimentConfig(N=10, family="scrs", decoders=["ml", "hamming", "subset_ml"],
                           snr_db=[0.0, 3.0, 6.0], trials=40_000, seed=5)
    res = run_ser_sweep(cfg)
    ml = res.curve("ml")
    for name in ("hamming", "subset_ml"):
        for a, b in zip(ml, res.curve(name)):
            if b.errors >= 100:
                assert a.ser <= b.ser + 3 * np.hypot(a.sigma, b.sigma)


def test_mutual_information_limits():
    M, q = 4, 2
    uniform = np.full((3, M, q), 1.0 / q)
    assert mutual_information(uniform) == pytest.approx(0.0, abs=1e-12)
    # perfect separating quantizer: simplex codewords are distinct
    book = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1], [0, 0, 0]])
    perfect = np.stack([np.eye(q)[book[:, i]] for i in range(3)])
    assert mutual_information(perfect) == pytest.approx(2.0)


def test_rate_bounds_and_zero_snr():
    cfg = ExperimentConfig(N=3, family="simplex", snr_db=[-300.0, 0.0, 10.0, 40.0], seed=3)
    res = achievable_rate(cfg, draws=300, mrc_samples=32)
    for p in res.points:
        assert 0.0 <= p.rate <= 2.0
    for name in ("coded", "naive", "centralized"):
        assert res.curve(name)[0].rate == pytest.approx(0.0, abs=1e-9)
    assert res.curve("coded")[-1].rate > 1.9
    with pytest.raises(ConfigError):
        achievable_rate(ExperimentConfig(N=21, family="scrs"), draws=2)


def test_cli_code(capsys):
    assert main(["code", "--family", "scrs", "--N", "10", "--K", "2", "--B", "1"]) == 0
    out = capsys.readouterr().out
    assert "d_min 6" in out
    assert "griesmer_equality" in out and "False" in out
    assert "max d permitted by Griesmer at N=10: 6 (attained)" in out


def test_cli_exit_codes(capsys, tmp_path):
    assert main(["ser", "--trials", "0"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config"
    assert main(["ser", "--family", "nope"]) == 2
    assert main(["ser", "--channel", "fixed_gain", "--gains", "1 0 1", "--trials", "10"]) == 2
    assert main(["diversity", str(tmp_path / "missing.csv")]) == 2
    out = tmp_path / "s.csv"
    assert main(["ser", "--N", "3", "--trials", "500", "--snr", "0 5", "--out", str(out)]) == 0
    assert main(["diversity", str(out), "--min-errors", "1"]) == 0
    assert "not estimable" in capsys.readouterr().out
