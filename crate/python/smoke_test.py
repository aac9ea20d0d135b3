"""Smoke test for the compiled extension.

Build and install it first:

    pip install maturin
    maturin develop -m crates/python/Cargo.toml
    python python/smoke_test.py
"""

import datetime
import math
import os
import tempfile

import variability_py as v


def main():
    corpus = v.Corpus.synthetic(cases=1500, seed=7, climate_effect=0.2)
    assert len(corpus) == 1500
    print(f"grant rate {corpus.grant_rate():.4f}")

    scores = corpus.score()
    assert scores == corpus.oracle_score(), "indexed scores differ from the oracle"
    summary = scores.summary()
    print(f"mean omega {summary['mean_omega']:.4f}  mean gamma {summary['mean_gamma']:.4f}  "
          f"mean phi {summary['mean_phi']:.4f}")

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "corpus.csv")
        corpus.write(path)
        again = v.Corpus.read(path)
        assert again.score() == scores

    rho, _ = v.spearman([1.0, 2.0, 3.0], [1.0, 3.0, 2.0])
    assert rho == 0.5
    assert v.bonferroni([0.001, 0.3], 0.05) == [True, False]

    start = datetime.date(2012, 1, 2)
    weeks = [(start + datetime.timedelta(weeks=i)).isoformat() for i in range(260)]
    values = [0.3 + 0.0005 * i + 0.05 * math.sin(2 * math.pi * i / 52.18) for i in range(260)]
    fit = v.fit_trend(weeks, values)
    worst = max(abs(a - b) for a, b in zip(fit["fitted"], values))
    print(f"trend fit max abs error {worst:.4f}")
    assert worst < 0.05

    print("ok")


if __name__ == "__main__":
    main()
