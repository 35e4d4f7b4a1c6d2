"""Coin ensemble behavior and flip accounting."""

import math

import pytest

from bfactory.coins import CoinEnsemble, CoinSource, FlipLedger
from bfactory.rng import RngStream


def test_coin_source_is_abstract():
    with pytest.raises(TypeError):
        CoinSource()


def test_bias_validation():
    with pytest.raises(ValueError):
        CoinEnsemble([])
    with pytest.raises(ValueError):
        CoinEnsemble([0.5, 1.5])
    with pytest.raises(ValueError):
        CoinEnsemble([-0.1])
    with pytest.raises(ValueError):
        CoinEnsemble([float("nan")])


def test_degenerate_biases():
    coins = CoinEnsemble([0.0, 1.0])
    stream = RngStream(0, 0)
    assert all(coins.flip(0, stream) == 0 for _ in range(200))
    assert all(coins.flip(1, stream) == 1 for _ in range(200))


def test_index_bounds():
    coins = CoinEnsemble([0.5, 0.5])
    stream = RngStream(0, 0)
    with pytest.raises(IndexError):
        coins.flip(2, stream)
    with pytest.raises(IndexError):
        coins.flip(-1, stream)


def test_head_rate():
    coins = CoinEnsemble([0.25])
    stream = RngStream(3, 0)
    n = 2 * 10**5
    heads = sum(coins.flip(0, stream) for _ in range(n))
    se = math.sqrt(0.25 * 0.75 / n)
    assert abs(heads / n - 0.25) < 4 * se
    assert coins.ledger.total == n
    assert coins.flips_taken == n


def test_ledger_per_coin_vs_total():
    coins = CoinEnsemble([0.2, 0.8, 0.5])
    stream = RngStream(4, 0)
    for i in (0, 1, 1, 2, 0, 1):
        coins.flip(i, stream)
    assert coins.ledger.per_coin == [2, 3, 1]
    assert coins.ledger.total == 6


def test_reset_ledger():
    coins = CoinEnsemble([0.5])
    stream = RngStream(0, 0)
    for _ in range(5):
        coins.flip(0, stream)
    coins.reset_ledger()
    assert coins.ledger.per_coin == [0]
    assert coins.ledger.total == 0
    coins.reset_ledger()  # idempotent
    assert coins.ledger.total == 0


def test_flip_ledger_standalone():
    ledger = FlipLedger(2)
    ledger.per_coin[0] += 3
    ledger.total += 3
    ledger.reset()
    assert ledger.per_coin == [0, 0] and ledger.total == 0


def test_biases_are_not_part_of_the_factory_contract():
    # Harness code may read CoinEnsemble.biases, but the CoinSource contract
    # that factories program against must not offer any bias accessor.
    assert not hasattr(CoinSource, "biases")
    assert CoinEnsemble([0.5]).biases == (0.5,)
