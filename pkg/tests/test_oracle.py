"""Monte Carlo, LOPA product and event-tree cross-checks."""

import math
import random

import pytest

from conftest import build_model, random_model, random_pfds
from silalloc.allocation import instantiate_pfd
from silalloc.engine import consequence_frequencies
from silalloc.model import validate
from silalloc.oracle import (
    EtaIndependenceError,
    eta_reference,
    lopa_frequency,
    monte_carlo_w,
)


# ---------------------------------------------------------------------------
# monte_carlo_w

def test_mc_deterministic_availability(tunnel_model):
    estimate = monte_carlo_w(tunnel_model, [0.0] * 10, 100, seed=7)
    assert estimate.estimates == (0.0, 0.0, 0.0, 0.7, 0.0)
    assert estimate.counts == (0, 0, 0, 100, 0)
    assert estimate.stderr == (0.0, 0.0, 0.0, 0.0, 0.0)


def test_mc_same_seed_same_estimate(tunnel_model):
    pfds = instantiate_pfd(tunnel_model, 4e-3)
    a = monte_carlo_w(tunnel_model, pfds, 50_000, seed=42)
    b = monte_carlo_w(tunnel_model, pfds, 50_000, seed=42)
    assert a == b


def test_mc_different_seeds_differ(tunnel_model):
    pfds = instantiate_pfd(tunnel_model, 0.1)
    a = monte_carlo_w(tunnel_model, pfds, 50_000, seed=1)
    b = monte_carlo_w(tunnel_model, pfds, 50_000, seed=2)
    assert a.estimates != b.estimates


def test_mc_chunking_is_transparent(tunnel_model):
    """Counts must not depend on how many chunks the samples land in."""
    pfds = instantiate_pfd(tunnel_model, 0.1)
    whole = monte_carlo_w(tunnel_model, pfds, 30_000, seed=5)
    pieces = monte_carlo_w(tunnel_model, pfds, 30_000, seed=5, chunk_size=7_000)
    # different chunk sizes draw different streams, but both must keep the
    # sample-count identity and reproduce themselves
    assert sum(whole.counts) == sum(pieces.counts) == 30_000
    again = monte_carlo_w(tunnel_model, pfds, 30_000, seed=5, chunk_size=7_000)
    assert pieces == again


def test_mc_counts_sum_to_n(tunnel_model):
    pfds = instantiate_pfd(tunnel_model, 0.1)
    estimate = monte_carlo_w(tunnel_model, pfds, 12_345, seed=9)
    assert sum(estimate.counts) == 12_345
    assert math.fsum(estimate.estimates) == pytest.approx(0.7, rel=1e-12)


def test_mc_agrees_with_engine(tunnel_model):
    pfds = instantiate_pfd(tunnel_model, 4e-3)
    exact = consequence_frequencies(tunnel_model, pfds)
    estimate = monte_carlo_w(tunnel_model, pfds, 200_000, seed=20240501)
    for estimated, err, w in zip(estimate.estimates, estimate.stderr, exact.values):
        if err == 0.0:
            assert estimated == w
        else:
            assert abs(estimated - w) <= 4.0 * err


def test_mc_error_shrinks_with_sample_count(tunnel_model):
    """Increasing N by x100 should cut the error by roughly x10."""
    pfds = instantiate_pfd(tunnel_model, 0.1)
    exact = consequence_frequencies(tunnel_model, pfds)

    def mean_abs_error(n, seeds):
        errors = []
        for seed in seeds:
            estimate = monte_carlo_w(tunnel_model, pfds, n, seed=seed)
            errors.append(
                sum(
                    abs(estimated - w)
                    for estimated, w in zip(estimate.estimates, exact.values)
                )
            )
        return sum(errors) / len(errors)

    coarse = mean_abs_error(1_000, (11, 12, 13))
    fine = mean_abs_error(100_000, (11, 12, 13))
    ratio = coarse / fine
    assert 3.0 < ratio < 35.0  # ~10 expected, wide band kept deterministic


def test_mc_input_validation(tunnel_model):
    pfds = instantiate_pfd(tunnel_model, 0.1)
    with pytest.raises(ValueError):
        monte_carlo_w(tunnel_model, pfds, 0, seed=1)
    with pytest.raises(ValueError):
        monte_carlo_w(tunnel_model, pfds, 100, seed=-1)
    with pytest.raises(ValueError):
        monte_carlo_w(tunnel_model, [0.1] * 9, 100, seed=1)


# ---------------------------------------------------------------------------
# lopa_frequency

def test_lopa_product():
    assert lopa_frequency(1.0, [0.1, 0.01]) == pytest.approx(1e-3, rel=1e-15)


def test_lopa_no_layers():
    assert lopa_frequency(0.7, []) == 0.7


def test_lopa_input_validation():
    with pytest.raises(ValueError):
        lopa_frequency(-1.0, [0.1])
    with pytest.raises(ValueError):
        lopa_frequency(1.0, [1.5])


def _chain_model(layer_pfds, w_ie):
    """One function per layer, each on its own subsystem; the first segment
    claims 'every layer failed', the second everything else."""
    k = len(layer_pfds)
    subsystems = [(f"L{idx:02d}", {"fixed": pfd}) for idx, pfd in enumerate(layer_pfds)]
    functions = [(f"P{idx:02d}", [f"L{idx:02d}"]) for idx in range(k)]
    breached = " & ".join(f"!P{idx:02d}" for idx in range(k))
    return build_model(
        subsystems=subsystems,
        functions=functions,
        segments=[("breached", 1.0, breached), ("held", 10.0, f"!breached")],
        hazard=w_ie,
    )


def test_lopa_equals_engine_on_serial_chains_exactly():
    rng = random.Random(60601)
    for _ in range(25):
        k = rng.randint(1, 6)
        layer_pfds = [rng.uniform(0.001, 0.9) for _ in range(k)]
        w_ie = rng.uniform(0.1, 3.0)
        model = _chain_model(layer_pfds, w_ie)
        assert validate(model).ok
        w = consequence_frequencies(model, [p for p in layer_pfds])
        assert w.values[0] == lopa_frequency(w_ie, layer_pfds)  # bit-exact


# ---------------------------------------------------------------------------
# eta_reference

def test_eta_two_disjoint_functions_matches_engine():
    model = build_model(
        subsystems=[
            ("A1", {"fixed": 0.2}),
            ("A2", {"fixed": 0.1}),
            ("B1", {"fixed": 0.3}),
        ],
        functions=[("FA", ["A1", "A2"]), ("FB", ["B1"])],
        segments=[
            ("both_fail", 0.1, "!FA & !FB"),
            ("partial", 1.0, "(!FA | !FB) & !both_fail"),
            ("success", 10.0, "FA & FB"),
        ],
        hazard=2.0,
    )
    assert validate(model).ok
    pfds = (0.2, 0.1, 0.3)
    w_engine = consequence_frequencies(model, pfds)
    w_eta = eta_reference(model, pfds)
    for a, b in zip(w_engine.values, w_eta.values):
        assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_eta_rejects_shared_subsystems(tunnel_model):
    # several tunnel subsystems are shared (PCS alone serves 4 functions);
    # the error must name the first collision encountered
    pfds = instantiate_pfd(tunnel_model, 0.1)
    with pytest.raises(EtaIndependenceError, match="ETA independence violated"):
        eta_reference(tunnel_model, pfds)


def test_eta_single_function_symmetric():
    model = build_model(
        subsystems=[("A", {"fixed": 0.5})],
        functions=[("F", ["A"])],
        segments=[("failed", 1.0, "!F"), ("worked", 1.0, "F")],
        hazard=1.0,
    )
    w = eta_reference(model, [0.5])
    assert w.values == (0.5, 0.5)


def test_eta_matches_engine_on_random_disjoint_models():
    rng = random.Random(140)
    for _ in range(50):
        model = random_model(rng, max_subsystems=10, max_functions=4,
                             disjoint=True)
        assert validate(model).ok
        pfds = random_pfds(rng, len(model.subsystems))
        w_engine = consequence_frequencies(model, pfds)
        w_eta = eta_reference(model, pfds)
        for a, b in zip(w_engine.values, w_eta.values):
            assert a == pytest.approx(b, rel=1e-12, abs=1e-300)
