import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from sboc import engine
from sboc.core import (
    BoxDomain,
    Dataset,
    DegenerateSpread,
    IllConditioned,
    InvalidConfig,
    ObjectiveFailure,
    SingularSystem,
    SurrogateFailure,
    default_epsilon,
)
from sboc.engine import (
    SbocConfig,
    SbocOptimizer,
    eta_for_iteration,
    exploitation_point,
    exploitation_weights,
    minimize_surrogate,
    neighborhood_size,
    run,
)
from sboc.surrogate import SurrogateModel, SurrogateSpec

UNIT_2D = BoxDomain([0.0, 0.0], [1.0, 1.0])


def sphere(x):
    return float(np.sum((np.asarray(x) - 0.3) ** 2))


class QuadraticModel(SurrogateModel):
    kind = "test"

    def __init__(self, center, slope=None):
        self.center = np.asarray(center, dtype=float)
        self.slope = slope

    def predict(self, x):
        X = np.atleast_2d(x)
        if self.slope is not None:
            values = X @ self.slope
        else:
            values = np.sum((X - self.center) ** 2 * np.arange(1, X.shape[1] + 1), axis=1)
        return float(values[0]) if np.ndim(x) == 1 else values

    def to_dict(self):
        return {}


# === η und Nachbarschaft ===

@pytest.mark.parametrize("iteration, eta", [(1, 0.5), (2, 1.5), (3, 2.5), (5, 10.0), (6, 0.5), (13, 2.5)])
def test_eta_cycle(iteration, eta):
    assert eta_for_iteration(iteration) == eta


def test_eta_needs_positive_iteration():
    with pytest.raises(InvalidConfig):
        eta_for_iteration(0)


@pytest.mark.parametrize("count, size", [(10, 2), (11, 3), (15, 3), (16, 4), (3, 1), (1, 1)])
def test_neighborhood_size(count, size):
    assert neighborhood_size(count, 0.2) == size


# === Exploitation ===

def test_equal_values_give_centroid():
    dataset = Dataset(2)
    for x in ([0.1, 0.1], [0.5, 0.1], [0.1, 0.5], [0.5, 0.5]):
        dataset.add(x, 2.0)
    members, weights = exploitation_weights(dataset, 1.5, 1.0)
    assert_allclose(weights, 0.25)
    assert_allclose(exploitation_point(dataset, 1.5, 1.0, 1e-4), [0.3, 0.3])


def test_two_point_neighborhood():
    eta = 2.5
    x_best, x_b = np.array([0.2, 0.4]), np.array([0.6, 0.9])
    dataset = Dataset(2)
    dataset.add(x_best, -1.0)
    dataset.add(x_b, -1.0 + eta)
    _, weights = exploitation_weights(dataset, eta, 1.0)
    assert_allclose(weights, np.array([1.0, math.exp(-1)]) / (1 + math.exp(-1)))
    expected = (x_best + math.exp(-1) * x_b) / (1 + math.exp(-1))
    assert_allclose(exploitation_point(dataset, eta, 1.0, 1e-4), expected, atol=1e-15)


def test_eta_limits():
    dataset = Dataset(1)
    for x, y in ((0.1, 0.0), (0.4, 1.0), (0.7, 3.0)):
        dataset.add([x], y)
    _, wide = exploitation_weights(dataset, 1e6, 1.0)
    assert_allclose(wide, 1 / 3, atol=1e-3)
    _, sharp = exploitation_weights(dataset, 1e-6, 1.0)
    assert sharp[0] == pytest.approx(1.0)


def test_incumbent_is_in_neighborhood():
    rng = np.random.default_rng(0)
    dataset = Dataset(3)
    for x in rng.random((20, 3)):
        dataset.add(x, sphere(x))
    members, weights = exploitation_weights(dataset, 0.5, 0.2)
    assert dataset.best_index in members
    assert len(members) == 4
    assert weights.sum() == pytest.approx(1.0)


def test_exploitation_rejected_when_too_close():
    dataset = Dataset(1)
    dataset.add([0.5], 0.0)
    dataset.add([0.50001], 100.0)
    assert exploitation_point(dataset, 0.5, 1.0, 1e-4) is None


# === Surrogat-Minimierung ===

def test_minimize_quadratic_interior():
    model = QuadraticModel([0.37, 0.81])
    starts = np.random.default_rng(0).random((5, 2))
    assert_allclose(minimize_surrogate(model, UNIT_2D, starts, 400), [0.37, 0.81], atol=1e-4)


def test_minimize_monotone_goes_to_origin():
    model = QuadraticModel(None, slope=np.array([1.0, 2.0]))
    starts = np.random.default_rng(1).random((4, 2))
    assert_allclose(minimize_surrogate(model, UNIT_2D, starts, 400), [0.0, 0.0], atol=1e-4)


def test_minimize_stays_in_bounds():
    model = QuadraticModel([1.5, -0.5])
    x = minimize_surrogate(model, UNIT_2D, np.random.default_rng(2).random((3, 2)), 400)
    assert np.all((x >= 0) & (x <= 1))


class CountingModel(QuadraticModel):
    def __init__(self, center):
        super().__init__(center)
        self.batch_calls = 0

    def predict(self, x):
        if np.ndim(x) == 2:
            self.batch_calls += 1
        return super().predict(x)


def test_minimize_screens_starts_in_one_batch(monkeypatch):
    powell_starts = []
    original = engine.minimize

    def recording(fun, x0, **kwargs):
        powell_starts.append(np.array(x0))
        return original(fun, x0, **kwargs)

    monkeypatch.setattr(engine, "minimize", recording)
    model = CountingModel([0.37, 0.81])
    starts = np.random.default_rng(4).random((25, 2))
    x = minimize_surrogate(model, UNIT_2D, starts, 400, max_starts=3)

    assert model.batch_calls == 1
    assert len(powell_starts) == 3
    best_three = starts[np.argsort(model.predict(starts))[:3]]
    assert_array_equal(np.array(powell_starts), best_three)
    assert_allclose(x, [0.37, 0.81], atol=1e-4)


def test_minimize_never_worse_than_any_start():
    model = QuadraticModel([0.9, 0.05])
    starts = np.random.default_rng(5).random((30, 2))
    for max_starts in (None, 1, 5):
        x = minimize_surrogate(model, UNIT_2D, starts, 50, max_starts=max_starts)
        assert model.predict(x) <= model.predict(starts).min()


def test_minimize_rejects_zero_starts():
    with pytest.raises(InvalidConfig):
        minimize_surrogate(QuadraticModel([0.5, 0.5]), UNIT_2D, np.full((2, 2), 0.5), 50, max_starts=0)


# === Konfiguration ===

def test_config_defaults():
    config = SbocConfig(k_max=30).resolve(3)
    assert config.k0 == 15
    assert config.epsilon == pytest.approx(1e-4 * math.sqrt(3))
    assert config.multistart_budget == 600
    assert config.multistart_starts == 10


@pytest.mark.parametrize("changes", [
    {"k0": 3},
    {"k_max": 0},
    {"epsilon": 0.0},
    {"eta_schedule": ()},
    {"eta_schedule": (1.0, -1.0)},
    {"neighborhood_fraction": 0.0},
    {"elbow_threshold": 1.0},
    {"multistart_starts": 0},
])
def test_config_invalid(changes):
    with pytest.raises(InvalidConfig):
        SbocConfig(k_max=30, **changes).resolve(2)


def test_multistart_starts_reach_minimizer(monkeypatch):
    seen = []
    original = engine.minimize_surrogate

    def recording(model, domain, starts, budget, max_starts=None):
        seen.append((budget, max_starts))
        return original(model, domain, starts, budget, max_starts)

    monkeypatch.setattr(engine, "minimize_surrogate", recording)
    run(sphere, UNIT_2D, SbocConfig(k_max=16, multistart_starts=2, seed=3))
    assert seen
    assert set(seen) == {(400, 2)}


def test_initial_points_wrong_width():
    with pytest.raises(InvalidConfig):
        SbocConfig(k_max=30, initial_points=np.zeros((5, 3))).resolve(2)


# === Läufe ===

def test_budget_exhausted_by_initial_design():
    result = run(sphere, UNIT_2D, SbocConfig(k_max=10, k0=10, seed=1))
    assert result.iterations == []
    assert result.n_evaluations == 10
    f = result.f_history
    assert result.f_best == f.min()
    assert_array_equal(result.x_best, result.ledger[int(np.argmin(f))].x)


def test_constant_objective():
    result = run(lambda x: 7.0, UNIT_2D, SbocConfig(k_max=20, seed=2))
    assert result.f_best == 7.0
    assert result.termination == "budget"
    assert 20 <= result.n_evaluations <= 22


def test_initial_points_are_evaluated_in_order(shcb_start_points, shcb_domain):
    from sboc.core import denormalize
    points, _ = shcb_start_points
    raw = np.array([denormalize(x, shcb_domain) for x in points])
    result = run(sphere, shcb_domain, SbocConfig(k_max=10, initial_points=raw))
    assert_allclose(np.array([e.x for e in result.ledger]), points, atol=1e-12)
    assert all(e.strategy == "initial" for e in result.ledger)


def test_duplicate_initial_points_are_dropped():
    raw = np.array([[0.1, 0.1], [0.1, 0.1], [0.5, 0.2], [0.9, 0.7], [0.3, 0.8], [0.6, 0.6]])
    result = run(sphere, UNIT_2D, SbocConfig(k_max=5, initial_points=raw))
    assert result.n_evaluations == 5


def test_kriging_augments_initial_design():
    config = SbocConfig(k_max=12, k0=4, surrogate=SurrogateSpec("kriging"), seed=3)
    result = run(sphere, UNIT_2D, config)
    strategies = [e.strategy for e in result.ledger]
    assert strategies[:4] == ["initial"] * 4
    # Kriging in 2D braucht 7 Punkte
    assert strategies[4:7] == ["augment"] * 3
    assert all(e.iteration == 0 for e in result.ledger[:7])


def test_trace_frame(tmp_path):
    result = run(sphere, UNIT_2D, SbocConfig(k_max=16, seed=4))
    frame = result.to_trace_frame()
    assert list(frame.columns) == ["iter", "K", "strategy", "x1", "x2", "f", "xbest1", "xbest2", "fbest"]
    assert len(frame) == result.n_evaluations
    assert np.all(np.diff(frame["fbest"]) <= 0)
    assert frame["fbest"].iloc[-1] == result.f_best
    path = tmp_path / "trace.csv"
    result.write_trace(path)
    assert path.read_text().splitlines()[0] == "iter,K,strategy,x1,x2,f,xbest1,xbest2,fbest"


def test_iteration_records():
    result = run(sphere, UNIT_2D, SbocConfig(k_max=25, seed=5))
    for i, record in enumerate(result.iterations, start=1):
        assert record.iteration == i
        assert record.eta == eta_for_iteration(i)
        assert [a.strategy for a in record.additions] == ["surrogate-min", "explore", "exploit"]
        assert set(record.timings) == {
            "surrogate_training", "surrogate_minimization", "clustering", "exploration", "exploitation",
        }
        for addition in record.additions:
            assert addition.skipped == (addition.reason is not None)


# === Fehlerpfade ===

def test_objective_exception_keeps_partial_result():
    calls = []

    def flaky(x):
        calls.append(x)
        if len(calls) == 13:
            raise RuntimeError("Simulation abgestürzt")
        return sphere(x)

    with pytest.raises(ObjectiveFailure) as info:
        run(flaky, UNIT_2D, SbocConfig(k_max=30, seed=6))
    assert isinstance(info.value.__cause__, RuntimeError)
    assert info.value.partial_result.n_evaluations == 12


def test_nonfinite_objective():
    with pytest.raises(ObjectiveFailure):
        run(lambda x: float("nan"), UNIT_2D, SbocConfig(k_max=20))


def test_training_failure_in_first_iteration(monkeypatch):
    def fail(spec, dataset, rng):
        raise IllConditioned("kaputt")

    monkeypatch.setattr(engine, "train", fail)
    with pytest.raises(SurrogateFailure):
        run(sphere, UNIT_2D, SbocConfig(k_max=20, seed=7))


def test_training_failure_later_skips_first_point(monkeypatch):
    original = engine.train
    seen = []

    def fail_second(spec, dataset, rng):
        seen.append(rng.label)
        if "iter-2/" in rng.label:
            raise SingularSystem("kaputt")
        return original(spec, dataset, rng)

    monkeypatch.setattr(engine, "train", fail_second)
    result = run(sphere, UNIT_2D, SbocConfig(k_max=25, seed=8))
    second = result.iterations[1].additions[0]
    assert second.skipped and second.reason == "surrogate-error"
    assert result.n_evaluations >= 25


def test_degenerate_spread_falls_back_to_two_clusters(monkeypatch):
    def degenerate(points, rng, threshold=0.1, max_clusters=12):
        raise DegenerateSpread("flach")

    monkeypatch.setattr(engine, "elbow_select", degenerate)
    result = run(sphere, UNIT_2D, SbocConfig(k_max=16, seed=9))
    assert all(record.n_clusters == 2 for record in result.iterations)


def test_stall_guard():
    # riesiges ε: nach dem Anfangsdesign wird kein Kandidat mehr akzeptiert
    config = SbocConfig(k_max=50, epsilon=10.0, max_stalled_iterations=3, seed=10)
    result = run(sphere, UNIT_2D, config)
    assert result.termination == "stalled"
    assert len(result.iterations) == 3
    assert result.n_evaluations == 10


# === Invarianten über zufällige Probleme ===

def random_problem(seed):
    rng = np.random.default_rng(seed)
    dimension = int(rng.integers(1, 4))
    lower = rng.uniform(-5, 0, dimension)
    upper = lower + rng.uniform(0.5, 10, dimension)
    center = rng.uniform(lower, upper)
    scale = rng.uniform(0.5, 3, dimension)
    amplitude, frequency = rng.uniform(0, 1), rng.uniform(0.5, 3)

    def objective(x):
        z = (np.asarray(x) - center) / (upper - lower)
        return float(np.sum(scale * z ** 2) + amplitude * np.sin(frequency * np.sum(z)))

    config = SbocConfig(
        k_max=int(rng.integers(5 * dimension + 3, 5 * dimension + 20)),
        seed=int(rng.integers(0, 2 ** 32)),
        neighborhood_fraction=float(rng.uniform(0.1, 0.5)),
        eta_schedule=tuple(rng.uniform(0.1, 10, int(rng.integers(1, 6)))),
    )
    return objective, BoxDomain(lower, upper), config


@pytest.mark.parametrize("seed", range(20))
def test_invariants(seed):
    objective, domain, config = random_problem(seed)
    optimizer = SbocOptimizer(objective, domain, config)
    result = optimizer.run()
    resolved = config.resolve(domain.dimension)

    best = [record.f_best for record in result.iterations]
    assert all(b <= a for a, b in zip(best, best[1:]))
    assert result.n_evaluations <= config.k_max + 2
    assert result.f_best == result.f_history.min()

    X = np.array([e.x for e in result.ledger])
    for k in range(resolved.k0, len(X)):
        distances = np.linalg.norm(X[:k] - X[k], axis=1)
        assert np.all(distances > resolved.epsilon)

    rerun = run(objective, domain, config)
    assert_array_equal(rerun.f_history, result.f_history)
    assert_array_equal(np.array([e.x for e in rerun.ledger]), X)

    _, weights = exploitation_weights(optimizer.dataset, resolved.eta_schedule[0], resolved.neighborhood_fraction)
    assert weights.sum() == pytest.approx(1.0)


def test_default_epsilon_scales_with_dimension():
    assert default_epsilon(4) == pytest.approx(2e-4)
