import io
import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blocklynft import sensor_sim
from blocklynft.sensor_sim import PlantSimulator, SimConfig, SimulationError, SplitMix64
from tests import oracle
from tests.basetest import BaseTest, ExpectError


def first_sunny_seed():
    """A seed whose first weather draw is sunny."""
    for seed in itertools.count():
        if (next(oracle.splitmix64(seed)) >> 11) / float(1 << 53) < 0.6:
            return seed


def test_splitmix64_matches_reference_stream():
    rng = SplitMix64(42)
    reference = oracle.splitmix64(42)
    for _ in range(100):
        assert rng.next_u64() == next(reference)
    assert rng.draws == 100


def test_splitmix64_seed_zero_first_output():
    # published first output of splitmix64 seeded with 0
    assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF


def test_unit_and_noise_ranges():
    rng = SplitMix64(7)
    for _ in range(1000):
        assert 0.0 <= rng.unit() < 1.0
        assert -1.0 <= rng.noise() < 1.0


@pytest.mark.parametrize(
    "overrides",
    [
        dict(seed=-1),
        dict(seed=1 << 64),
        dict(dt_minutes=0),
        dict(dt_minutes=1.5),
        dict(initial_moisture=101),
        dict(decay_lambda=1.0),
        dict(h_base=-5),
        dict(t_mean=float("nan")),
    ],
)
def test_sim_config_rejects(overrides):
    with ExpectError("invalid simulator configuration", str(overrides), case="bad-config"):
        SimConfig(**overrides)


class TestSimConfig(BaseTest):
    def test_defaults(self):
        config = SimConfig()
        assert (config.dt_minutes, config.initial_moisture, config.decay_lambda) == (30, 60.0, 0.02)
        assert (config.t_mean, config.t_amp, config.h_base) == (22.0, 6.0, 55.0)

    def test_from_mapping(self):
        config = SimConfig.from_mapping({"dt_minutes": 15, "seed": 3}, seed=None, dt_minutes=60)
        assert config.seed == 3
        assert config.dt_minutes == 60
        assert SimConfig.from_mapping(config.to_mapping()) == config

    def test_from_mapping_unknown_key(self):
        with ExpectError("unknown simulator setting 'rainfall'", "typo", case="bad-config"):
            SimConfig.from_mapping({"rainfall": 3})


class TestTick(BaseTest):
    def test_tick_zero(self):
        sim = PlantSimulator(SimConfig(seed=9))
        reading = sim.tick()
        stream = oracle.splitmix64(9)
        next(stream)  # weather
        noise = 2 * ((next(stream) >> 11) / float(1 << 53)) - 1
        assert reading.tick == 0
        assert reading.time_minutes == 0
        # sin term vanishes at time 0
        assert reading.temperature == 22.0 + 0.5 * noise

    def test_time_follows_dt(self):
        sim = PlantSimulator(SimConfig(dt_minutes=45))
        times = [sim.tick().time_minutes for _ in range(4)]
        assert times == [0, 45, 90, 135]

    def test_no_decay_keeps_moisture(self):
        sim = PlantSimulator(SimConfig(seed=first_sunny_seed(), decay_lambda=0.0))
        assert [sim.tick().soil_moisture for _ in range(5)] == [60.0] * 5

    def test_irrigation_adds_a_tenth_of_seconds(self):
        sim = PlantSimulator(SimConfig(seed=first_sunny_seed(), decay_lambda=0.0))
        sim.irrigate(60)
        assert sim.tick().soil_moisture == 66.0
        assert sim.tick().soil_moisture == 66.0

    def test_zero_irrigation(self):
        seed = first_sunny_seed()
        plain = PlantSimulator(SimConfig(seed=seed))
        watered = PlantSimulator(SimConfig(seed=seed))
        watered.irrigate(0)
        assert watered.tick() == plain.tick()

    def test_irrigation_clamps(self):
        sim = PlantSimulator(SimConfig(seed=first_sunny_seed(), initial_moisture=90.0,
                                       decay_lambda=0.0))
        sim.irrigate(10000)
        assert sim.tick().soil_moisture == 100.0

    def test_irrigate_errors(self):
        sim = PlantSimulator()
        with ExpectError("negative", "negative seconds", exception=SimulationError,
                         case="negative-duration"):
            sim.irrigate(-1)
        with ExpectError("must be a number", "text seconds", case="type-error"):
            sim.irrigate("60")
        assert sim.pending_irrigation == 0.0

    def test_draw_count_per_tick(self):
        sim = PlantSimulator(SimConfig(seed=5))
        for tick in range(40):
            before = sim.draws
            sim.tick()
            assert sim.draws - before == (3 if tick % 8 == 0 else 2)

    def test_weather_holds_for_eight_ticks(self):
        sim = PlantSimulator(SimConfig(seed=11))
        readings = [sim.tick() for _ in range(32)]
        for start in range(0, 32, 8):
            assert len({r.weather for r in readings[start:start + 8]}) == 1

    def test_channel(self):
        reading = PlantSimulator().tick()
        assert reading.channel("humidity") == reading.humidity
        with ExpectError("light", "unknown channel", case="unknown-channel"):
            reading.channel("light")

    def test_monotone_decay_without_rain(self):
        sim = PlantSimulator(SimConfig(seed=3))
        previous = sim.moisture
        for _ in range(200):
            reading = sim.tick()
            if reading.weather != "rain":
                assert reading.soil_moisture <= previous
            previous = reading.soil_moisture


class TestTrace(BaseTest):
    def test_seed_42_matches_oracle(self):
        out = io.StringIO()
        sensor_sim.write_trace(out, sensor_sim.trace(SimConfig(seed=42), 48))
        assert out.getvalue() == oracle.trace_csv(42, 48)

    def test_seed_42_matches_frozen_trace(self):
        out = io.StringIO()
        sensor_sim.write_trace(out, sensor_sim.trace(SimConfig(seed=42), 48))
        with open(self.data_path("trace_seed42.csv"), "rb") as f:
            assert out.getvalue().encode("utf-8") == f.read()

    def test_other_settings_match_oracle(self):
        config = SimConfig(seed=2024, dt_minutes=20, decay_lambda=0.05, h_base=70.0)
        out = io.StringIO()
        sensor_sim.write_trace(out, sensor_sim.trace(config, 100))
        assert out.getvalue() == oracle.trace_csv(2024, 100, dt=20, decay=0.05, h_base=70.0)

    def test_deterministic(self):
        first = sensor_sim.trace(SimConfig(seed=42), 48)
        assert sensor_sim.trace(SimConfig(seed=42), 48) == first

    def test_irrigation_schedule(self):
        readings = sensor_sim.trace(SimConfig(seed=42), 10, {3: 60.0})
        plant = oracle.Plant(42)
        for tick in range(10):
            if tick == 3:
                plant.water(60)
            assert readings[tick].soil_moisture == plant.step()[2]

    def test_header(self):
        out = io.StringIO()
        sensor_sim.write_trace(out, [])
        assert out.getvalue() == "tick,time_minutes,soil_moisture,temperature,humidity,weather\n"


@settings(max_examples=50, deadline=None)
@given(
    seed=st.integers(0, (1 << 64) - 1),
    irrigations=st.dictionaries(st.integers(0, 199), st.floats(0, 1000)),
)
def test_bounds(seed, irrigations):
    for reading in sensor_sim.trace(SimConfig(seed=seed), 200, irrigations):
        assert 0.0 <= reading.soil_moisture <= 100.0
        assert 0.0 <= reading.humidity <= 100.0
        assert reading.weather in sensor_sim.WEATHER_KINDS
