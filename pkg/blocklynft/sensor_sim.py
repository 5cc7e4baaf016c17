"""
Deterministic plant telemetry: soil moisture, temperature, humidity and
weather, plus an irrigation actuator.

Every random quantity comes from one splitmix64 stream over the seed. A
unit draw is u = (z >> 11) * 2**-53 in [0, 1); noise is 2u - 1 in [-1, 1).
Each tick draws, in order: weather (only when tick % 8 == 0), temperature
noise, humidity noise. With time = tick * dt_minutes:

    temperature = t_mean + t_amp * sin(2 pi (time mod 1440) / 1440) + 0.5 noise
    humidity    = clamp(h_base - 1.5 (temperature - t_mean) + 2 noise
                        + (15 if rain), 0, 100)
    moisture'   = clamp(moisture (1 - decay_lambda) + (8 if rain)
                        + pending_irrigation, 0, 100)

Weather is sunny for u < 0.6, cloudy for u < 0.85, rain otherwise. The
moisture update applies on every tick including tick 0; a reading reports
the updated moisture. irrigate(s) queues 0.1 s points for the next tick.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, fields
from typing import Optional

from blocklynft import common

logger = logging.getLogger("blocklynft.sensor_sim")

MASK64 = 0xFFFFFFFFFFFFFFFF
MINUTES_PER_DAY = 1440
WEATHER_PERIOD = 8
WEATHER_KINDS = ("sunny", "cloudy", "rain")

TRACE_HEADER = ("tick", "time_minutes", "soil_moisture", "temperature", "humidity", "weather")


class SimulationError(common.BlocklyNftError):
    pass


class SplitMix64:
    """
    The splitmix64 generator: 64-bit state advanced by the golden gamma,
    output mixed by two xor-shift-multiply rounds.
    """

    GAMMA = 0x9E3779B97F4A7C15

    def __init__(self, seed):
        self.state = seed & MASK64
        # number of outputs produced so far
        self.draws = 0

    def next_u64(self):
        self.state = (self.state + self.GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        self.draws += 1
        return z ^ (z >> 31)

    def unit(self):
        return (self.next_u64() >> 11) * 2.0**-53

    def noise(self):
        return 2.0 * self.unit() - 1.0


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    dt_minutes: int = 30
    initial_moisture: float = 60.0
    decay_lambda: float = 0.02
    t_mean: float = 22.0
    t_amp: float = 6.0
    h_base: float = 55.0

    def __post_init__(self):
        problems = []
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed <= MASK64:
            problems.append("seed must be an unsigned 64-bit integer")
        if (
            not isinstance(self.dt_minutes, int)
            or isinstance(self.dt_minutes, bool)
            or self.dt_minutes <= 0
        ):
            problems.append("dt_minutes must be a positive integer")
        for name in ("initial_moisture", "decay_lambda", "t_mean", "t_amp", "h_base"):
            value = getattr(self, name)
            if not common.is_number(value) or not math.isfinite(value):
                problems.append("%s must be a finite number" % name)
        if not problems:
            if not 0 <= self.initial_moisture <= 100:
                problems.append("initial_moisture must be within [0, 100]")
            if not 0 <= self.decay_lambda < 1:
                problems.append("decay_lambda must be within [0, 1)")
            if not 0 <= self.h_base <= 100:
                problems.append("h_base must be within [0, 100]")
        if problems:
            raise SimulationError("invalid simulator configuration: %s" % "; ".join(problems),
                                  case="bad-config")

    @classmethod
    def from_mapping(cls, mapping, **overrides):
        """
        Build from a configuration map (unknown keys rejected), then apply
        overrides whose value is not None.
        """
        known = {f.name for f in fields(cls)}
        values = {}
        for key, value in dict(mapping or {}).items():
            if key not in known:
                raise SimulationError("unknown simulator setting '%s'" % key, case="bad-config")
            values[key] = value
        values.update((key, value) for key, value in overrides.items() if value is not None)
        return cls(**values)

    def to_mapping(self):
        return asdict(self)


@dataclass(frozen=True)
class SensorReading:
    tick: int
    time_minutes: int
    soil_moisture: float
    temperature: float
    humidity: float
    weather: str

    def channel(self, name):
        if name not in ("soil_moisture", "temperature", "humidity"):
            raise SimulationError("unknown sensor channel '%s'" % name, case="unknown-channel")
        return getattr(self, name)

    def as_row(self):
        return [common.render_value(getattr(self, name)) for name in TRACE_HEADER]


def _clamp(value, low=0.0, high=100.0):
    return min(high, max(low, value))


class PlantSimulator:
    def __init__(self, config=None):
        self.config = config if config is not None else SimConfig()
        self.rng = SplitMix64(self.config.seed)
        self.moisture = float(self.config.initial_moisture)
        self.pending_irrigation = 0.0
        self.weather: Optional[str] = None
        # index of the next tick; also the number of ticks taken
        self.next_tick = 0
        self.current: Optional[SensorReading] = None

    @property
    def draws(self):
        return self.rng.draws

    def _draw_weather(self):
        u = self.rng.unit()
        if u < 0.6:
            return "sunny"
        if u < 0.85:
            return "cloudy"
        return "rain"

    def tick(self):
        cfg = self.config
        tick = self.next_tick
        time_minutes = tick * cfg.dt_minutes
        if tick % WEATHER_PERIOD == 0:
            self.weather = self._draw_weather()
        rain = self.weather == "rain"

        phase = 2.0 * math.pi * (time_minutes % MINUTES_PER_DAY) / MINUTES_PER_DAY
        temperature = cfg.t_mean + cfg.t_amp * math.sin(phase) + 0.5 * self.rng.noise()
        humidity = _clamp(
            cfg.h_base
            - 1.5 * (temperature - cfg.t_mean)
            + 2.0 * self.rng.noise()
            + (15.0 if rain else 0.0)
        )
        self.moisture = _clamp(
            self.moisture * (1.0 - cfg.decay_lambda)
            + (8.0 if rain else 0.0)
            + self.pending_irrigation
        )
        self.pending_irrigation = 0.0

        self.next_tick += 1
        self.current = SensorReading(
            tick=tick,
            time_minutes=time_minutes,
            soil_moisture=self.moisture,
            temperature=temperature,
            humidity=humidity,
            weather=self.weather,
        )
        return self.current

    def irrigate(self, duration_s):
        if not common.is_number(duration_s) or not math.isfinite(duration_s):
            raise SimulationError(
                "irrigation duration must be a number, not %r" % (duration_s,),
                case="type-error",
            )
        if duration_s < 0:
            raise SimulationError(
                "irrigation duration must not be negative: %s" % common.render_value(duration_s),
                case="negative-duration",
            )
        self.pending_irrigation += 0.1 * duration_s
        logger.debug("irrigate %ss, pending %s" % (common.render_value(duration_s),
                                                   common.render_value(self.pending_irrigation)))


def trace(config, ticks, irrigations=None):
    """
    The first `ticks` readings of a fresh simulator. irrigations maps a tick
    index to seconds of irrigation queued just before that tick.
    """
    irrigations = irrigations or {}
    sim = PlantSimulator(config)
    readings = []
    for tick in range(ticks):
        if tick in irrigations:
            sim.irrigate(irrigations[tick])
        readings.append(sim.tick())
    return readings


def write_trace(stream, readings):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for reading in readings:
        writer.writerow(reading.as_row())
