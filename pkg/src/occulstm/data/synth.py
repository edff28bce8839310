"""Synthetic classroom data: occupancy schedules driving a CO2 mass balance.

CO2 follows a first-order balance between occupant emission and air exchange
with the outside::

    co2[t+1] = co2[t] + g * people[t] - k * (co2[t] - ambient)

Temperature relaxes toward ``base_temp + temp_per_person * people`` with the same
rate ``k``. Humidity, noise and pressure are a baseline plus an occupancy-scaled
bump. Gaussian sensor noise is added to the reported values only, so the
underlying state stays noise-free.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from occulstm.config import child_seed
from occulstm.data.readings import SECONDS_PER_DAY, SensorReading
from occulstm.nn.encoding import MAX_COUNT

logger = logging.getLogger(__name__)

# 2021-03-01T00:00:00Z, a Monday
DEFAULT_START = 1_614_556_800

# Session start hours a timetable can use; two hours apart so sessions never overlap
SESSION_HOURS = (8, 10, 13, 15, 18)
MAX_SESSIONS = 3


@dataclass(frozen=True)
class RoomParams:
    """Physical constants of the simulated room, per sampling step."""

    ambient_co2: float = 420.0
    co2_per_person: float = 2.0
    air_exchange: float = 0.05
    # temp, hum, co2, noise, pressure
    sensor_noise_sd: tuple[float, float, float, float, float] = (0.05, 0.3, 5.0, 0.4, 0.05)
    base_temp: float = 21.0
    temp_per_person: float = 0.08
    base_humidity: float = 40.0
    humidity_per_person: float = 0.4
    base_noise: float = 35.0
    noise_per_person: float = 2.0
    base_pressure: float = 1013.0
    pressure_per_person: float = 0.01
    step_minutes: int = 5
    start_timestamp: int = DEFAULT_START

    def __post_init__(self) -> None:
        if not 0 < self.air_exchange <= 1:
            raise ValueError(f"air_exchange must be in (0, 1], got {self.air_exchange}")
        if self.co2_per_person <= 0:
            raise ValueError(f"co2_per_person must be positive, got {self.co2_per_person}")
        if self.step_minutes <= 0 or (24 * 60) % self.step_minutes:
            raise ValueError(f"step_minutes must be a positive divisor of 1440, got {self.step_minutes}")
        if len(self.sensor_noise_sd) != 5 or min(self.sensor_noise_sd) < 0:
            raise ValueError("sensor_noise_sd needs five non-negative values")

    @property
    def steps_per_day(self) -> int:
        return 24 * 60 // self.step_minutes

    def without_noise(self) -> RoomParams:
        return replace(self, sensor_noise_sd=(0.0, 0.0, 0.0, 0.0, 0.0))

    def equilibrium_co2(self, people: int) -> float:
        """Steady-state CO2 for a constant occupancy."""
        return self.ambient_co2 + self.co2_per_person * people / self.air_exchange


Session = tuple[int, int, int]


@dataclass(frozen=True)
class OccupancySchedule:
    """Per-day ``(start_step, end_step, people)`` sessions; ``end_step`` is exclusive."""

    days: list[list[Session]] = field(default_factory=list)
    step_minutes: int = 5

    def counts(self, day: int, steps: int) -> np.ndarray:
        """Occupancy at every step of one day."""
        people = np.zeros(steps, dtype=np.int64)
        for start, end, n in self.days[day]:
            people[start:end] = n
        return people


def gen_schedule(days: int, seed: int, step_minutes: int = 5) -> OccupancySchedule:
    """Draw 0-3 class sessions per day at timetable hours with 0-15 attendees."""
    if days < 1:
        raise ValueError(f"days must be at least 1, got {days}")
    rng = np.random.Generator(np.random.PCG64(child_seed(seed, "synth.schedule")))

    schedule: list[list[Session]] = []
    for _ in range(days):
        n_sessions = int(rng.integers(0, MAX_SESSIONS + 1))
        hours = sorted(rng.choice(SESSION_HOURS, size=n_sessions, replace=False).tolist())
        sessions = []
        for hour in hours:
            minutes = int(rng.integers(50, 111))
            start = hour * 60 // step_minutes
            end = start + max(1, minutes // step_minutes)
            sessions.append((start, end, int(rng.integers(0, MAX_COUNT + 1))))
        schedule.append(sessions)
    return OccupancySchedule(days=schedule, step_minutes=step_minutes)


def gen_readings(schedule: OccupancySchedule, params: RoomParams, seed: int) -> list[SensorReading]:
    """Simulate one reading per step for every scheduled day.

    CO2 and temperature state carry over from one day to the next; the first
    day starts at ambient CO2 and base temperature.
    """
    if schedule.step_minutes != params.step_minutes:
        raise ValueError("schedule and room parameters use different step sizes")
    steps = params.steps_per_day
    step_seconds = params.step_minutes * 60
    sd = np.asarray(params.sensor_noise_sd)
    k = params.air_exchange

    co2 = params.ambient_co2
    temp = params.base_temp
    readings: list[SensorReading] = []
    for day in range(len(schedule.days)):
        rng = np.random.Generator(np.random.PCG64(child_seed(seed, f"synth.readings.{day}")))
        noise = rng.standard_normal((steps, 5)) * sd
        people = schedule.counts(day, steps)
        day_start = params.start_timestamp + day * SECONDS_PER_DAY
        for t in range(steps):
            n = int(people[t])
            state = (
                temp,
                params.base_humidity + params.humidity_per_person * n,
                co2,
                params.base_noise + params.noise_per_person * n,
                params.base_pressure + params.pressure_per_person * n,
            )
            temp_r, hum_r, co2_r, noise_r, pressure_r = (s + e for s, e in zip(state, noise[t]))
            readings.append(
                SensorReading(
                    timestamp=day_start + t * step_seconds,
                    temperature=float(temp_r),
                    humidity=float(np.clip(hum_r, 0.0, 100.0)),
                    co2=float(max(co2_r, 1.0)),
                    noise=float(noise_r),
                    pressure=float(pressure_r),
                    people=n,
                )
            )
            co2 = co2 + params.co2_per_person * n - k * (co2 - params.ambient_co2)
            temp = temp + k * (params.base_temp + params.temp_per_person * n - temp)
    logger.debug("simulated %d readings over %d day(s)", len(readings), len(schedule.days))
    return readings


def write_schedule_csv(schedule: OccupancySchedule) -> str:
    """Ground-truth sessions as ``day,start_step,end_step,people`` rows."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("day", "start_step", "end_step", "people"))
    for day, sessions in enumerate(schedule.days):
        for start, end, n in sessions:
            writer.writerow((day, start, end, n))
    return out.getvalue()
