from __future__ import annotations

import numpy as np
import pytest

from occulstm.data.readings import SECONDS_PER_DAY, SensorReading
from occulstm.data.synth import RoomParams, gen_readings, gen_schedule
from occulstm.nn.model import LstmModel, ModelConfig

DAY0 = 1_614_556_800
HEADER_LINE = "timestamp,temp,hum,co2,noise,pressure,people"


def reading(timestamp: int, co2: float = 450.0, people: int | None = 0, temp: float = 21.5) -> SensorReading:
    return SensorReading(timestamp, temp, 43.0, co2, 53.0, 1020.8, people)


def day_of_readings(day: int, rows: int, step: int = 300, people: int | None = 0) -> list[SensorReading]:
    """``rows`` readings five minutes apart starting at midnight of ``day``."""
    start = DAY0 + day * SECONDS_PER_DAY
    return [reading(start + n * step, co2=400.0 + n, people=people) for n in range(rows)]


@pytest.fixture
def csv_text() -> str:
    return "\n".join([
        HEADER_LINE,
        f"{DAY0},21.5,43,482,53,1020.8,0",
        f"{DAY0 + 300},21.6,43,504,56,1020.6,13",
        f"{DAY0 + 600},21.6,44,530,57,1020.5,",
        "",
    ])


@pytest.fixture(scope="session")
def synthetic_days() -> list[SensorReading]:
    """Three simulated days with the default room."""
    params = RoomParams()
    return gen_readings(gen_schedule(3, seed=4), params, seed=4)


@pytest.fixture
def tiny_model() -> LstmModel:
    return LstmModel.initialize(ModelConfig(hidden_dim=4, window_len=3), seed=11)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(20240601))
