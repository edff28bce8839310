"""Sensor data: CSV parsing, windowing, and the synthetic classroom generator."""

from occulstm.data.readings import (
    DatasetSplit,
    NormStats,
    SensorReading,
    WindowedDataset,
    compute_norm_stats,
    make_windows,
    parse_sensor_csv,
    split_by_days,
    write_sensor_csv,
)

__all__ = [
    "DatasetSplit",
    "NormStats",
    "SensorReading",
    "WindowedDataset",
    "compute_norm_stats",
    "make_windows",
    "parse_sensor_csv",
    "split_by_days",
    "write_sensor_csv",
]
