"""Occulstm - room occupancy counting from environmental sensors with an LSTM."""

__version__ = "0.1.0"
