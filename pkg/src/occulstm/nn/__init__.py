"""The LSTM network, its label encoding, training and checkpoints."""

from occulstm.nn.model import HeadParams, LstmModel, LstmParams, ModelConfig

__all__ = ["HeadParams", "LstmModel", "LstmParams", "ModelConfig"]
