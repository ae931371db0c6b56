from .gradcheck import grad_check
from .mlp import init_mlp, mlp_forward
from .params import (ParamSet, adam_step, load_arrays, load_paramsets, polyak_update,
                     save_arrays, save_paramsets, uniform_init)
from .rnn import (RecurrentHidden, RnnCellKind, advance, cell_step, gru_step, init_rnn,
                  layer_params, lstm_step, rnn_unroll, vrnn_step)
from .tensor import (NumericError, ShapeError, Tape, TapeError, Tensor, backward,
                     check_finite, linear_forward)

__all__ = [
    "NumericError", "ParamSet", "RecurrentHidden", "RnnCellKind", "ShapeError", "Tape",
    "TapeError", "Tensor", "adam_step", "advance", "backward", "cell_step", "check_finite",
    "grad_check", "gru_step", "init_mlp", "init_rnn", "layer_params", "linear_forward",
    "load_arrays", "load_paramsets", "lstm_step", "mlp_forward", "polyak_update",
    "rnn_unroll", "save_arrays", "save_paramsets", "uniform_init", "vrnn_step",
]
