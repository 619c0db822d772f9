from .tape import Var, as_var, backward, concat, softmax, stack
from .params import ParamStore, collect_grads
from .layers import bigru, dense, gru_sequence, init_bigru, init_dense, init_gru
from .optim import Adam
from .check import finite_difference_gradient, gradient

__all__ = [
    "Var",
    "as_var",
    "backward",
    "concat",
    "softmax",
    "stack",
    "ParamStore",
    "collect_grads",
    "bigru",
    "dense",
    "gru_sequence",
    "init_bigru",
    "init_dense",
    "init_gru",
    "Adam",
    "gradient",
    "finite_difference_gradient",
]
