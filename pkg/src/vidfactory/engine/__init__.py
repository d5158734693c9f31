from .autograd import Tensor
from .backend import backend_name

__all__ = ["Tensor", "backend_name"]
