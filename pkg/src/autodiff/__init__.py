from .functional import (
    conv2d,
    conv_transpose2d,
    l1_loss,
    leaky_relu,
    linear,
    max_pool2d,
    mse_loss,
    relu,
    sigmoid,
    tanh,
)
from .gradcheck import gradcheck, numerical_gradient, relative_error
from .layers import (
    Conv2d,
    ConvTranspose2d,
    LeakyReLU,
    Linear,
    MaxPool2d,
    Module,
    ReLU,
    Reshape,
    Sequential,
    Sigmoid,
    Tanh,
)
from .optim import Adam
from .tensor import Tensor, as_tensor
