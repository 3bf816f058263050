"""Model zoo: seven buildable segmentation variants with one logit channel.

Variant ids: unet, enet, unext_s, unext_b, topformer_t, topformer_s,
topformer_b. Spatial inputs must be at least 64 pixels and divisible by 32
(five halvings); outputs keep the input spatial size.
"""

from __future__ import annotations

import torch
import torch.nn as nn

from ..errors import ConfigError, ContractError
from .unet import UNet, DoubleConv
from .enet import ENet, RegularBottleneck
from .unext import UNeXt, TokenizedMLPBlock
from .topformer import TopFormer, Attention, ConvMLP, SemanticsBlock

__all__ = [
    "VARIANTS", "Network", "build_model", "count_parameters",
    "variant_parameter_count", "normalize_variant",
    "UNet", "ENet", "UNeXt", "TopFormer",
    "DoubleConv", "RegularBottleneck", "TokenizedMLPBlock", "Attention",
    "ConvMLP", "SemanticsBlock",
]

_BUILDERS = {
    "unet": lambda: UNet(),
    "enet": lambda: ENet(),
    "unext_s": lambda: UNeXt(channels=(8, 16, 32, 64, 128)),
    "unext_b": lambda: UNeXt(channels=(16, 32, 128, 160, 256)),
    "topformer_t": lambda: TopFormer(size="tiny"),
    "topformer_s": lambda: TopFormer(size="small"),
    "topformer_b": lambda: TopFormer(size="base"),
}

VARIANTS = tuple(_BUILDERS)

SPATIAL_MULTIPLE = 32
MIN_SPATIAL = 64


def normalize_variant(name: str) -> str:
    key = name.strip().lower().replace("-", "_")
    if key not in _BUILDERS:
        raise ConfigError(f"unknown model variant {name!r}; choose from {VARIANTS}")
    return key


def validate_batch(x: torch.Tensor) -> None:
    if x.ndim != 4 or x.shape[1] != 3:
        raise ContractError(f"expected an Nx3xHxW batch, got shape {tuple(x.shape)}")
    n, _, h, w = x.shape
    if n < 1:
        raise ContractError("batch must hold at least one image")
    if h < MIN_SPATIAL or w < MIN_SPATIAL:
        raise ContractError(f"spatial size {h}x{w} below minimum {MIN_SPATIAL}")
    if h % SPATIAL_MULTIPLE or w % SPATIAL_MULTIPLE:
        raise ContractError(
            f"spatial size {h}x{w} must be divisible by {SPATIAL_MULTIPLE}"
        )


class Network(nn.Module):
    """A built variant: validates input shape, then runs the wrapped net."""

    def __init__(self, variant: str, module: nn.Module, seed: int | None = None):
        super().__init__()
        self.variant = variant
        self.seed = seed
        self.net = module

    def forward(self, x):
        validate_batch(x)
        return self.net(x)


def _init_module(m: nn.Module) -> None:
    if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d)):
        nn.init.kaiming_normal_(m.weight, mode="fan_in", nonlinearity="relu")
        if m.bias is not None:
            nn.init.zeros_(m.bias)
    elif isinstance(m, nn.Linear):
        nn.init.trunc_normal_(m.weight, std=0.02)
        if m.bias is not None:
            nn.init.zeros_(m.bias)
    elif isinstance(m, (nn.BatchNorm2d, nn.LayerNorm, nn.GroupNorm)):
        if m.weight is not None:
            nn.init.ones_(m.weight)
        if m.bias is not None:
            nn.init.zeros_(m.bias)


def init_weights(module: nn.Module) -> None:
    """Kaiming fan-in convs, truncated-normal projections, unit norms."""
    module.apply(_init_module)
    # attention / token-MLP projections use the transformer convention
    for sub in module.modules():
        if isinstance(sub, (Attention, ConvMLP)):
            for m in sub.modules():
                if isinstance(m, nn.Conv2d):
                    nn.init.trunc_normal_(m.weight, std=0.02)


def build_model(variant: str, seed: int = 0) -> Network:
    """Construct a variant with deterministic seeded weights, in eval mode."""
    key = normalize_variant(variant)
    with torch.random.fork_rng():
        torch.manual_seed(seed)
        module = _BUILDERS[key]()
        init_weights(module)
    net = Network(key, module, seed=seed)
    net.eval()
    return net


def count_parameters(network: nn.Module) -> int:
    """Trainable scalars, including norm affine terms, excluding buffers."""
    return sum(p.numel() for p in network.parameters() if p.requires_grad)


def variant_parameter_count(variant: str) -> int:
    """Parameter count without allocating real weights (meta construction)."""
    key = normalize_variant(variant)
    with torch.device("meta"):
        module = _BUILDERS[key]()
    return count_parameters(module)
