"""Compact medical segmentation net: conv stages + tokenized-MLP stages.

Five-level encoder where the last two levels flatten features into tokens
and mix them with shifted MLPs (channel groups rolled along width, then
height) around a depthwise conv. The decoder mirrors the encoder with
bilinear upsampling and additive skips.
"""

import torch
import torch.nn as nn
import torch.nn.functional as F


class DepthwiseConv(nn.Module):
    def __init__(self, dim):
        super().__init__()
        self.conv = nn.Conv2d(dim, dim, 3, padding=1, groups=dim, bias=True)

    def forward(self, x, h, w):
        b, n, c = x.shape
        x = x.transpose(1, 2).view(b, c, h, w)
        x = self.conv(x)
        return x.flatten(2).transpose(1, 2)


def _shift_groups(x, axis, shift_size=5):
    """Roll channel groups by -2..2 along a spatial axis (zero padded)."""
    pad = shift_size // 2
    x = F.pad(x, (pad, pad, pad, pad), "constant", 0)
    groups = torch.chunk(x, shift_size, dim=1)
    rolled = [
        torch.roll(g, s, dims=axis) for g, s in zip(groups, range(-pad, pad + 1))
    ]
    x = torch.cat(rolled, dim=1)
    h, w = x.shape[2] - 2 * pad, x.shape[3] - 2 * pad
    return x[:, :, pad : pad + h, pad : pad + w]


class ShiftedMLP(nn.Module):
    def __init__(self, dim, hidden=None):
        super().__init__()
        hidden = hidden or dim
        self.fc1 = nn.Linear(dim, hidden)
        self.dwconv = DepthwiseConv(hidden)
        self.act = nn.GELU()
        self.fc2 = nn.Linear(hidden, dim)

    def forward(self, x, h, w):
        b, n, c = x.shape
        spatial = x.transpose(1, 2).view(b, c, h, w)
        shifted = _shift_groups(spatial, axis=3)
        x = shifted.flatten(2).transpose(1, 2)
        x = self.act(self.dwconv(self.fc1(x), h, w))
        c_hidden = x.shape[2]
        spatial = x.transpose(1, 2).view(b, c_hidden, h, w)
        shifted = _shift_groups(spatial, axis=2)
        x = shifted.flatten(2).transpose(1, 2)
        return self.fc2(x)


class TokenizedMLPBlock(nn.Module):
    """Residual block mixing tokens with a shifted MLP (no attention)."""

    def __init__(self, dim):
        super().__init__()
        self.norm = nn.LayerNorm(dim)
        self.mlp = ShiftedMLP(dim)

    def forward(self, x, h, w):
        return x + self.mlp(self.norm(x), h, w)


class OverlapPatchEmbed(nn.Module):
    def __init__(self, in_ch, embed_dim):
        super().__init__()
        self.proj = nn.Conv2d(in_ch, embed_dim, 3, stride=2, padding=1)
        self.norm = nn.LayerNorm(embed_dim)

    def forward(self, x):
        x = self.proj(x)
        _, _, h, w = x.shape
        x = x.flatten(2).transpose(1, 2)
        return self.norm(x), h, w


def _tokens_to_map(x, h, w):
    b, n, c = x.shape
    return x.transpose(1, 2).reshape(b, c, h, w)


class UNeXt(nn.Module):
    """channels = (c1..c5); base plan (16, 32, 128, 160, 256), small
    plan (8, 16, 32, 64, 128)."""

    def __init__(self, in_channels=3, out_channels=1,
                 channels=(16, 32, 128, 160, 256)):
        super().__init__()
        c1, c2, c3, c4, c5 = channels
        self.encoder1 = nn.Conv2d(in_channels, c1, 3, padding=1)
        self.ebn1 = nn.BatchNorm2d(c1)
        self.encoder2 = nn.Conv2d(c1, c2, 3, padding=1)
        self.ebn2 = nn.BatchNorm2d(c2)
        self.encoder3 = nn.Conv2d(c2, c3, 3, padding=1)
        self.ebn3 = nn.BatchNorm2d(c3)

        self.patch_embed4 = OverlapPatchEmbed(c3, c4)
        self.block4 = TokenizedMLPBlock(c4)
        self.norm4 = nn.LayerNorm(c4)
        self.patch_embed5 = OverlapPatchEmbed(c4, c5)
        self.block5 = TokenizedMLPBlock(c5)
        self.norm5 = nn.LayerNorm(c5)

        self.decoder1 = nn.Conv2d(c5, c4, 3, padding=1)
        self.dbn1 = nn.BatchNorm2d(c4)
        self.dblock1 = TokenizedMLPBlock(c4)
        self.dnorm1 = nn.LayerNorm(c4)
        self.decoder2 = nn.Conv2d(c4, c3, 3, padding=1)
        self.dbn2 = nn.BatchNorm2d(c3)
        self.dblock2 = TokenizedMLPBlock(c3)
        self.dnorm2 = nn.LayerNorm(c3)
        self.decoder3 = nn.Conv2d(c3, c2, 3, padding=1)
        self.dbn3 = nn.BatchNorm2d(c2)
        self.decoder4 = nn.Conv2d(c2, c1, 3, padding=1)
        self.dbn4 = nn.BatchNorm2d(c1)
        self.decoder5 = nn.Conv2d(c1, c1, 3, padding=1)
        self.dbn5 = nn.BatchNorm2d(c1)
        self.head = nn.Conv2d(c1, out_channels, 1)

    def forward(self, x):
        t1 = F.relu(F.max_pool2d(self.ebn1(self.encoder1(x)), 2))
        t2 = F.relu(F.max_pool2d(self.ebn2(self.encoder2(t1)), 2))
        t3 = F.relu(F.max_pool2d(self.ebn3(self.encoder3(t2)), 2))

        tok, h, w = self.patch_embed4(t3)
        tok = self.norm4(self.block4(tok, h, w))
        t4 = _tokens_to_map(tok, h, w)

        tok, h, w = self.patch_embed5(t4)
        tok = self.norm5(self.block5(tok, h, w))
        bottom = _tokens_to_map(tok, h, w)

        out = F.relu(F.interpolate(self.dbn1(self.decoder1(bottom)),
                                   scale_factor=2, mode="bilinear"))
        out = out + t4
        _, _, h, w = out.shape
        tok = out.flatten(2).transpose(1, 2)
        tok = self.dnorm1(self.dblock1(tok, h, w))
        out = _tokens_to_map(tok, h, w)

        out = F.relu(F.interpolate(self.dbn2(self.decoder2(out)),
                                   scale_factor=2, mode="bilinear"))
        out = out + t3
        _, _, h, w = out.shape
        tok = out.flatten(2).transpose(1, 2)
        tok = self.dnorm2(self.dblock2(tok, h, w))
        out = _tokens_to_map(tok, h, w)

        out = F.relu(F.interpolate(self.dbn3(self.decoder3(out)),
                                   scale_factor=2, mode="bilinear"))
        out = out + t2
        out = F.relu(F.interpolate(self.dbn4(self.decoder4(out)),
                                   scale_factor=2, mode="bilinear"))
        out = out + t1
        out = F.relu(F.interpolate(self.dbn5(self.decoder5(out)),
                                   scale_factor=2, mode="bilinear"))
        return self.head(out)
