"""Token-pyramid transformer for efficient segmentation.

A MobileNet-style inverted-residual pyramid emits features at strides
{4, 8, 16, 32}; every scale is average-pooled to stride 64 and the pooled
tokens are concatenated channel-wise. A small stack of transformer blocks
(conv-BN attention + depthwise MLP) refines the concatenated tokens, which
are split back per scale and injected into the local features through a
sigmoid gate. Injected scales are summed at stride 8 and a 1x1 head
produces logits, bilinearly upsampled to the input size.
"""

import torch
import torch.nn as nn
import torch.nn.functional as F


class ConvBN(nn.Sequential):
    def __init__(self, in_ch, out_ch, kernel=1, stride=1, pad=0, groups=1):
        super().__init__(
            nn.Conv2d(in_ch, out_ch, kernel, stride, pad, groups=groups, bias=False),
            nn.BatchNorm2d(out_ch),
        )


class InvertedResidual(nn.Module):
    def __init__(self, in_ch, out_ch, kernel, stride, expand):
        super().__init__()
        hidden = round(in_ch * expand)
        self.use_residual = stride == 1 and in_ch == out_ch
        layers = []
        if expand != 1:
            layers += [ConvBN(in_ch, hidden), nn.ReLU6(inplace=True)]
        layers += [
            ConvBN(hidden, hidden, kernel, stride, kernel // 2, groups=hidden),
            nn.ReLU6(inplace=True),
            ConvBN(hidden, out_ch),
        ]
        self.block = nn.Sequential(*layers)

    def forward(self, x):
        out = self.block(x)
        return x + out if self.use_residual else out


class TokenPyramid(nn.Module):
    """Stem + inverted residual trunk with taps at strides 4/8/16/32."""

    def __init__(self, cfgs, tap_indices, stem_ch=16, in_channels=3):
        super().__init__()
        self.stem = nn.Sequential(
            ConvBN(in_channels, stem_ch, 3, 2, 1), nn.ReLU6(inplace=True)
        )
        self.blocks = nn.ModuleList()
        self.tap_indices = list(tap_indices)
        ch = stem_ch
        for kernel, expand, out_ch, stride in cfgs:
            self.blocks.append(InvertedResidual(ch, out_ch, kernel, stride, expand))
            ch = out_ch

    def forward(self, x):
        x = self.stem(x)
        taps = []
        for i, block in enumerate(self.blocks):
            x = block(x)
            if i in self.tap_indices:
                taps.append(x)
        return taps


class Attention(nn.Module):
    """Multi-head attention over a BxCxHxW token map using 1x1 conv+BN."""

    def __init__(self, dim, num_heads, key_dim=16, attn_ratio=2):
        super().__init__()
        self.num_heads = num_heads
        self.key_dim = key_dim
        self.val_dim = attn_ratio * key_dim
        self.scale = key_dim ** -0.5
        nh_kd = num_heads * key_dim
        dh = num_heads * self.val_dim
        self.to_q = ConvBN(dim, nh_kd)
        self.to_k = ConvBN(dim, nh_kd)
        self.to_v = ConvBN(dim, dh)
        self.proj = nn.Sequential(nn.ReLU6(inplace=True), ConvBN(dh, dim))

    def forward(self, x):
        b, _, h, w = x.shape
        n = h * w
        q = self.to_q(x).reshape(b, self.num_heads, self.key_dim, n).permute(0, 1, 3, 2)
        k = self.to_k(x).reshape(b, self.num_heads, self.key_dim, n)
        v = self.to_v(x).reshape(b, self.num_heads, self.val_dim, n).permute(0, 1, 3, 2)
        attn = torch.matmul(q, k) * self.scale
        attn = attn.softmax(dim=-1)
        out = torch.matmul(attn, v)
        out = out.permute(0, 1, 3, 2).reshape(b, self.num_heads * self.val_dim, h, w)
        return self.proj(out)


class ConvMLP(nn.Module):
    def __init__(self, dim, ratio=2):
        super().__init__()
        hidden = dim * ratio
        self.fc1 = ConvBN(dim, hidden)
        self.dw = ConvBN(hidden, hidden, 3, 1, 1, groups=hidden)
        self.act = nn.ReLU6(inplace=True)
        self.fc2 = ConvBN(hidden, dim)

    def forward(self, x):
        return self.fc2(self.act(self.dw(self.fc1(x))))


class SemanticsBlock(nn.Module):
    def __init__(self, dim, num_heads, key_dim=16, attn_ratio=2, mlp_ratio=2):
        super().__init__()
        self.attn = Attention(dim, num_heads, key_dim, attn_ratio)
        self.mlp = ConvMLP(dim, mlp_ratio)

    def forward(self, x):
        x = x + self.attn(x)
        return x + self.mlp(x)


class SemanticInjection(nn.Module):
    """Fuse global tokens into a local scale through a sigmoid gate."""

    def __init__(self, local_ch, out_ch):
        super().__init__()
        self.local_embedding = ConvBN(local_ch, out_ch)
        self.global_embedding = ConvBN(local_ch, out_ch)
        self.global_gate = ConvBN(local_ch, out_ch)

    def forward(self, local_feat, global_tokens):
        size = local_feat.shape[2:]
        gate = torch.sigmoid(self.global_gate(global_tokens))
        gate = F.interpolate(gate, size=size, mode="bilinear", align_corners=False)
        glob = F.interpolate(
            self.global_embedding(global_tokens), size=size,
            mode="bilinear", align_corners=False,
        )
        return self.local_embedding(local_feat) * gate + glob


CONFIGS = {
    # kernel, expansion, out_channels, stride
    "tiny": dict(
        cfgs=[
            [3, 1, 16, 1],
            [3, 4, 16, 2],
            [3, 3, 16, 1],
            [5, 3, 32, 2],
            [5, 3, 32, 1],
            [3, 3, 64, 2],
            [3, 3, 64, 1],
            [5, 6, 96, 2],
            [5, 6, 96, 1],
        ],
        tap_indices=[2, 4, 6, 8],
        scale_channels=[16, 32, 64, 96],
        inject_dim=128,
        num_heads=4,
    ),
    "small": dict(
        cfgs=[
            [3, 1, 16, 1],
            [3, 4, 24, 2],
            [3, 3, 24, 1],
            [5, 3, 48, 2],
            [5, 3, 48, 1],
            [3, 3, 96, 2],
            [3, 3, 96, 1],
            [5, 6, 128, 2],
            [5, 6, 128, 1],
            [3, 6, 128, 1],
        ],
        tap_indices=[2, 4, 6, 9],
        scale_channels=[24, 48, 96, 128],
        inject_dim=192,
        num_heads=6,
    ),
    "base": dict(
        cfgs=[
            [3, 1, 16, 1],
            [3, 4, 32, 2],
            [3, 3, 32, 1],
            [5, 3, 64, 2],
            [5, 3, 64, 1],
            [3, 3, 128, 2],
            [3, 3, 128, 1],
            [5, 6, 160, 2],
            [5, 6, 160, 1],
            [3, 6, 160, 1],
        ],
        tap_indices=[2, 4, 6, 9],
        scale_channels=[32, 64, 128, 160],
        inject_dim=256,
        num_heads=8,
    ),
}


class TopFormer(nn.Module):
    def __init__(self, size="base", in_channels=3, out_channels=1, depth=4):
        super().__init__()
        cfg = CONFIGS[size]
        self.scale_channels = cfg["scale_channels"]
        dim = sum(self.scale_channels)
        inject = cfg["inject_dim"]

        self.pyramid = TokenPyramid(cfg["cfgs"], cfg["tap_indices"],
                                    in_channels=in_channels)
        self.semantics = nn.Sequential(
            *[SemanticsBlock(dim, cfg["num_heads"]) for _ in range(depth)]
        )
        # global tokens are injected into the stride 8/16/32 scales only
        self.injections = nn.ModuleList(
            [SemanticInjection(c, inject) for c in self.scale_channels[1:]]
        )
        self.fuse = nn.Sequential(ConvBN(inject, inject), nn.ReLU6(inplace=True))
        self.head = nn.Conv2d(inject, out_channels, 1)

    def forward(self, x):
        size = x.shape[2:]
        taps = self.pyramid(x)

        deep_h = (taps[-1].shape[2] - 1) // 2 + 1
        deep_w = (taps[-1].shape[3] - 1) // 2 + 1
        tokens = torch.cat(
            [F.adaptive_avg_pool2d(t, (deep_h, deep_w)) for t in taps], dim=1
        )
        tokens = self.semantics(tokens)
        token_splits = torch.split(tokens, self.scale_channels, dim=1)

        injected = [
            inj(local, glob)
            for inj, local, glob in zip(self.injections, taps[1:], token_splits[1:])
        ]
        target = injected[0].shape[2:]
        fused = injected[0]
        for feat in injected[1:]:
            fused = fused + F.interpolate(feat, size=target, mode="bilinear",
                                          align_corners=False)
        logits = self.head(self.fuse(fused))
        return F.interpolate(logits, size=size, mode="bilinear", align_corners=False)
