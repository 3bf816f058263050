"""Model zoo tour: build every variant, count parameters, time a forward.

Run: python3 demos/03_model_zoo_tour.py
"""

import time

import torch

from woundseg.models import VARIANTS, build_model, count_parameters
from woundseg.weights import save_weights, load_weights


def main():
    print(f"{'variant':14s} {'params':>12s} {'fwd 224x224':>12s}")
    for variant in VARIANTS:
        net = build_model(variant, seed=0)
        x = torch.rand(1, 3, 224, 224)
        with torch.inference_mode():
            net(x)  # warm up
            start = time.perf_counter()
            out = net(x)
            ms = (time.perf_counter() - start) * 1000
        assert out.shape == (1, 1, 224, 224)
        print(f"{variant:14s} {count_parameters(net):>12,} {ms:>10.1f}ms")

    # weight archives round-trip bit-exactly and carry their provenance
    net = build_model("unext_s", seed=3)
    path = save_weights(net, "/tmp/unext_s_demo.wsa",
                        provenance={"note": "zoo tour"})
    twin = build_model("unext_s", seed=99)
    meta = load_weights(twin, path)
    same = all(torch.equal(a, b) for (_, a), (_, b)
               in zip(net.state_dict().items(), twin.state_dict().items()))
    print(f"\narchive round trip bit-exact: {same}; meta: {meta}")


if __name__ == "__main__":
    main()
