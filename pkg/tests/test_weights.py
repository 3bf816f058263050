import copy

import pytest
import torch

from woundseg.errors import WeightArchiveError
from woundseg.models import build_model
from woundseg.weights import load_weights, read_archive_meta, save_weights


class TestWeightArchive:
    def test_round_trip_bit_exact(self, tmp_path):
        net = build_model("unext_b", seed=11)
        path = save_weights(net, tmp_path / "unext_b.wsa",
                            provenance={"note": "round trip"})
        other = build_model("unext_b", seed=99)
        meta = load_weights(other, path)
        assert meta["variant"] == "unext_b"
        assert meta["seed"] == 11
        assert meta["provenance"] == {"note": "round trip"}
        for (name, ta), (_, tb) in zip(net.state_dict().items(),
                                       other.state_dict().items()):
            assert torch.equal(ta, tb), name

    def test_wrong_variant_rejected_with_first_mismatch(self, tmp_path):
        enet = build_model("enet", seed=0)
        path = save_weights(enet, tmp_path / "enet.wsa")
        unet = build_model("unet", seed=0)
        before = copy.deepcopy(unet.state_dict())
        with pytest.raises(WeightArchiveError) as err:
            load_weights(unet, path)
        # the error names a concrete tensor and the offending variant
        assert "net." in str(err.value)
        assert "enet" in str(err.value)
        after = unet.state_dict()
        for name in before:
            assert torch.equal(before[name], after[name]), name

    def test_truncated_archive_rejected_without_mutation(self, tmp_path):
        net = build_model("unext_s", seed=1)
        path = save_weights(net, tmp_path / "a.wsa")
        data = path.read_bytes()
        path.write_bytes(data[: len(data) - 128])
        target = build_model("unext_s", seed=2)
        before = copy.deepcopy(target.state_dict())
        with pytest.raises(WeightArchiveError, match="truncated"):
            load_weights(target, path)
        for name, tensor in target.state_dict().items():
            assert torch.equal(before[name], tensor), name

    def test_not_an_archive(self, tmp_path):
        bad = tmp_path / "junk.wsa"
        bad.write_bytes(b"garbage")
        with pytest.raises(WeightArchiveError, match="magic"):
            read_archive_meta(bad)

    def test_meta_readable_without_network(self, tmp_path):
        net = build_model("topformer_t", seed=7)
        path = save_weights(net, tmp_path / "t.wsa", provenance={"epoch": 3})
        meta = read_archive_meta(path)
        assert meta == {"variant": "topformer_t", "seed": 7,
                        "provenance": {"epoch": 3}}

    def test_buffers_round_trip(self, tmp_path):
        # running statistics must survive so eval results are reproducible
        net = build_model("enet", seed=0)
        net.train()
        net(torch.rand(2, 3, 64, 64))
        path = save_weights(net, tmp_path / "e.wsa")
        other = build_model("enet", seed=5)
        load_weights(other, path)
        for (name, ta), (_, tb) in zip(net.state_dict().items(),
                                       other.state_dict().items()):
            assert torch.equal(ta, tb), name
