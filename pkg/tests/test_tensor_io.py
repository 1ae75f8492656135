import numpy as np
import pytest

from ttnets import tensor_io
from ttnets.decompositions import cp_random, ht_random, tt_random
from ttnets.networks import make_score_network


class TestDenseFiles:
    def test_roundtrip_exact(self, tmp_path):
        x = np.random.default_rng(1).normal(size=(2, 3, 4))
        path = tmp_path / "x.txt"
        tensor_io.save_dense(path, x)
        np.testing.assert_array_equal(tensor_io.load_dense(path), x)

    def test_header(self, tmp_path):
        path = tmp_path / "x.txt"
        tensor_io.save_dense(path, np.zeros((2, 5)))
        assert path.read_text().splitlines()[0] == "shape: 2 5"

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("shope: 2 2\n1\n2\n3\n4\n")
        with pytest.raises(ValueError, match="shape"):
            tensor_io.load_dense(path)

    def test_truncated_values(self, tmp_path):
        path = tmp_path / "short.txt"
        path.write_text("shape: 2 2\n1.0\n2.0\n")
        with pytest.raises(ValueError, match="end of file"):
            tensor_io.load_dense(path)

    def test_non_numeric_value(self, tmp_path):
        path = tmp_path / "junk.txt"
        path.write_text("shape: 2\n1.0\nbanana\n")
        with pytest.raises(ValueError, match="number"):
            tensor_io.load_dense(path)

    def test_trailing_garbage(self, tmp_path):
        path = tmp_path / "extra.txt"
        path.write_text("shape: 2\n1.0\n2.0\n3.0\n")
        with pytest.raises(ValueError, match="trailing"):
            tensor_io.load_dense(path)


class TestFactorFiles:
    def test_tt_roundtrip(self, tmp_path):
        tt = tt_random((2, 3, 2), (2, 4), seed=0)
        path = tmp_path / "tt.txt"
        tensor_io.save_tt(path, tt)
        back = tensor_io.load_tt(path)
        for a, b in zip(tt.cores, back.cores):
            np.testing.assert_array_equal(a, b)

    def test_cp_roundtrip(self, tmp_path):
        cp = cp_random((4, 2, 3), 3, seed=1)
        path = tmp_path / "cp.txt"
        tensor_io.save_cp(path, cp)
        back = tensor_io.load_cp(path)
        for a, b in zip(cp.factors, back.factors):
            np.testing.assert_array_equal(a, b)

    def test_ht_roundtrip(self, tmp_path):
        ht = ht_random((2, 3, 2, 3), [2, 2, 2, 2, 3, 2], seed=2)
        path = tmp_path / "ht.txt"
        tensor_io.save_ht(path, ht)
        back = tensor_io.load_ht(path)
        for a, b in zip(ht.leaves, back.leaves):
            np.testing.assert_array_equal(a, b)
        for la, lb in zip(ht.transfer, back.transfer):
            for a, b in zip(la, lb):
                np.testing.assert_array_equal(a, b)

    def test_cp_rank_consistency_checked(self, tmp_path):
        path = tmp_path / "bad_cp.txt"
        path.write_text("cp: 1 2\nfactor: 2 3\n1\n2\n3\n4\n5\n6\n")
        with pytest.raises(ValueError, match="rank"):
            tensor_io.load_cp(path)


class TestCheckpoints:
    @pytest.mark.parametrize("kind", ["tt", "cp"])
    def test_roundtrip_preserves_scores(self, tmp_path, kind):
        net = make_score_network(kind, 3, 2, 4, 3, 2, seed=3, activation="sigmoid")
        path = tmp_path / "net.txt"
        tensor_io.save_checkpoint(path, net)
        back = tensor_io.load_checkpoint(path)
        x = np.random.default_rng(4).normal(size=(6, 3, 2))
        np.testing.assert_array_equal(back.scores_batch(x), net.scores_batch(x))

    def test_versioned_header(self, tmp_path):
        net = make_score_network("tt", 2, 1, 4, 2, 2, seed=0)
        path = tmp_path / "net.txt"
        tensor_io.save_checkpoint(path, net)
        assert path.read_text().splitlines()[0] == "ttnets-checkpoint v1"

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "other.txt"
        path.write_text("something else\n")
        with pytest.raises(ValueError, match="checkpoint"):
            tensor_io.load_checkpoint(path)

    def test_rejects_tree_networks(self, tmp_path):
        net = make_score_network("ht", 4, 2, 3, 2, 2, seed=1)
        with pytest.raises(ValueError, match="tt/cp"):
            tensor_io.save_checkpoint(tmp_path / "x.txt", net)
