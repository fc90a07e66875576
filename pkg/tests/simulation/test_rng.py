"""Tests for keyed random streams."""

import pytest

from networked_learning.simulation.rng import StreamFactory


class TestStreamFactory:
    """Test stream determinism and independence."""

    def test_same_key_same_numbers(self):
        a = StreamFactory(42).stream("vertex", 0, 3).random(8)
        b = StreamFactory(42).stream("vertex", 0, 3).random(8)
        assert a.tobytes() == b.tobytes()

    def test_keys_and_seeds_separate_streams(self):
        base = StreamFactory(42).stream("vertex", 0, 3).random(4)
        assert base.tobytes() != StreamFactory(42).stream("vertex", 0, 4).random(4).tobytes()
        assert base.tobytes() != StreamFactory(42).stream("label", 0, 3).random(4).tobytes()
        assert base.tobytes() != StreamFactory(43).stream("vertex", 0, 3).random(4).tobytes()

    def test_creation_order_does_not_matter(self):
        factory = StreamFactory(7)
        first = factory.stream("block", 1).random(3)
        factory.stream("block", 0).random(100)
        again = factory.stream("block", 1).random(3)
        assert first.tobytes() == again.tobytes()

    def test_child_seed(self):
        seed = StreamFactory(5).child_seed("test")
        assert seed == StreamFactory(5).child_seed("test")
        assert 0 <= seed < 2 ** 64
        assert seed != StreamFactory(6).child_seed("test")

    def test_full_range_seed(self):
        StreamFactory(2 ** 64 - 1).stream("x").random()

    @pytest.mark.parametrize("seed", [-1, 2 ** 64])
    def test_seed_out_of_range(self, seed):
        with pytest.raises(ValueError, match="64 bits"):
            StreamFactory(seed)

    def test_negative_key_component(self):
        with pytest.raises(ValueError, match="non-negative"):
            StreamFactory(1).stream("vertex", -1)
