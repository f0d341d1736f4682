"""Session phases, transcripts, and the identity-pairing collusion attack."""

import math

import numpy as np
import pytest

from qswitch import channels, protocol, states


def fresh_rng(seed=0):
    return np.random.default_rng(seed)


def pure_register(index_pairs):
    """Handcrafted register of pure Bell pairs with chosen indices."""
    indices = np.asarray(index_pairs, dtype=np.uint8)
    mats = np.stack([states.bell_projector((j, k)) for j, k in indices])
    n = indices.shape[0]
    return protocol.PairRegister(
        indices=indices,
        states=mats,
        alice_slots=np.arange(n),
        bob_slots=np.arange(n),
    )


class TestPairRegister:
    def test_shape_validation(self):
        good = pure_register([(0, 0), (1, 1)])
        assert good.n == 2
        with pytest.raises(ValueError):
            protocol.PairRegister(
                indices=np.zeros((0, 2)),
                states=np.zeros((0, 4, 4)),
                alice_slots=np.zeros(0),
                bob_slots=np.zeros(0),
            )
        with pytest.raises(ValueError):
            protocol.PairRegister(
                indices=np.zeros((2, 2)),
                states=np.zeros((3, 4, 4)),
                alice_slots=np.arange(2),
                bob_slots=np.arange(2),
            )

    def test_pair_accessor(self):
        reg = pure_register([(1, 0), (0, 1)])
        code, state, a_slot, b_slot = reg.pair(0)
        assert code == (1, 0)
        assert np.array_equal(state, states.bell_projector((1, 0)))
        assert (a_slot, b_slot) == (0, 0)


class TestPermutationKey:
    def test_accepts_permutation_and_inverts(self):
        key = protocol.PermutationKey((2, 0, 1))
        assert len(key) == 3
        inv = key.inverse()
        for slot, pair_id in enumerate(key.perm):
            assert inv[pair_id] == slot

    def test_rejects_non_permutations(self):
        with pytest.raises(ValueError):
            protocol.PermutationKey((0, 0, 1))
        with pytest.raises(ValueError):
            protocol.PermutationKey((1, 2, 3))


class TestCharliePrepare:
    def test_needs_two_pairs(self):
        with pytest.raises(ValueError):
            protocol.charlie_prepare(1, fresh_rng())

    def test_pure_pairs_anchor_on_drawn_index(self):
        reg = protocol.charlie_prepare(30, fresh_rng(1))
        for i in range(reg.n):
            code, state, _, _ = reg.pair(i)
            assert np.array_equal(state, states.bell_projector(code))

    def test_werner_pairs_anchor_on_drawn_index(self):
        psi = 0.8
        base = states.werner_state(psi)
        reg = protocol.charlie_prepare(12, fresh_rng(2), psi=psi)
        assert reg.psi == psi
        for i in range(reg.n):
            code, state, _, _ = reg.pair(i)
            assert np.allclose(state, states.dense_encode(base, code), atol=1e-14)

    def test_indices_are_uniform(self):
        reg = protocol.charlie_prepare(40000, fresh_rng(3))
        codes = (reg.indices[:, 0].astype(int) << 1) | reg.indices[:, 1]
        counts = np.bincount(codes, minlength=4)
        assert counts.sum() == 40000
        # 4 sigma for a fair multinomial cell is ~350
        assert np.abs(counts - 10000).max() < 400

    def test_never_prepares_a_constant_batch(self):
        for seed in range(300):
            reg = protocol.charlie_prepare(2, fresh_rng(seed))
            codes = (reg.indices[:, 0].astype(int) << 1) | reg.indices[:, 1]
            assert len(set(codes.tolist())) > 1

    def test_slots_start_in_natural_order(self):
        reg = protocol.charlie_prepare(5, fresh_rng(4))
        assert np.array_equal(reg.alice_slots, np.arange(5))
        assert np.array_equal(reg.bob_slots, np.arange(5))
        assert not reg.scrambled and not reg.encoded


class TestScramble:
    def test_reproducible_and_recorded(self):
        reg1 = protocol.charlie_prepare(8, fresh_rng(5))
        reg2 = protocol.charlie_prepare(8, fresh_rng(5))
        key1 = protocol.scramble(reg1, fresh_rng(6))
        key2 = protocol.scramble(reg2, fresh_rng(6))
        assert key1.perm == key2.perm
        assert reg1.scrambled
        assert tuple(reg1.perm) == key1.perm

    def test_bob_slots_invert_the_ordering(self):
        reg = protocol.charlie_prepare(9, fresh_rng(7))
        key = protocol.scramble(reg, fresh_rng(8))
        for slot, pair_id in enumerate(key.perm):
            assert reg.bob_slots[pair_id] == slot

    def test_states_stay_indexed_by_true_pair(self):
        reg = protocol.charlie_prepare(6, fresh_rng(9))
        before = reg.states.copy()
        protocol.scramble(reg, fresh_rng(10))
        assert np.array_equal(reg.states, before)

    def test_runs_once_and_before_encoding(self):
        reg = protocol.charlie_prepare(4, fresh_rng(11))
        protocol.scramble(reg, fresh_rng(12))
        with pytest.raises(protocol.ProtocolError):
            protocol.scramble(reg, fresh_rng(12))
        reg2 = protocol.charlie_prepare(4, fresh_rng(11))
        protocol.alice_encode(reg2, np.zeros((4, 2), dtype=int))
        with pytest.raises(protocol.ProtocolError):
            protocol.scramble(reg2, fresh_rng(12))

    def test_orderings_are_uniform(self):
        import itertools

        counts = {p: 0 for p in itertools.permutations(range(4))}
        rng = fresh_rng(13)
        reg = protocol.charlie_prepare(4, fresh_rng(14))
        for _ in range(24000):
            copy = pure_register(reg.indices)
            counts[protocol.scramble(copy, rng).perm] += 1
        assert sum(counts.values()) == 24000
        # 24 cells of mean 1000; 4.8 sigma is ~150
        assert max(abs(c - 1000) for c in counts.values()) < 150


class TestAliceEncode:
    def test_identity_message_leaves_states_alone(self):
        reg = pure_register([(0, 1), (1, 0)])
        before = reg.states.copy()
        protocol.alice_encode(reg, [[0, 0], [0, 0]])
        assert np.array_equal(reg.states, before)
        assert reg.encoded

    def test_messages_shift_bell_indices_by_xor(self):
        reg = pure_register([(0, 0), (0, 1), (1, 1)])
        protocol.alice_encode(reg, [[1, 0], [1, 1], [0, 1]])
        want = [(1, 0), (1, 0), (1, 0)]
        for i, code in enumerate(want):
            assert np.allclose(
                reg.states[i], states.bell_projector(code), atol=1e-14
            )

    def test_channel_application_and_digest(self):
        params = channels.sgad_params_from_bath(channels.BathConfig(0.0, 0.1, 0.5))
        ks = channels.sgad_kraus(params)
        reg = pure_register([(0, 0), (1, 1)])
        clean = reg.states.copy()
        events = protocol.alice_encode(reg, [[0, 0], [0, 0]], channel=ks)
        assert reg.channel_digest == channels.kraus_digest(ks)
        for i in range(2):
            want = channels.apply_channel(clean[i], ks, target="first")
            assert np.abs(reg.states[i] - want).max() < 1e-12
        tags = [e.split("\t")[0] for e in events]
        assert tags == ["ENCODE", "CHANNEL", "ENCODE", "CHANNEL"]
        assert f"params={reg.channel_digest}" in events[1]

    def test_event_format_without_channel(self):
        reg = pure_register([(0, 0), (0, 0), (1, 0)])
        events = protocol.alice_encode(reg, [[1, 1], [0, 1], [1, 0]])
        assert events[0] == "ENCODE\tslot=0\ta=1\tb=1"
        assert events[2] == "ENCODE\tslot=2\ta=1\tb=0"

    def test_rejects_reencoding_and_bad_messages(self):
        reg = pure_register([(0, 0), (0, 1)])
        protocol.alice_encode(reg, [[0, 0], [1, 1]])
        with pytest.raises(protocol.ProtocolError):
            protocol.alice_encode(reg, [[0, 0], [1, 1]])
        reg2 = pure_register([(0, 0), (0, 1)])
        with pytest.raises(ValueError):
            protocol.alice_encode(reg2, [[0, 0]])
        with pytest.raises(ValueError):
            protocol.alice_encode(reg2, [[0, 2], [1, 1]])


class TestCharlieReveal:
    def test_refuses_before_encoding(self):
        reg = pure_register([(0, 0), (1, 1)])
        with pytest.raises(protocol.ProtocolError):
            protocol.charlie_reveal(reg)

    def test_releases_a_copy_of_the_indices(self):
        reg = pure_register([(1, 0), (0, 1)])
        protocol.alice_encode(reg, [[0, 0], [0, 0]])
        reveal = protocol.charlie_reveal(reg)
        assert reveal.perm is None
        assert np.array_equal(reveal.indices, reg.indices)
        reveal.indices[0, 0] ^= 1
        assert reg.indices[0, 0] == 1

    def test_perm_release_requires_scrambling(self):
        reg = pure_register([(0, 0), (1, 1)])
        protocol.alice_encode(reg, [[0, 0], [0, 0]])
        with pytest.raises(ValueError):
            protocol.charlie_reveal(reg, include_perm=True)

    def test_perm_release_matches_key(self):
        reg = pure_register([(0, 0), (1, 1), (0, 1)])
        key = protocol.scramble(reg, fresh_rng(15))
        protocol.alice_encode(reg, np.zeros((3, 2), dtype=int))
        reveal = protocol.charlie_reveal(reg, include_perm=True)
        assert reveal.perm == key.perm


class TestBobDecode:
    def test_pure_session_decodes_exactly(self):
        rng = fresh_rng(16)
        reg = protocol.charlie_prepare(50, rng)
        messages = fresh_rng(17).integers(0, 2, size=(50, 2))
        protocol.alice_encode(reg, messages)
        reveal = protocol.charlie_reveal(reg)
        result = protocol.bob_decode(reg, reveal, fresh_rng(18))
        assert result.accuracy == 1.0
        assert np.array_equal(result.codes, messages)

    def test_refuses_before_encoding(self):
        reg = pure_register([(0, 0), (1, 1)])
        with pytest.raises(protocol.ProtocolError):
            protocol.bob_decode(
                reg, protocol.Reveal(indices=reg.indices.copy()), fresh_rng(19)
            )

    def test_scrambled_session_needs_the_ordering(self):
        reg = pure_register([(0, 0), (1, 1), (1, 0)])
        protocol.scramble(reg, fresh_rng(20))
        protocol.alice_encode(reg, np.zeros((3, 2), dtype=int))
        locked = protocol.charlie_reveal(reg, include_perm=False)
        with pytest.raises(protocol.ProtocolError):
            protocol.bob_decode(reg, locked, fresh_rng(21))
        unlocked = protocol.charlie_reveal(reg, include_perm=True)
        result = protocol.bob_decode(reg, unlocked, fresh_rng(21))
        assert result.accuracy == 1.0

    def test_werner_pairs_decode_at_major_weight_rate(self):
        psi = math.pi / 6
        w_major, _ = states.werner_weights(psi)
        reg = protocol.charlie_prepare(4000, fresh_rng(22), psi=psi)
        messages = fresh_rng(23).integers(0, 2, size=(4000, 2))
        protocol.alice_encode(reg, messages)
        result = protocol.bob_decode(
            reg, protocol.charlie_reveal(reg), fresh_rng(24)
        )
        assert abs(result.accuracy - w_major) < 0.04

    def test_event_format(self):
        reg = pure_register([(0, 1), (1, 1)])
        protocol.alice_encode(reg, [[0, 0], [0, 0]])
        result = protocol.bob_decode(
            reg, protocol.charlie_reveal(reg), fresh_rng(25)
        )
        assert result.events[0] == "MEASURE\tslot=0\tj=0\tk=1"
        assert result.events[1] == "DECODE\tslot=0\ta=0\tb=0"
        assert len(result.events) == 4


class TestCollusion:
    def test_requires_scrambled_encoded_register(self):
        reg = pure_register([(0, 0), (1, 1)])
        with pytest.raises(protocol.ProtocolError):
            protocol.collusion_attack(reg, fresh_rng(26))
        protocol.alice_encode(reg, np.zeros((2, 2), dtype=int))
        with pytest.raises(protocol.ProtocolError):
            protocol.collusion_attack(reg, fresh_rng(26))

    def test_single_pair_is_trivially_unscrambled(self):
        reg = pure_register([(1, 0)])
        protocol.scramble(reg, fresh_rng(27))
        protocol.alice_encode(reg, [[1, 1]])
        assert protocol.collusion_attack(reg, fresh_rng(28)) == 1.0

    def test_mean_accuracy_matches_closed_form(self):
        n = 6
        want = protocol.collusion_expected_accuracy(n)
        rng = fresh_rng(29)
        total = 0.0
        runs = 1500
        for _ in range(runs):
            reg = protocol.charlie_prepare(n, rng)
            protocol.scramble(reg, rng)
            protocol.alice_encode(reg, rng.integers(0, 2, size=(n, 2)))
            total += protocol.collusion_attack(reg, rng)
        assert abs(total / runs - want) < 0.02

    def test_expected_accuracy_formula(self):
        assert protocol.collusion_expected_accuracy(1) == 1.0
        assert protocol.collusion_expected_accuracy(3) == 0.5
        assert protocol.collusion_expected_accuracy(10**9) == pytest.approx(0.25)
        with pytest.raises(ValueError):
            protocol.collusion_expected_accuracy(0)

    def test_monte_carlo_matches_closed_form(self):
        for n in (5, 20):
            got = protocol.collusion_mc(n, 50000, fresh_rng(30))
            assert abs(got - protocol.collusion_expected_accuracy(n)) < 0.01

    def test_monte_carlo_agrees_with_register_route(self):
        n = 5
        rng = fresh_rng(31)
        total = 0.0
        runs = 1200
        for _ in range(runs):
            reg = protocol.charlie_prepare(n, rng)
            protocol.scramble(reg, rng)
            protocol.alice_encode(reg, rng.integers(0, 2, size=(n, 2)))
            total += protocol.collusion_attack(reg, rng)
        mc = protocol.collusion_mc(n, 200000, fresh_rng(32))
        assert abs(total / runs - mc) < 0.03

    def test_monte_carlo_input_validation(self):
        with pytest.raises(ValueError):
            protocol.collusion_mc(0, 10, fresh_rng(33))
        with pytest.raises(ValueError):
            protocol.collusion_mc(5, 0, fresh_rng(33))


class TestRunSession:
    def test_ideal_session_is_perfect(self):
        result = protocol.run_session(protocol.SessionConfig(n=200, seed=40))
        assert result.accuracy == 1.0
        assert np.array_equal(result.decoded, result.messages)
        assert result.permutation is None

    def test_transcripts_are_byte_identical(self):
        cfg = protocol.SessionConfig(n=25, scrambled=True, seed=41)
        t1 = protocol.run_session(cfg).transcript.text()
        t2 = protocol.run_session(cfg).transcript.text()
        assert t1 == t2

    def test_scrambled_reveal_decodes_like_ideal(self):
        """Scramble + released ordering must not change the decoded bits:
        preparation and messages come from the same child streams."""
        ideal = protocol.run_session(protocol.SessionConfig(n=120, seed=42))
        scrambled = protocol.run_session(
            protocol.SessionConfig(n=120, scrambled=True, seed=42)
        )
        assert scrambled.accuracy == 1.0
        assert np.array_equal(ideal.decoded, scrambled.decoded)
        assert scrambled.permutation is not None

    def test_transcript_structure(self):
        cfg = protocol.SessionConfig(n=7, scrambled=True, seed=43)
        result = protocol.run_session(cfg)
        lines = result.transcript.text().splitlines()
        assert lines[0] == f"{protocol.TRANSCRIPT_SCHEMA}\tseed=43"
        assert lines[1] == "PREPARE\tn=7\tindices=hidden"
        assert lines[2] == "SCRAMBLE\tapplied=1"
        tags = [line.split("\t")[0] for line in lines[1:]]
        order = {"PREPARE": 0, "SCRAMBLE": 1, "ENCODE": 2, "CHANNEL": 2,
                 "REVEAL": 3, "MEASURE": 4, "DECODE": 4}
        phases = [order[t] for t in tags]
        assert phases == sorted(phases)
        assert tags.count("ENCODE") == 7
        assert tags.count("MEASURE") == 7
        assert tags.count("DECODE") == 7
        reveal = next(line for line in lines if line.startswith("REVEAL"))
        fields = dict(part.split("=", 1) for part in reveal.split("\t")[1:])
        assert len(fields["indices"].split(",")) == 7
        assert all(len(tok) == 2 for tok in fields["indices"].split(","))
        assert sorted(int(x) for x in fields["perm"].split(",")) == list(range(7))

    def test_unscrambled_transcript_says_perm_none(self):
        result = protocol.run_session(protocol.SessionConfig(n=3, seed=44))
        reveal = next(
            line
            for line in result.transcript.text().splitlines()
            if line.startswith("REVEAL")
        )
        assert reveal.endswith("perm=none")

    def test_withholding_the_ordering_blocks_decode(self):
        cfg = protocol.SessionConfig(
            n=10, scrambled=True, reveal_perm=False, seed=45
        )
        with pytest.raises(protocol.ProtocolError):
            protocol.run_session(cfg)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            protocol.run_session(protocol.SessionConfig(n=5, attack="siphon"))
        with pytest.raises(ValueError):
            protocol.run_session(protocol.SessionConfig(n=5, attack="collusion"))
        with pytest.raises(ValueError):
            protocol.run_session(protocol.SessionConfig(n=5, reveal_perm=True))
        with pytest.raises(ValueError):
            protocol.run_session(
                protocol.SessionConfig(
                    n=5, scrambled=True, reveal_perm=True, attack="collusion"
                )
            )

    def test_attack_session(self):
        cfg = protocol.SessionConfig(
            n=40, scrambled=True, attack="collusion", seed=46
        )
        result = protocol.run_session(cfg)
        assert 0.0 <= result.accuracy <= 1.0
        reveal = next(
            line
            for line in result.transcript.text().splitlines()
            if line.startswith("REVEAL")
        )
        assert reveal.endswith("perm=none")

    def test_explicit_messages_are_used(self):
        messages = np.array([[1, 0], [0, 1], [1, 1]], dtype=np.uint8)
        result = protocol.run_session(
            protocol.SessionConfig(n=3, messages=messages, seed=47)
        )
        assert np.array_equal(result.messages, messages)
        assert np.array_equal(result.decoded, messages)
        encode_lines = [
            line
            for line in result.transcript.text().splitlines()
            if line.startswith("ENCODE")
        ]
        assert encode_lines[0] == "ENCODE\tslot=0\ta=1\tb=0"

    def test_noisy_session_with_channel_events(self):
        ks = channels.sgad_kraus(
            channels.sgad_params_from_bath(channels.BathConfig(0.0, 0.1, 0.5))
        )
        cfg = protocol.SessionConfig(
            n=300, psi=math.pi / 2, channel=ks, seed=48
        )
        result = protocol.run_session(cfg)
        lines = result.transcript.text().splitlines()
        chan = [line for line in lines if line.startswith("CHANNEL")]
        assert len(chan) == 300
        digest = chan[0].split("params=")[1]
        assert len(digest) == 12
        assert all(c in "0123456789abcdef" for c in digest)
        assert 0.0 < result.accuracy < 1.0

    def test_reserved_tags_never_emitted(self):
        cfg = protocol.SessionConfig(n=12, scrambled=True, seed=49)
        text = protocol.run_session(cfg).transcript.text()
        assert "DECOY" not in text
