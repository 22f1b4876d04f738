"""CRF: brute-force oracles for inference, gradient checks, training."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from foia_review import crf
from foia_review.errors import InvalidHyperParameterError, InvalidLabelError

VOCAB = ["alpha", "beta", "gamma", "delta", "option"]


def random_model(rng, tokens):
    index = crf.build_feature_index([(tokens, ["O"] * len(tokens))])
    return crf.CRFModel(
        feature_index=index,
        state_weights=rng.normal(size=(len(index), 3)),
        transition_weights=rng.normal(size=(3, 3)),
        c1=0.0,
        c2=0.0,
    )


def path_score(model, tokens, path):
    E = model.emissions(tokens)
    T = model.transition_weights
    score = E[0][path[0]]
    for t in range(1, len(tokens)):
        score += T[path[t - 1], path[t]] + E[t][path[t]]
    return score


def brute_force(model, tokens):
    scores = []
    best_path, best_score = None, -np.inf
    for path in itertools.product(range(3), repeat=len(tokens)):
        s = path_score(model, tokens, path)
        scores.append(s)
        if s > best_score:
            best_score, best_path = s, path
    return np.logaddexp.reduce(scores), best_score, best_path


class TestInferenceOracles:
    def test_partition_and_viterbi_match_enumeration(self):
        rng = np.random.default_rng(0)
        for trial in range(40):
            n = int(rng.integers(1, 9))
            tokens = [VOCAB[rng.integers(len(VOCAB))] for _ in range(n)]
            model = random_model(rng, tokens)
            logz_bf, best_bf, _ = brute_force(model, tokens)
            logz = crf.log_partition(model, tokens)
            assert abs(logz - logz_bf) <= 1e-8 * max(1.0, abs(logz_bf))
            decoded = crf.viterbi_decode(model, tokens)
            decoded_score = path_score(model, tokens,
                                       [crf.TAG_INDEX[t] for t in decoded])
            assert decoded_score == pytest.approx(best_bf, abs=1e-10)

    def test_marginals_sum_to_one(self):
        rng = np.random.default_rng(1)
        tokens = [VOCAB[rng.integers(len(VOCAB))] for _ in range(7)]
        model = random_model(rng, tokens)
        marginals = crf.sequence_marginals(model, tokens)
        np.testing.assert_allclose(marginals.sum(axis=1), 1.0, atol=1e-10)


class TestFeatures:
    def test_middle_position(self):
        feats = crf.extract_features(["a", "b", "c"], 1)
        assert set(feats) == {"bias", "w0=b", "w-1=a", "w+1=c"}

    def test_sequence_start_marker(self):
        feats = crf.extract_features(["a", "b"], 0)
        assert "w-1=<s>" in feats
        assert "w+1=b" in feats

    def test_length_one_sequence(self):
        feats = crf.extract_features(["solo"], 0)
        assert set(feats) == {"bias", "w0=solo", "w-1=<s>", "w+1=</s>"}

    def test_position_bounds(self):
        with pytest.raises(IndexError):
            crf.extract_features(["a"], 1)


class TestGradient:
    def test_matches_central_differences(self):
        rng = np.random.default_rng(2)
        sequences = []
        for _ in range(5):
            n = int(rng.integers(1, 7))
            tokens = [VOCAB[rng.integers(len(VOCAB))] for _ in range(n)]
            tags = []
            prev = "O"
            for _ in range(n):
                choices = ["B", "O"] if prev == "O" else ["B", "I", "O"]
                prev = choices[rng.integers(len(choices))]
                tags.append(prev)
            sequences.append((tokens, tags))
        fun, n_params, _ = crf.crf_objective(sequences, c2=0.05)
        theta = rng.normal(size=n_params) * 0.4
        _, grad = fun(theta)
        eps = 1e-6
        for i in rng.choice(n_params, size=50, replace=False):
            tp, tm = theta.copy(), theta.copy()
            tp[i] += eps
            tm[i] -= eps
            fd = (fun(tp)[0] - fun(tm)[0]) / (2 * eps)
            assert abs(grad[i] - fd) / max(1e-8, abs(fd) + abs(grad[i])) <= 1e-4


class TestTraining:
    def test_single_label_memorized(self):
        model = crf.train_crf([(["a", "b", "c"], ["O", "O", "O"])], c1=0.0, c2=0.0)
        marginals = crf.sequence_marginals(model, ["a", "b", "c"])
        assert (marginals.argmax(axis=1) == crf.TAG_INDEX["O"]).all()

    def test_unambiguous_pattern_learned(self):
        sequences = [
            (["option", "x"], ["B", "O"]),
            (["y", "option"], ["O", "B"]),
            (["option", "z"], ["B", "O"]),
            (["w", "q"], ["O", "O"]),
        ]
        model = crf.train_crf(sequences, c1=0.0, c2=0.01)
        assert crf.viterbi_decode(model, ["option", "x"]) == ["B", "O"]

    def test_objective_non_increasing(self):
        sequences = [(["a", "b", "option", "c"], ["O", "O", "B", "I"])] * 3
        model = crf.train_crf(sequences, c1=0.5, c2=0.1, track_objective=True)
        history = model.objective_history
        assert len(history) >= 2
        assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))

    def test_huge_l1_zeroes_all_weights(self):
        sequences = [(["a", "b"], ["B", "I"]), (["c", "d"], ["O", "O"])]
        model = crf.train_crf(sequences, c1=1000.0, c2=0.0)
        assert np.all(model.state_weights == 0.0)
        assert np.all(model.transition_weights == 0.0)

    def test_l1_produces_exact_zeros(self):
        rng = np.random.default_rng(3)
        sequences = []
        for _ in range(12):
            n = int(rng.integers(2, 7))
            tokens = [VOCAB[rng.integers(len(VOCAB))] for _ in range(n)]
            labels = ["B"] + ["I"] * (n - 1) if rng.random() < 0.5 else ["O"] * n
            sequences.append((tokens, labels))
        model = crf.train_crf(sequences, c1=1.0, c2=0.0)
        flat = np.concatenate([model.state_weights.ravel(),
                               model.transition_weights.ravel()])
        assert (flat == 0.0).sum() > 0
        assert np.abs(flat).max() > 0

    def test_invalid_bio_rejected(self):
        with pytest.raises(InvalidLabelError):
            crf.train_crf([(["a", "b"], ["O", "I"])], c1=0.0, c2=0.0)
        with pytest.raises(InvalidLabelError):
            crf.train_crf([(["a"], ["I"])], c1=0.0, c2=0.0)
        with pytest.raises(InvalidLabelError):
            crf.train_crf([(["a"], ["X"])], c1=0.0, c2=0.0)

    def test_negative_penalty_rejected(self):
        with pytest.raises(InvalidHyperParameterError):
            crf.train_crf([(["a"], ["O"])], c1=-1.0, c2=0.0)


class TestDecodeRules:
    def test_zero_model_ties_break_to_first_tag(self):
        model = crf.CRFModel({}, np.zeros((0, 3)), np.zeros((3, 3)), 0.0, 0.0)
        assert crf.viterbi_decode(model, ["a", "b", "c"]) == ["B", "B", "B"]

    def test_blocked_transition_never_used(self):
        index = {"bias": 0}
        state = np.zeros((1, 3))
        state[0, crf.TAG_INDEX["I"]] = 5.0  # I strongly preferred pointwise
        trans = np.zeros((3, 3))
        trans[crf.TAG_INDEX["O"], crf.TAG_INDEX["I"]] = -1e6
        trans[crf.TAG_INDEX["B"], crf.TAG_INDEX["B"]] = -1e6
        trans[crf.TAG_INDEX["I"], crf.TAG_INDEX["B"]] = -1e6
        model = crf.CRFModel(index, state, trans, 0.0, 0.0)
        decoded = crf.viterbi_decode(model, ["a"] * 6)
        for prev, cur in zip(decoded, decoded[1:]):
            assert not (prev == "O" and cur == "I")
