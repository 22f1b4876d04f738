"""Linear-chain conditional random field over B/I/O word tags.

State features per token: a bias, the token identity, and the identities
of the previous and next tokens (begin/end markers at the boundaries).
Likelihood and gradient use forward-backward in log space, batched across
sequences; training maximizes the penalized log-likelihood with an
orthant-respecting quasi-Newton step so L1 can zero weights exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import InvalidHyperParameterError, InvalidLabelError
from .optim import minimize_owlqn

TAGS = ("B", "I", "O")
TAG_INDEX = {t: i for i, t in enumerate(TAGS)}
N_TAGS = 3

BOS = "<s>"
EOS = "</s>"


def extract_features(tokens: list[str], position: int) -> list[str]:
    """Context feature names for one position: bias, current, previous, next."""
    if not 0 <= position < len(tokens):
        raise IndexError(f"position {position} outside sequence of length {len(tokens)}")
    prev_tok = tokens[position - 1] if position > 0 else BOS
    next_tok = tokens[position + 1] if position + 1 < len(tokens) else EOS
    return ["bias", f"w0={tokens[position]}", f"w-1={prev_tok}", f"w+1={next_tok}"]

_N_FEATS = 4  # features per position


def validate_bio(tags: list[str]) -> None:
    prev = "O"
    for i, tag in enumerate(tags):
        if tag not in TAG_INDEX:
            raise InvalidLabelError(f"unknown tag {tag!r} at position {i}")
        if tag == "I" and prev == "O":
            raise InvalidLabelError(f"I follows {'start' if i == 0 else 'O'} at position {i}")
        prev = tag
    # an I at position 0 is caught above because prev starts as O


@dataclass
class CRFModel:
    feature_index: dict[str, int]
    state_weights: np.ndarray        # (n_features, 3)
    transition_weights: np.ndarray   # (3, 3), rows = from, cols = to
    c1: float
    c2: float
    objective_history: list[float] | None = None

    def emissions(self, tokens: list[str]) -> np.ndarray:
        out = np.zeros((len(tokens), N_TAGS))
        for t in range(len(tokens)):
            for name in extract_features(tokens, t):
                idx = self.feature_index.get(name)
                if idx is not None:
                    out[t] += self.state_weights[idx]
        return out

    def state_feature_triples(self) -> list[tuple[str, str, float]]:
        triples = []
        for name, idx in sorted(self.feature_index.items()):
            for tag_i, tag in enumerate(TAGS):
                w = float(self.state_weights[idx, tag_i])
                if w != 0.0:
                    triples.append((name, tag, w))
        return triples


def viterbi_decode(model: CRFModel, tokens: list[str]) -> list[str]:
    """Best tag path; ties resolve toward the lower tag index (B < I < O)."""
    if not tokens:
        raise ValueError("cannot decode an empty token sequence")
    E = model.emissions(tokens)
    T = model.transition_weights
    n = len(tokens)
    score = E[0].copy()
    back = np.zeros((n, N_TAGS), dtype=int)
    for t in range(1, n):
        cand = score[:, None] + T          # (from, to)
        back[t] = np.argmax(cand, axis=0)  # first max wins -> B < I < O
        score = cand[back[t], np.arange(N_TAGS)] + E[t]
    path = [int(np.argmax(score))]
    for t in range(n - 1, 0, -1):
        path.append(int(back[t, path[-1]]))
    path.reverse()
    return [TAGS[i] for i in path]


def log_partition(model: CRFModel, tokens: list[str]) -> float:
    """log Z via the forward recursion (used by tests and diagnostics)."""
    E = model.emissions(tokens)
    T = model.transition_weights
    alpha = E[0].copy()
    for t in range(1, len(tokens)):
        alpha = _logsumexp_cols(alpha[:, None] + T) + E[t]
    return _logsumexp(alpha)


def sequence_marginals(model: CRFModel, tokens: list[str]) -> np.ndarray:
    """(T, 3) posterior tag marginals for one sequence."""
    E = model.emissions(tokens)
    T = model.transition_weights
    n = len(tokens)
    alpha = np.zeros((n, N_TAGS))
    alpha[0] = E[0]
    for t in range(1, n):
        alpha[t] = _logsumexp_cols(alpha[t - 1][:, None] + T) + E[t]
    beta = np.zeros((n, N_TAGS))
    for t in range(n - 2, -1, -1):
        beta[t] = _logsumexp_cols((T + (E[t + 1] + beta[t + 1])[None, :]).T)
    logz = _logsumexp(alpha[-1])
    return np.exp(alpha + beta - logz)


def _logsumexp(v: np.ndarray) -> float:
    m = v.max()
    return float(m + np.log(np.exp(v - m).sum()))


def _logsumexp_cols(mat: np.ndarray) -> np.ndarray:
    m = mat.max(axis=0)
    return m + np.log(np.exp(mat - m[None, :]).sum(axis=0))


def _forward_backward_packed(e_tok: np.ndarray, offsets: np.ndarray,
                             T: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Log-domain forward-backward over packed sequences.

    Returns (sum of log-partitions, per-token tag marginals, expected
    transition counts).  e_tok rows are emission scores; offsets delimit
    sequences in packed token order.
    """
    n_tok = e_tok.shape[0]
    alpha = np.empty((n_tok, N_TAGS))
    beta = np.zeros((n_tok, N_TAGS))
    logz_sum = 0.0
    expected_trans = np.zeros((N_TAGS, N_TAGS))
    marg = np.empty((n_tok, N_TAGS))
    for s in range(len(offsets) - 1):
        lo, hi = int(offsets[s]), int(offsets[s + 1])
        alpha[lo] = e_tok[lo]
        for t in range(lo + 1, hi):
            for j in range(N_TAGS):
                m = -np.inf
                for i in range(N_TAGS):
                    v = alpha[t - 1, i] + T[i, j]
                    if v > m:
                        m = v
                acc = 0.0
                for i in range(N_TAGS):
                    acc += np.exp(alpha[t - 1, i] + T[i, j] - m)
                alpha[t, j] = m + np.log(acc) + e_tok[t, j]
        m = alpha[hi - 1].max()
        logz = m + np.log(np.exp(alpha[hi - 1] - m).sum())
        logz_sum += logz
        for t in range(hi - 2, lo - 1, -1):
            for i in range(N_TAGS):
                m2 = -np.inf
                for j in range(N_TAGS):
                    v = T[i, j] + e_tok[t + 1, j] + beta[t + 1, j]
                    if v > m2:
                        m2 = v
                acc = 0.0
                for j in range(N_TAGS):
                    acc += np.exp(T[i, j] + e_tok[t + 1, j] + beta[t + 1, j] - m2)
                beta[t, i] = m2 + np.log(acc)
        for t in range(lo, hi):
            for i in range(N_TAGS):
                marg[t, i] = np.exp(alpha[t, i] + beta[t, i] - logz)
        for t in range(lo + 1, hi):
            for i in range(N_TAGS):
                for j in range(N_TAGS):
                    expected_trans[i, j] += np.exp(
                        alpha[t - 1, i] + T[i, j] + e_tok[t, j] + beta[t, j] - logz
                    )
    return logz_sum, marg, expected_trans


try:  # compiled kernel; the pure-python path above is the fallback
    from numba import njit as _njit

    _forward_backward_fast = _njit(cache=True, nogil=True)(_forward_backward_packed)
except ImportError:  # pragma: no cover
    _forward_backward_fast = None


class _Batch:
    """All training sequences packed for the forward-backward kernel."""

    def __init__(self, sequences: list[tuple[list[str], list[str]]],
                 feature_index: dict[str, int]):
        self.lengths = np.array([len(toks) for toks, _ in sequences], dtype=np.int64)
        self.n_seq = len(sequences)
        self.n_features = len(feature_index)
        n_tok = int(self.lengths.sum())

        rows, cols = [], []
        tags = np.empty(n_tok, dtype=int)
        pos = 0
        for toks, seq_tags in sequences:
            for t in range(len(toks)):
                for name in extract_features(toks, t):
                    idx = feature_index.get(name)
                    if idx is not None:
                        rows.append(pos)
                        cols.append(idx)
                tags[pos] = TAG_INDEX[seq_tags[t]]
                pos += 1
        data = np.ones(len(rows))
        self.incidence = sparse.csr_matrix(
            (data, (rows, cols)), shape=(n_tok, self.n_features)
        )
        self.incidence_t = self.incidence.T.tocsr()
        self.tags = tags
        self.offsets = np.concatenate([[0], np.cumsum(self.lengths)]).astype(np.int64)

        one_hot = np.zeros((n_tok, N_TAGS))
        one_hot[np.arange(n_tok), tags] = 1.0
        self.empirical_state = self.incidence_t @ one_hot
        self.empirical_trans = np.zeros((N_TAGS, N_TAGS))
        for s in range(self.n_seq):
            seq_tags = tags[self.offsets[s]: self.offsets[s + 1]]
            for a, b in zip(seq_tags[:-1], seq_tags[1:]):
                self.empirical_trans[a, b] += 1.0

    def neg_log_likelihood(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        n_state = self.n_features * N_TAGS
        W = theta[:n_state].reshape(self.n_features, N_TAGS)
        T = np.ascontiguousarray(theta[n_state:].reshape(N_TAGS, N_TAGS))

        e_tok = np.ascontiguousarray(self.incidence @ W)
        kernel = _forward_backward_fast or _forward_backward_packed
        logz_sum, marg, expected_trans = kernel(e_tok, self.offsets, T)

        expected_state = self.incidence_t @ marg
        gold_score = (
            float((self.empirical_state * W).sum())
            + float((self.empirical_trans * T).sum())
        )
        nll = float(logz_sum) - gold_score
        grad = np.concatenate(
            [
                (expected_state - self.empirical_state).ravel(),
                (expected_trans - self.empirical_trans).ravel(),
            ]
        )
        return nll, grad


def crf_objective(sequences: list[tuple[list[str], list[str]]], c2: float = 0.0):
    """Smooth training objective for gradient checks.

    Returns (fun, n_params, feature_index) where fun(theta) gives the
    penalized negative log-likelihood and its gradient.
    """
    feature_index = build_feature_index(sequences)
    batch = _Batch(sequences, feature_index)
    n_params = len(feature_index) * N_TAGS + N_TAGS * N_TAGS

    def fun(theta: np.ndarray) -> tuple[float, np.ndarray]:
        nll, grad = batch.neg_log_likelihood(theta)
        return nll + c2 * float(theta @ theta), grad + 2.0 * c2 * theta

    return fun, n_params, feature_index


def build_feature_index(sequences: list[tuple[list[str], list[str]]]) -> dict[str, int]:
    names: set[str] = set()
    for tokens, _ in sequences:
        for t in range(len(tokens)):
            names.update(extract_features(tokens, t))
    return {name: i for i, name in enumerate(sorted(names))}


def train_crf(sequences: list[tuple[list[str], list[str]]], c1: float, c2: float,
              max_iter: int = 300, ftol: float = 1e-6,
              track_objective: bool = False) -> CRFModel:
    """Fit on (tokens, tags) sequences by penalized maximum likelihood."""
    if c1 < 0 or c2 < 0:
        raise InvalidHyperParameterError(f"penalties must be non-negative: c1={c1}, c2={c2}")
    if not sequences:
        raise ValueError("no training sequences")
    for tokens, tags in sequences:
        if len(tokens) != len(tags):
            raise InvalidLabelError(f"{len(tokens)} tokens vs {len(tags)} tags")
        validate_bio(tags)

    feature_index = build_feature_index(sequences)
    batch = _Batch(sequences, feature_index)
    n_params = len(feature_index) * N_TAGS + N_TAGS * N_TAGS

    def smooth(theta: np.ndarray) -> tuple[float, np.ndarray]:
        nll, grad = batch.neg_log_likelihood(theta)
        return nll + c2 * float(theta @ theta), grad + 2.0 * c2 * theta

    result = minimize_owlqn(
        smooth, np.zeros(n_params), l1=c1, max_iter=max_iter, ftol=ftol,
        track_history=track_objective,
    )
    n_state = len(feature_index) * N_TAGS
    return CRFModel(
        feature_index=feature_index,
        state_weights=result.x[:n_state].reshape(len(feature_index), N_TAGS),
        transition_weights=result.x[n_state:].reshape(N_TAGS, N_TAGS),
        c1=c1,
        c2=c2,
        objective_history=result.history if track_objective else None,
    )
