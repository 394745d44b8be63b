import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cicc.codec import (
    CodeSizes,
    Receivers,
    Thresholds,
    bob_decode,
    default_thresholds,
    eve_decode,
    exact_metrics,
    experiment,
    gen_codebook,
    leakage,
    run_trials,
    sizes_from_rates,
    sum_log_ratios,
    t_membership,
)
from cicc.errors import EmptyMessageSet, ShapeMismatch
from cicc.prob import Channel, build_joint, random_channel, random_design
from cicc.region import RateQuadruple, info_vector

LN2 = math.log(2)


def conditionals(design, py, pz):
    """Per-letter laws read straight off the full joint."""
    j = build_joint(design, py, pz)

    def cond(given, out):
        m = j.marginal(given + [out])
        with np.errstate(invalid="ignore", divide="ignore"):
            return m / m.sum(axis=-1, keepdims=True)

    return {
        "y|uvx2": cond(["U", "V", "X2"], "Y"),
        "y|ux2": cond(["U", "X2"], "Y"),
        "y|x2": cond(["X2"], "Y"),
        "y": j.marginal(["Y"]),
        "z|ux2": cond(["U", "X2"], "Z"),
        "z": j.marginal(["Z"]),
    }


def llr(num, den):
    if num == 0:
        return -math.inf
    if den == 0:
        return math.inf
    return math.log(num / den)


def literal_sum(terms):
    if -math.inf in terms:
        return -math.inf
    if math.inf in terms:
        return math.inf
    return sum(terms)


def literal_in_t(c, which, seqs, th):
    if which == "T0":
        u, x2, z = seqs
        s = [llr(c["z|ux2"][a, b, o], c["z"][o]) for a, b, o in zip(u, x2, z)]
        return literal_sum(s) >= th.alpha0
    u, v, x2, y = seqs
    num = [c["y|uvx2"][a, b, d, o] for a, b, d, o in zip(u, v, x2, y)]
    if which == "T1":
        den = [c["y|ux2"][a, d, o] for a, d, o in zip(u, x2, y)]
    elif which == "T2":
        den = [c["y|x2"][d, o] for d, o in zip(x2, y)]
    else:
        den = [c["y"][o] for o in y]
    return literal_sum([llr(a, b) for a, b in zip(num, den)]) >= th.as_dict()["alpha" + which[1]]


def literal_bob(cb, c, th, y):
    hits = []
    K, I, J, S = cb.v.shape[:4]
    for k, i, j, s in itertools.product(range(K), range(I), range(J), range(S)):
        seqs = (cb.u[k, i], cb.v[k, i, j, s], cb.x2[k], y)
        if all(literal_in_t(c, w, seqs, th) for w in ("T1", "T2", "T3")):
            hits.append((k, i, j, s))
    return hits[0] if len(hits) == 1 else None


def literal_eve(cb, c, th, z):
    ks = {k for k in range(cb.u.shape[0]) for i in range(cb.u.shape[1])
          if literal_in_t(c, "T0", (cb.u[k, i], cb.x2[k], z), th)}
    return ks.pop() if len(ks) == 1 else None


def literal_metrics(cb, py, pz, th):
    c = conditionals(cb.design, py, pz)
    K, I, J, S, A, n = cb.x1.shape
    err_b = err_e = 0.0
    pz_s = np.zeros((S, pz.out_size**n))
    for k, i, j, s, a in itertools.product(*map(range, (K, I, J, S, A))):
        x1, x2 = cb.x1[k, i, j, s, a], cb.x2[k]
        for idx, y in enumerate(itertools.product(range(py.out_size), repeat=n)):
            p = math.prod(py.table[x1[t], x2[t], y[t]] for t in range(n))
            if literal_bob(cb, c, th, y) != (k, i, j, s):
                err_b += p
        for idx, z in enumerate(itertools.product(range(pz.out_size), repeat=n)):
            p = math.prod(pz.table[x1[t], x2[t], z[t]] for t in range(n))
            pz_s[s, idx] += p / (K * I * J * A)
            if literal_eve(cb, c, th, z) != k:
                err_e += p
    total = K * I * J * S * A
    bar = pz_s.mean(axis=0)
    leak = 0.0
    for row in pz_s:
        leak += sum(p * math.log(p / q) for p, q in zip(row, bar) if p > 0) / S
    return err_b / total, err_e / total, leak


def test_codebook_determinism_and_shapes(design):
    sizes = CodeSizes(2, 1, 3, 2, 2)
    a = gen_codebook(design, sizes, 3, 11)
    b = gen_codebook(design, sizes, 3, 11)
    c = gen_codebook(design, sizes, 3, 12)
    assert a.x1.shape == (2, 1, 3, 2, 2, 3) and a.v.shape == (2, 1, 3, 2, 3)
    assert all(np.array_equal(getattr(a, f), getattr(b, f)) for f in ("x2", "u", "v", "x1"))
    assert not np.array_equal(a.x1, c.x1)


def test_size_one_codebook(design):
    cb = gen_codebook(design, CodeSizes(1, 1, 1, 1, 1), 1, 0)
    assert cb.x1.shape == (1, 1, 1, 1, 1, 1)
    with pytest.raises(EmptyMessageSet):
        CodeSizes(1, 0, 1, 1, 1)
    with pytest.raises(ShapeMismatch):
        gen_codebook(design, CodeSizes(1, 1, 1, 1, 1), 0, 0)


def test_symbol_frequencies(design):
    cb = gen_codebook(design, CodeSizes(10_000, 1, 1, 1, 1), 1, 5)
    freq = cb.x2.mean()
    assert abs(freq - 0.4) <= 3 * math.sqrt(0.24 / 10_000)
    # superposition: u given x2 = 1 follows its conditional law
    sel = cb.x2[:, 0] == 1
    pu = cb.u[sel, 0, 0].mean()
    assert abs(pu - 0.8) <= 3 * math.sqrt(0.16 / sel.sum())


def test_sum_log_ratios():
    assert sum_log_ratios([1.0, 2.0]) == 3.0
    assert sum_log_ratios([np.inf, -np.inf]) == -np.inf
    assert sum_log_ratios([np.inf, 1.0]) == np.inf


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
@settings(max_examples=40, deadline=None)
def test_threshold_sets_match_literal_definition(seed, n):
    rng = np.random.default_rng(seed)
    d = random_design(rng, 2, 2, 2, 2)
    py, pz = random_channel(rng, (2, 2), 2), random_channel(rng, (2, 2), 2)
    th = Thresholds(*rng.uniform(-0.5, 0.5, 4))
    c = conditionals(d, py, pz)
    u, v, x2, y, z = (rng.integers(0, 2, n) for _ in range(5))
    assert t_membership((u, x2, z), d, py, pz, th, "T0") == literal_in_t(c, "T0", (u, x2, z), th)
    for w in ("T1", "T2", "T3"):
        assert t_membership((u, v, x2, y), d, py, pz, th, w) == literal_in_t(
            c, w, (u, v, x2, y), th
        )


def test_threshold_membership_errors(design, py, pz):
    th = Thresholds(0, 0, 0, 0)
    with pytest.raises(ShapeMismatch):
        t_membership(([0], [0, 1], [0]), design, py, pz, th, "T0")
    with pytest.raises(ShapeMismatch):
        t_membership(([0], [0], [0]), design, py, pz, th, "T1")


@given(st.integers(0, 2**32 - 1), st.integers(1, 2))
@settings(max_examples=25, deadline=None)
def test_decoders_match_literal_definition(seed, n):
    rng = np.random.default_rng(seed)
    d = random_design(rng, 2, 2, 2, 2)
    py, pz = random_channel(rng, (2, 2), 2), random_channel(rng, (2, 2), 2)
    th = Thresholds(*rng.uniform(-0.3, 0.3, 4))
    cb = gen_codebook(d, CodeSizes(2, 2, 1, 2, 1), n, seed)
    c = conditionals(d, py, pz)
    for y in itertools.product(range(2), repeat=n):
        assert bob_decode(y, cb, th, py, pz) == literal_bob(cb, c, th, y)
        assert eve_decode(y, cb, th, pz, py) == literal_eve(cb, c, th, y)


def test_decoder_ambiguity(design, py, pz):
    # every threshold at -inf accepts everything, so only singletons decode
    inf = Thresholds(-np.inf, -np.inf, -np.inf, -np.inf)
    one = gen_codebook(design, CodeSizes(1, 1, 1, 1, 1), 2, 0)
    assert bob_decode([0, 1], one, inf, py) == (0, 0, 0, 0)
    assert eve_decode([1, 1], one, inf, pz) == 0
    two = gen_codebook(design, CodeSizes(2, 1, 1, 1, 1), 2, 0)
    assert bob_decode([0, 1], two, inf, py) is None
    assert eve_decode([1, 1], two, inf, pz) is None
    never = Thresholds(np.inf, np.inf, np.inf, np.inf)
    assert bob_decode([0, 1], one, never, py) is None
    with pytest.raises(ShapeMismatch):
        bob_decode([0], one, inf, py)


@pytest.mark.parametrize("seed", range(6))
def test_exact_metrics_match_brute_force(design, py, pz, seed):
    iv = info_vector(design, py, pz)
    th = default_thresholds(iv, 0.0, 1)
    cb = gen_codebook(design, CodeSizes(2, 1, 2, 2, 2), 1, seed)
    got = exact_metrics(cb, py, pz, th)
    b, e, leak = literal_metrics(cb, py, pz, th)
    assert got["perr_bob"] == pytest.approx(b, abs=1e-12)
    assert got["perr_eve"] == pytest.approx(e, abs=1e-12)
    assert got["leakage"] == pytest.approx(leak, abs=1e-12)


def test_exact_metrics_brute_force_n2():
    rng = np.random.default_rng(42)
    d = random_design(rng, 2, 2, 2, 2)
    py, pz = random_channel(rng, (2, 2), 2), random_channel(rng, (2, 2), 3)
    th = Thresholds(*rng.uniform(-0.2, 0.2, 4))
    cb = gen_codebook(d, CodeSizes(2, 2, 2, 2, 1), 2, 3)
    got = exact_metrics(cb, py, pz, th)
    want = literal_metrics(cb, py, pz, th)
    assert [got[m] for m in ("perr_bob", "perr_eve", "leakage")] == pytest.approx(want, abs=1e-12)


def test_leakage_degenerate_cases(design, pz):
    cb = gen_codebook(design, CodeSizes(2, 1, 2, 1, 2), 2, 0)
    assert leakage(cb, pz) == 0.0
    flat = Channel(np.broadcast_to([0.3, 0.7], (2, 2, 2)))
    cb = gen_codebook(design, CodeSizes(2, 1, 2, 3, 2), 2, 0)
    assert leakage(cb, flat) == 0.0
    assert leakage(cb, pz) >= -1e-12


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_metrics_are_probabilities(seed):
    rng = np.random.default_rng(seed)
    d = random_design(rng, 2, 2, 2, 3)
    py, pz = random_channel(rng, (2, 2), 2), random_channel(rng, (2, 2), 2)
    th = Thresholds(*rng.uniform(-0.5, 0.5, 4))
    m = exact_metrics(gen_codebook(d, CodeSizes(2, 2, 2, 2, 2), 2, seed), py, pz, th)
    assert 0 <= m["perr_bob"] <= 1 and 0 <= m["perr_eve"] <= 1
    assert -1e-12 <= m["leakage"] <= math.log(2) + 1e-12


def test_receivers_reuse(design, py, pz):
    th = default_thresholds(info_vector(design, py, pz), 0.05, 2)
    rx = Receivers(design, py, pz, th)
    cb = gen_codebook(design, CodeSizes(2, 1, 2, 2, 2), 2, 9)
    assert exact_metrics(cb, py, pz, th, rx) == exact_metrics(cb, py, pz, th)


def test_sizes_from_rates():
    r = RateQuadruple(LN2, LN2, 2 * LN2, LN2)
    assert sizes_from_rates(r, LN2, 0.0, 1) == CodeSizes(2, 2, 2, 2, 2)
    assert sizes_from_rates(r, 0.0, 0.0, 2) == CodeSizes(4, 1, 16, 4, 4)
    assert sizes_from_rates(RateQuadruple(0, 0, 0, 0), 0, 0.0, 5) == CodeSizes(1, 1, 1, 1, 1)
    with pytest.raises(EmptyMessageSet):
        sizes_from_rates(RateQuadruple(0, 0, 0, 0), 0, 0.1, 5)


def test_experiment_is_deterministic(design, py, pz):
    r = RateQuadruple(LN2, LN2, LN2, LN2)
    a = experiment(design, py, pz, r, 0.0, 1, 30, seed=4)
    b = experiment(design, py, pz, r, 0.0, 1, 30, seed=4)
    c = experiment(design, py, pz, r, 0.0, 1, 30, seed=4, workers=2)
    assert a.trials == b.trials == c.trials
    assert a.mean == c.mean and a.bound == c.bound
    assert any(note.startswith("r1_split=") for note in a.notes)
    assert a.sizes.k == 2 and a.n == 1


def test_trials_vary_by_index(design, py, pz):
    th = default_thresholds(info_vector(design, py, pz), 0.0, 1)
    rep = run_trials(design, py, pz, CodeSizes(2, 1, 2, 2, 2), th, 1, 20, seed=1)
    assert len({tuple(t.values()) for t in rep.trials}) > 1
    assert rep.holds() == {"perr_bob": True, "perr_eve": True, "leakage": True}
    with pytest.raises(ShapeMismatch):
        run_trials(design, py, pz, CodeSizes(2, 1, 2, 2, 2), th, 1, 0, seed=1)


def test_explicit_theta_is_used(design, py, pz):
    th = default_thresholds(info_vector(design, py, pz), 0.0, 1)
    rep = run_trials(design, py, pz, CodeSizes(2, 1, 2, 2, 2), th, 1, 5, seed=1,
                     theta=0.5, theta2=0.25)
    assert (rep.theta, rep.theta2) == (0.5, 0.25)


def test_unit_ratio_threshold(design, pz):
    # Y depends on x2 only, so the T1 ratio is 1 and the test reduces to alpha1 <= 0
    y_x2 = Channel(np.broadcast_to([[0.7, 0.3], [0.1, 0.9]], (2, 2, 2)))
    seqs = ([0, 1], [1, 0], [1, 1], [0, 1])
    for a1, want in [(-0.01, True), (0.0, True), (0.01, False)]:
        th = Thresholds(0, a1, 0, 0)
        assert t_membership(seqs, design, y_x2, pz, th, "T1") is want


def test_noiseless_receiver_never_errs(pz):
    from cicc.prob import Dist, InputDesign

    # V = X1 and a trivial U; Y reveals (x1, x2) exactly
    d = InputDesign(
        Dist([0.5, 0.5]),
        Channel([[1.0], [1.0]]),
        Channel([[[0.5, 0.5], [0.5, 0.5]]]),
        Channel(np.eye(2)),
    )
    noiseless = Channel(np.eye(4).reshape(2, 2, 4))
    th = Thresholds(-1e6, -1e6, -1e6, -1e6)
    tried = 0
    for seed in range(50):
        cb = gen_codebook(d, CodeSizes(2, 1, 2, 1, 1), 3, seed)
        words = {(tuple(cb.x1[k, 0, j, 0, 0]), tuple(cb.x2[k])) for k in range(2) for j in range(2)}
        if len(words) < 4:
            continue
        tried += 1
        assert exact_metrics(cb, noiseless, pz, th)["perr_bob"] == 0
    assert tried > 5
