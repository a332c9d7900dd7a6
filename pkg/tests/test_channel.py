import math

import pytest

from dnastore.channel import (
    DecoderConfig,
    SequencingErrorModel,
    adversarial_attack_trial,
    bound_adversarial,
    bound_erasure,
    bound_no_seq,
    bound_random,
    estimate_error_probability,
    run_trial,
)
from dnastore.codebook import Codebook, Codeword, greedy_index_codebook
from dnastore.errors import DomainError
from dnastore.params import ScalingParams


def disjoint_pair_cb(M=8, N=6):
    sc = ScalingParams(M=M, inner_size=2 * M, N=N, J=2)
    a = Codeword.from_molecules(range(M))
    b = Codeword.from_molecules(range(M, 2 * M))
    return Codebook(sc, (a, b), index_based=False)


def overlapping_pair_cb(M=16, N=8):
    # codewords share half their molecules
    sc = ScalingParams(M=M, inner_size=4 * M, N=N, J=2)
    a = Codeword.from_molecules(range(M))
    b = Codeword.from_molecules(range(M // 2, M // 2 + M))
    return Codebook(sc, (a, b), index_based=False)


def cap_codebook(M=16, inner=256, N=48, cap=3, J=32, seed=9):
    sc = ScalingParams(M=M, inner_size=inner, N=N, J=J)
    return greedy_index_codebook(sc, cap, target_J=J, seed=seed, attempt_budget=50_000)


DIST = DecoderConfig("distinct_intersection", epsilon=0.125)
MULT = DecoderConfig("multiplicity_count", epsilon=0.15, eta=0.5)


class TestModelValidation:
    def test_kinds(self):
        with pytest.raises(DomainError):
            SequencingErrorModel("bogus")
        with pytest.raises(DomainError):
            SequencingErrorModel("erasure", p=1.0)
        with pytest.raises(DomainError):
            SequencingErrorModel("none", p=0.1)
        with pytest.raises(DomainError):
            SequencingErrorModel("adversarial", p=0.1)
        with pytest.raises(DomainError):
            SequencingErrorModel.adversarial(0.1, (1, 1))
        with pytest.raises(DomainError):
            SequencingErrorModel("erasure", p=0.1, attack_pair=(0, 1))

    def test_decoder_validation(self):
        with pytest.raises(DomainError):
            DecoderConfig("nope")
        with pytest.raises(DomainError):
            DecoderConfig("distinct_intersection", epsilon=-1.0)
        with pytest.raises(DomainError):
            DecoderConfig("distinct_intersection", eta=1.0)


class TestRunTrial:
    def test_disjoint_always_succeeds(self):
        cb = disjoint_pair_cb(N=3)
        for seed in range(300):
            out = run_trial(cb, seed % 2, SequencingErrorModel.none(), DIST, seed)
            assert out.success
            assert out.failure_cause == "none"
            assert out.sequencing_errors == 0

    def test_guarantee_implies_success(self):
        cb = cap_codebook()
        for seed in range(400):
            out = run_trial(cb, seed % len(cb), SequencingErrorModel.none(), DIST, seed)
            if all(out.guarantee_flags):
                assert out.success

    def test_erasure_p0_identical_to_none(self):
        cb = overlapping_pair_cb()
        for seed in range(50):
            a = run_trial(cb, 0, SequencingErrorModel.none(), DIST, seed)
            b = run_trial(cb, 0, SequencingErrorModel.erasure(0.0), DIST, seed)
            assert a == b

    def test_deterministic_in_seed(self):
        cb = cap_codebook()
        model = SequencingErrorModel.random(0.1)
        a = run_trial(cb, 3, model, MULT, 1234)
        b = run_trial(cb, 3, model, MULT, 1234)
        assert a == b

    def test_distinct_count_bounded(self):
        cb = cap_codebook(N=48)
        out = run_trial(cb, 0, SequencingErrorModel.none(), DIST, 7)
        assert 1 <= out.distinct_sampled <= min(48, 16)

    def test_erasure_counts_errors(self):
        cb = overlapping_pair_cb()
        out = run_trial(cb, 0, SequencingErrorModel.erasure(0.6), DIST, 2)
        assert out.sequencing_errors >= 0

    def test_random_model_diagnostics(self):
        cb = cap_codebook()
        out = run_trial(cb, 1, SequencingErrorModel.random(0.3), MULT, 5)
        assert out.top_sample_count is not None
        assert out.rival_error_count is not None
        assert out.rival_error_count <= out.sequencing_errors

    def test_message_range_checked(self):
        cb = disjoint_pair_cb()
        with pytest.raises(DomainError):
            run_trial(cb, 2, SequencingErrorModel.none(), DIST, 0)


class TestUniqueSupersetDecoder:
    def test_disjoint_always_succeeds(self):
        cb = disjoint_pair_cb(N=4)
        dec = DecoderConfig("unique_superset")
        for seed in range(100):
            out = run_trial(cb, seed % 2, SequencingErrorModel.none(), dec, seed)
            assert out.success

    def test_foreign_molecules_break_containment(self):
        # half the inner codebook lies outside both codewords, so wild
        # replacements can produce observation sets no codeword contains
        sc = ScalingParams(M=8, inner_size=32, N=4, J=2)
        a = Codeword.from_molecules(range(8))
        b = Codeword.from_molecules(range(8, 16))
        cb = Codebook(sc, (a, b), index_based=False)
        dec = DecoderConfig("unique_superset")
        outs = [
            run_trial(cb, 0, SequencingErrorModel.random(0.9), dec, seed)
            for seed in range(200)
        ]
        failures = [o for o in outs if not o.success]
        assert failures
        assert any(o.decoded_message is None for o in failures)


class TestEstimator:
    def test_disjoint_has_zero_errors(self):
        cb = disjoint_pair_cb(N=4)
        rep = estimate_error_probability(
            cb, SequencingErrorModel.none(), DIST, 20_000, 1
        )
        assert rep.errors == 0
        assert rep.p_hat == 0.0
        assert rep.failure_causes["none"] == 20_000

    def test_single_message_cannot_err(self):
        sc = ScalingParams(M=4, inner_size=8, N=4, J=1)
        cb = Codebook(sc, (Codeword.from_molecules(range(4)),), False)
        rep = estimate_error_probability(
            cb, SequencingErrorModel.random(0.5), MULT, 5_000, 3
        )
        assert rep.p_hat == 0.0

    def test_identical_pair_is_coin_flip(self):
        sc = ScalingParams(M=8, inner_size=16, N=8, J=2)
        cw = Codeword.from_molecules(range(8))
        cb = Codebook(sc, (cw, cw), False, validate_distinct=False)
        rep = estimate_error_probability(
            cb, SequencingErrorModel.none(), DIST, 100_000, 17
        )
        sigma = math.sqrt(0.25 / rep.trials)
        assert abs(rep.p_hat - 0.5) <= 4 * sigma
        assert rep.failure_causes["tie"] == rep.errors

    def test_deterministic_and_worker_independent(self):
        cb = overlapping_pair_cb()
        model = SequencingErrorModel.erasure(0.3)
        a = estimate_error_probability(cb, model, DIST, 30_000, 99, workers=1)
        b = estimate_error_probability(cb, model, DIST, 30_000, 99, workers=1)
        c = estimate_error_probability(cb, model, DIST, 30_000, 99, workers=3)
        assert a.comparable_dict() == b.comparable_dict() == c.comparable_dict()

    def test_model_ordering(self):
        # erasures only remove information; the paired attack dominates
        # uniform replacement
        cb = overlapping_pair_cb(M=16, N=8)
        p = 0.35
        trials = 100_000
        p_none = estimate_error_probability(
            cb, SequencingErrorModel.none(), DIST, trials, 5
        ).p_hat
        p_erasure = estimate_error_probability(
            cb, SequencingErrorModel.erasure(p), DIST, trials, 5
        ).p_hat
        p_random = estimate_error_probability(
            cb, SequencingErrorModel.random(p), DIST, trials, 5
        ).p_hat
        p_attack = estimate_error_probability(
            cb, SequencingErrorModel.adversarial(p, (0, 1)), DIST, trials, 5
        ).p_hat
        slack = 4 * math.sqrt(0.5 / trials)
        assert p_none <= p_erasure + slack
        assert p_random <= p_attack + slack


class TestAdversarialAttack:
    def test_p0_reduces_to_clean_channel(self):
        cb = disjoint_pair_cb(N=6)
        out = adversarial_attack_trial(cb, (0, 1), 0.0, seed=3)
        assert out.sequencing_errors == 0
        assert out.attack_cases == (0,) * 6
        assert out.attack_bad_event is False
        assert out.success

    def test_trial_records_cases(self):
        cb = disjoint_pair_cb(N=6)
        out = adversarial_attack_trial(cb, (0, 1), 0.5, seed=11)
        assert len(out.attack_cases) == 6
        assert set(out.attack_cases) <= {0, 1, 2}

    def test_bad_event_rate(self):
        cb = disjoint_pair_cb(N=6)
        p = 0.3
        trials = 300_000
        rep = estimate_error_probability(
            cb,
            SequencingErrorModel.adversarial(p, (0, 1)),
            DecoderConfig("multiplicity_count"),
            trials,
            21,
        )
        expected = (p / 2) ** 3 * (1 - p) ** 3
        sigma = math.sqrt(expected * (1 - expected) / trials)
        observed = rep.attack_stats["pattern_first_half_hits"] / trials
        assert abs(observed - expected) <= 4 * sigma

    def test_conditional_error_near_half(self):
        cb = disjoint_pair_cb(N=6)
        rep = estimate_error_probability(
            cb,
            SequencingErrorModel.adversarial(0.3, (0, 1)),
            DecoderConfig("multiplicity_count"),
            400_000,
            2,
        )
        bad = rep.attack_stats["bad_events"]
        errs = rep.attack_stats["bad_event_errors"]
        assert bad > 100
        assert errs / bad >= 0.5 - 4 * math.sqrt(0.25 / bad)

    def test_pair_validation(self):
        cb = disjoint_pair_cb()
        with pytest.raises(DomainError):
            adversarial_attack_trial(cb, (0, 0), 0.1)
        with pytest.raises(DomainError):
            adversarial_attack_trial(cb, (0, 5), 0.1)


def make_scaling(M=16, N=24, J=100):
    return ScalingParams(M=M, inner_size=4 * M, N=N, J=J)


class TestBounds:
    def test_no_seq_certain_lower(self):
        sc = make_scaling()
        lower, _ = bound_no_seq(sc, 16, 16)
        assert lower == pytest.approx(math.log(0.25))

    def test_no_seq_impossible_upper(self):
        sc = make_scaling()
        _, upper = bound_no_seq(sc, 0, 0)
        assert upper == float("-inf")

    def test_no_seq_worked_example(self):
        sc = make_scaling(M=16, N=24)
        lower, upper = bound_no_seq(sc, 4, 2)
        assert lower == pytest.approx(math.log(0.25) + 24 * math.log(2 / 16))
        assert upper == pytest.approx(
            math.log(math.comb(16, 4)) + 24 * math.log(4 / 16)
        )
        assert lower <= upper

    def test_erasure_reduces_at_p0(self):
        sc = make_scaling()
        assert bound_erasure(sc, 4, 2, 0.0) == bound_no_seq(sc, 4, 2)

    def test_erasure_certain_at_p1(self):
        sc = make_scaling()
        lower, _ = bound_erasure(sc, 4, 2, 1.0)
        assert lower == pytest.approx(math.log(0.25))

    def test_erasure_worked_example(self):
        sc = make_scaling(M=16, N=24)
        lower, upper = bound_erasure(sc, 4, 2, 0.1)
        assert lower == pytest.approx(math.log(0.25) + 24 * math.log(max(0.1, 2 / 16)))
        assert upper == pytest.approx(
            math.log(math.comb(16, 4)) + 24 * math.log(0.1 + 4 / 16)
        )
        assert lower <= upper

    def test_adversarial_reduces_at_p0(self):
        sc = make_scaling()
        assert bound_adversarial(sc, 4, 2, 0.0)[0] == bound_no_seq(sc, 4, 2)[0]

    def test_adversarial_attack_term(self):
        sc = make_scaling(M=16, N=6)
        lower, _ = bound_adversarial(sc, 4, 0, 0.3)
        assert math.exp(lower) == pytest.approx(0.5 * 0.105**3, rel=1e-9)

    def test_adversarial_upper_capped(self):
        sc = make_scaling(M=16, N=6)
        _, upper = bound_adversarial(sc, 16, 0, 0.3)
        assert upper == 0.0

    def test_random_dominant_p(self):
        sc = make_scaling(M=16, N=48, J=10_000)
        p = 0.3  # above K1/M = 4/16 would need p bigger; use K1 = 4, p = 0.3
        lower, upper = bound_random(sc, 4, p, J=10_000, alpha=1.5)
        gamma = math.log(10_000) / (0.5 * math.log(16))
        expected_upper = min(
            0.0,
            3 * math.log(48) + (16 + 3 * 48) * math.log(2) + (48 - gamma) * math.log(p),
        )
        assert upper == pytest.approx(expected_upper)
        assert lower == pytest.approx(math.log(0.25) + 48 * math.log(0.3))

    def test_random_single_message(self):
        sc = make_scaling(M=16, N=8, J=1)
        lower, upper = bound_random(sc, 4, 0.05, J=1)
        assert upper <= 0.0  # gamma = 0, exponent = N

    def test_random_vacuous_guard(self):
        sc = make_scaling(M=16, N=8)
        with pytest.raises(DomainError, match="vacuous"):
            bound_random(sc, 4, 0.05, J=round(math.exp(12.0)))

    def test_argument_validation(self):
        sc = make_scaling()
        with pytest.raises(DomainError):
            bound_no_seq(sc, 2, 4)  # K2 > K1
        with pytest.raises(DomainError):
            bound_erasure(sc, 4, 2, 1.5)


class TestUpperBoundBracketing:
    """The achievability-side upper bounds hold for the specific construction
    and decoder they describe: a capped no-multiset codebook decoded by
    unique containment."""

    def test_no_seq_upper(self):
        # dense little codebook so containment failures actually happen
        sc = ScalingParams(M=8, inner_size=16, N=16, J=16)
        cb = greedy_index_codebook(sc, 7, target_J=16, seed=3, attempt_budget=10_000)
        K1 = cb.max_intersection()[0]
        _, upper = bound_no_seq(sc, K1, 0)
        rep = estimate_error_probability(
            cb, SequencingErrorModel.none(), DecoderConfig("unique_superset"),
            100_000, 8,
        )
        assert rep.p_hat > 0  # non-vacuous at these parameters
        assert rep.p_hat <= math.exp(upper) + 4 * rep.std_err

    def test_erasure_upper(self):
        sc = ScalingParams(M=16, inner_size=64, N=32, J=64)
        cb = greedy_index_codebook(sc, 12, target_J=64, seed=20, attempt_budget=100_000)
        K1 = cb.max_intersection()[0]
        p = 0.02
        _, upper = bound_erasure(sc, K1, 0, p)
        assert upper < 0.0  # the bound itself is informative here
        rep = estimate_error_probability(
            cb, SequencingErrorModel.erasure(p), DecoderConfig("unique_superset"),
            100_000, 8,
        )
        assert rep.p_hat <= math.exp(upper) + 4 * max(rep.std_err, 1 / rep.trials)


class TestGuaranteeSoundness:
    @pytest.mark.parametrize(
        "model",
        [
            SequencingErrorModel.none(),
            SequencingErrorModel.erasure(0.08),
            SequencingErrorModel.random(0.05),
        ],
    )
    def test_distinct_rule(self, model):
        cb = cap_codebook(N=48)
        hits = 0
        for seed in range(1500):
            out = run_trial(cb, seed % len(cb), model, DIST, seed)
            if all(out.guarantee_flags):
                hits += 1
                assert out.success, (seed, out)
        assert hits > 0

    def test_multiplicity_rule(self):
        cb = cap_codebook(N=128)
        model = SequencingErrorModel.random(0.02)
        hits = 0
        for seed in range(1500):
            out = run_trial(cb, seed % len(cb), model, MULT, seed)
            if all(out.guarantee_flags):
                hits += 1
                assert out.success, (seed, out)
        assert hits > 0
