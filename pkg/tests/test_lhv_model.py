"""
Tests for hidden-variable models
"""

import numpy as np
import pytest

from bellrand.bell_core import ch_value, chsh_value, is_no_signaling
from bellrand.errors import ValidationError
from bellrand.lhv_model import (
    CH_REDUCED_STRATEGIES,
    CHSH_REDUCED_STRATEGIES,
    all_strategies,
    averaging_residuals,
    ch_table_value,
    coefficient_matrix,
    ensemble_bell_value,
    induced_joint,
    j_lambda,
    merge_equivalent_lambdas,
    optimal_local_response,
    symmetrize,
    validate_ensemble,
)
from bellrand.models import (
    DeterministicStrategy,
    FactorizedInputConditional,
    Functional,
    InputConditional,
    LhvAtom,
    LhvEnsemble,
    RandomnessBounds,
)

UNIFORM = InputConditional.uniform()
S1111 = DeterministicStrategy(1, 1, 1, 1)


def random_input(rng):
    return InputConditional(tuple(rng.dirichlet(np.ones(4))))


# =============================================================================
# Per-atom values
# =============================================================================


class TestJLambda:
    def test_table_matches_coefficients(self, rng):
        for _ in range(50):
            ic = random_input(rng)
            for s in all_strategies():
                assert ch_table_value(s, ic) == pytest.approx(j_lambda(s, ic), abs=1e-15)

    def test_chsh_reduced_forms(self, rng):
        ic = random_input(rng)
        for s, i in zip(CHSH_REDUCED_STRATEGIES, (3, 2, 1, 0)):
            assert j_lambda(s, ic, Functional.CHSH) == pytest.approx(1 - 2 * ic[i])

    def test_factorized_inputs(self):
        ic = FactorizedInputConditional(0.5, 0.5)
        assert j_lambda(S1111, ic) == pytest.approx(j_lambda(S1111, UNIFORM))

    def test_uniform_local_bound(self):
        assert max(4 * j_lambda(s, UNIFORM) for s in all_strategies()) == 0.0
        assert max(4 * j_lambda(s, UNIFORM, "chsh") for s in all_strategies()) == 2.0


class TestOptimalLocalResponse:
    def test_uniform_tie_breaks_to_first(self):
        strategy, value = optimal_local_response(UNIFORM)
        assert strategy == CH_REDUCED_STRATEGIES[0]
        assert value == 0.0

    def test_chsh_uniform(self):
        strategy, value = optimal_local_response(UNIFORM, Functional.CHSH)
        assert strategy == S1111
        assert value == pytest.approx(0.5)

    def test_reduced_set_dominates(self, rng):
        """No deterministic rule beats the reduced set at any input"""
        for functional in Functional:
            full = coefficient_matrix(all_strategies(), functional)
            for _ in range(200):
                ic = random_input(rng)
                _, value = optimal_local_response(ic, functional)
                assert value >= (full @ ic.as_array()).max() - 1e-15

    def test_picks_bias(self):
        ic = InputConditional((0.1, 0.4, 0.4, 0.1))
        strategy, value = optimal_local_response(ic)
        assert strategy == CH_REDUCED_STRATEGIES[4]
        assert value == pytest.approx(0.3)


# =============================================================================
# Ensemble value and validation
# =============================================================================


class TestEnsembleBellValue:
    def test_uniform_single_atom(self, uniform_ensemble):
        assert ensemble_bell_value(uniform_ensemble) == 0.0

    def test_general_attack(self, general_attack):
        assert ensemble_bell_value(general_attack) == pytest.approx(5 / 6, abs=1e-12)

    def test_averaging_violation_names_setting(self):
        e = LhvEnsemble((LhvAtom(1.0, InputConditional((0.4, 0.2, 0.2, 0.2)), S1111),))
        with pytest.raises(ValidationError, match="setting 0"):
            ensemble_bell_value(e)

    def test_residuals(self, general_attack):
        assert np.abs(averaging_residuals(general_attack)).max() <= 1e-12


class TestValidateEnsemble:
    def test_attack_passes(self, general_attack, third_bounds):
        assert validate_ensemble(general_attack, third_bounds).ok

    def test_box_upper_bound(self, general_attack):
        report = validate_ensemble(general_attack, RandomnessBounds(0.3, 0.0))
        assert not report.ok
        assert "box upper bound" in report.constraints()

    def test_box_lower_bound(self, general_attack):
        report = validate_ensemble(general_attack, RandomnessBounds(1 / 3, 0.01))
        assert "box lower bound" in report.constraints()

    def test_weights(self):
        e = LhvEnsemble(
            (
                LhvAtom(0.7, UNIFORM, S1111),
                LhvAtom(0.6, UNIFORM, S1111),
                LhvAtom(-0.3, UNIFORM, S1111),
            )
        )
        report = validate_ensemble(e, RandomnessBounds(0.25, 0.25))
        assert report.constraints() == ["weight non-negative"]
        assert report.violations[0].atom == 2

    def test_normalization(self):
        e = LhvEnsemble((LhvAtom(0.5, UNIFORM, S1111),))
        report = validate_ensemble(e, RandomnessBounds(0.25, 0.25))
        assert "weights normalized" in report.constraints()
        assert "averaging" in report.constraints()

    def test_factorizable(self, general_attack, third_bounds):
        report = validate_ensemble(general_attack, third_bounds, factorizable=True)
        assert report.constraints() == ["factorizable inputs"]

    def test_factorized_atoms_pass(self):
        e = LhvEnsemble((LhvAtom(1.0, FactorizedInputConditional(0.5, 0.5), S1111),))
        assert validate_ensemble(e, RandomnessBounds(0.25, 0.25), factorizable=True).ok

    def test_clamped_bounds_warn(self, uniform_ensemble, caplog):
        with caplog.at_level("WARNING"):
            assert validate_ensemble(uniform_ensemble, RandomnessBounds(0.9, 0.2)).ok
        assert "exceeds 1 - 3Q" in caplog.text


# =============================================================================
# Merging and induced distributions
# =============================================================================


class TestMergeEquivalentLambdas:
    def test_same_strategy_atoms_combine(self):
        e = LhvEnsemble(
            (
                LhvAtom(0.7, UNIFORM, S1111),
                LhvAtom(0.3, InputConditional((0.0, 0.5, 0.25, 0.25)), S1111),
            )
        )
        merged = merge_equivalent_lambdas(e)
        assert len(merged) == 1
        assert merged[0].weight == pytest.approx(1.0)
        assert merged[0].ic.p == pytest.approx((0.175, 0.325, 0.25, 0.25))

    def test_preserves_value_and_averaging(self, random_ensemble):
        for _ in range(1000):
            e = random_ensemble()
            merged = merge_equivalent_lambdas(e)
            assert len(set(merged.strategies)) == len(merged)
            assert np.abs(merged.moments() - e.moments()).max() <= 1e-12
            for functional in Functional:
                assert ensemble_bell_value(merged, functional) == pytest.approx(
                    ensemble_bell_value(e, functional), abs=1e-12
                )

    def test_idempotent(self, random_ensemble):
        for _ in range(100):
            merged = merge_equivalent_lambdas(random_ensemble())
            assert merge_equivalent_lambdas(merged) == merged


class TestInducedJoint:
    def test_values_agree(self, random_ensemble):
        for _ in range(50):
            e = random_ensemble()
            joint = induced_joint(e)
            assert ch_value(joint) == pytest.approx(ensemble_bell_value(e), abs=1e-12)
            assert chsh_value(joint) == pytest.approx(
                ensemble_bell_value(e, Functional.CHSH), abs=1e-12
            )

    def test_zero_probability_setting(self):
        e = LhvEnsemble((LhvAtom(1.0, InputConditional((1.0, 0.0, 0.0, 0.0)), S1111),))
        with pytest.raises(ValidationError, match="zero probability"):
            induced_joint(e)


class TestSymmetrize:
    def test_no_signaling(self, general_attack):
        sym = symmetrize(general_attack)
        assert len(sym) == 2 * len(general_attack)
        assert is_no_signaling(induced_joint(sym), tol=1e-12)[0]

    def test_chsh_preserved(self, general_attack):
        before = ensemble_bell_value(general_attack, Functional.CHSH)
        after = ensemble_bell_value(symmetrize(general_attack), Functional.CHSH)
        assert after == pytest.approx(before, abs=1e-12)

    def test_ch_follows_chsh(self, general_attack):
        sym = symmetrize(general_attack)
        chsh = ensemble_bell_value(sym, Functional.CHSH)
        assert ensemble_bell_value(sym) == pytest.approx((chsh - 2) / 4, abs=1e-12)
