"""
Tests for data models
"""

from dataclasses import fields

import numpy as np
import pytest

from bellrand.errors import ValidationError
from bellrand.models import (
    CONDITIONS,
    GENERAL,
    NS_FACTORIZABLE,
    Certificate,
    ConditionFlags,
    DeterministicStrategy,
    FactorizedInputConditional,
    Functional,
    InputConditional,
    JointConditional,
    LhvAtom,
    LhvEnsemble,
    RandomnessBounds,
    SimConfig,
    SweepMode,
    SweepSpec,
    TrialCounts,
    ValidationReport,
)


# =============================================================================
# JointConditional
# =============================================================================


class TestJointConditional:
    def test_uniform_table(self):
        dist = JointConditional(np.full((2, 2, 2, 2), 0.25))
        assert dist.p(0, 1, 1, 0) == 0.25
        assert dist[1, 1, 0, 0] == 0.25

    def test_wrong_shape(self):
        with pytest.raises(ValidationError, match="shape"):
            JointConditional(np.full((2, 2, 2), 0.25))

    def test_normalization_names_setting(self):
        table = np.full((2, 2, 2, 2), 0.25)
        table[0, 0, 1, 0] = 0.5
        with pytest.raises(ValidationError, match=r"setting \(1,0\)"):
            JointConditional(table)

    def test_table_read_only(self):
        dist = JointConditional(np.full((2, 2, 2, 2), 0.25))
        with pytest.raises(ValueError):
            dist.table[0, 0, 0, 0] = 1.0

    def test_dict_form(self):
        dist = JointConditional.from_function(lambda a, b, x, y: 0.5 if a == b else 0.0)
        data = dist.to_dict()
        assert data["p"]["0,0,1,1"] == 0.5
        assert np.array_equal(JointConditional.from_dict(data).table, dist.table)

    def test_dict_missing_entry(self):
        data = {"p": {"0,0,0,0": 1.0}}
        with pytest.raises(ValidationError, match="all 16"):
            JointConditional.from_dict(data)


class TestTrialCounts:
    def test_consistent(self):
        counts = TrialCounts(40, (10, 10, 10, 10), (5, 5, 5, 0), 10, 10, 20, 20)
        assert counts.n_setting == (10, 10, 10, 10)

    def test_setting_sum(self):
        with pytest.raises(ValidationError, match="expected N"):
            TrialCounts(41, (10, 10, 10, 10), (0, 0, 0, 0), 0, 0, 20, 20)

    def test_coincidence_exceeds_setting(self):
        with pytest.raises(ValidationError, match=r"C_AB\(1,1\)"):
            TrialCounts(40, (10, 10, 10, 10), (0, 0, 0, 11), 0, 0, 20, 20)

    def test_from_dict_missing_field(self):
        with pytest.raises(ValidationError, match="n_a0"):
            TrialCounts.from_dict(
                {
                    "n_total": 4,
                    "n_setting": [1, 1, 1, 1],
                    "coincidences": [0, 0, 0, 0],
                    "singles_a": 0,
                    "singles_b": 0,
                    "n_b0": 2,
                }
            )


class TestFunctional:
    def test_definitions(self):
        assert Functional("ch").definition.classical_bound == 0.0
        assert Functional.CHSH.definition.classical_bound == 2.0
        assert Functional.CHSH.definition.quantum_bound == pytest.approx(2 * np.sqrt(2))

    def test_fields(self):
        """A functional is its coefficients and bounds, nothing else"""
        names = [f.name for f in fields(Functional.CH.definition)]
        assert names == ["name", "coefficients", "classical_bound", "quantum_bound"]


# =============================================================================
# Inputs and strategies
# =============================================================================


class TestInputConditional:
    def test_uniform(self):
        ic = InputConditional.uniform()
        assert ic.p == (0.25, 0.25, 0.25, 0.25)
        assert ic.setting(1, 0) == 0.25

    def test_not_normalized(self):
        with pytest.raises(ValidationError, match="sums to"):
            InputConditional((0.5, 0.5, 0.5, 0.0))

    def test_negative_entry(self):
        with pytest.raises(ValidationError, match="p_3"):
            InputConditional((0.5, 0.5, 0.1, -0.1))

    def test_factorized_products(self):
        ic = FactorizedInputConditional(0.4, 0.5)
        assert ic.p == pytest.approx((0.2, 0.2, 0.3, 0.3))
        assert ic.to_input().p == pytest.approx(ic.p)
        assert ic.to_json() == {"alpha": 0.4, "beta": 0.5}

    def test_factorized_range(self):
        with pytest.raises(ValidationError, match="alpha"):
            FactorizedInputConditional(1.5, 0.5)


class TestDeterministicStrategy:
    def test_index_inverse(self):
        for i in range(16):
            assert DeterministicStrategy.from_index(i).index == i

    def test_index_order(self):
        assert DeterministicStrategy(1, 0, 1, 1).index == 11

    def test_outputs(self):
        s = DeterministicStrategy(1, 0, 0, 1)
        assert (s.output_a(0), s.output_a(1)) == (0, 1)
        assert (s.output_b(0), s.output_b(1)) == (1, 0)

    def test_complement_involution(self):
        s = DeterministicStrategy(1, 0, 1, 1)
        assert s.complement() == DeterministicStrategy(0, 1, 0, 0)
        assert s.complement().complement() == s

    def test_bad_bit(self):
        with pytest.raises(ValidationError, match="b0"):
            DeterministicStrategy(1, 0, 2, 1)

    def test_bool_rejected(self):
        with pytest.raises(ValidationError):
            DeterministicStrategy(True, 0, 0, 0)

    def test_from_bits_length(self):
        with pytest.raises(ValidationError, match="4 bits"):
            DeterministicStrategy.from_bits([1, 0, 1])


# =============================================================================
# Ensembles
# =============================================================================


class TestLhvEnsemble:
    def test_empty(self):
        with pytest.raises(ValidationError, match="at least one atom"):
            LhvEnsemble(())

    def test_moments(self, uniform_ensemble):
        assert uniform_ensemble.moments() == pytest.approx([0.25] * 4)

    def test_dict_preserves_atoms(self, general_attack):
        restored = LhvEnsemble.from_dict(general_attack.to_dict())
        assert restored == general_attack
        assert restored.extras["condition"] == "general"

    def test_factorized_atom_json(self):
        atom = LhvAtom(1.0, FactorizedInputConditional(0.5, 0.5), DeterministicStrategy(1, 1, 1, 1))
        data = LhvEnsemble((atom,)).to_dict()
        assert data["atoms"][0]["p"] == {"alpha": 0.5, "beta": 0.5}
        assert LhvEnsemble.from_dict(data).is_factorized

    def test_missing_atoms(self):
        with pytest.raises(ValidationError, match="'atoms' list"):
            LhvEnsemble.from_dict({"atom": []})

    def test_atom_error_names_index(self):
        data = {
            "atoms": [
                {"q": 0.5, "p": [0.25] * 4, "s": [1, 1, 1, 1]},
                {"q": 0.5, "p": [0.25] * 4},
            ]
        }
        with pytest.raises(ValidationError, match="atom 1.*'s'"):
            LhvEnsemble.from_dict(data)

    def test_with_meta(self, uniform_ensemble):
        tagged = uniform_ensemble.with_meta("analytic", P=0.3)
        assert tagged.label == "analytic"
        assert tagged.extras == {"P": 0.3}
        assert uniform_ensemble.extras == {}


class TestRandomnessBounds:
    def test_q_above_quarter(self):
        with pytest.raises(ValidationError, match="Q exceeds 1/4"):
            RandomnessBounds(0.2, 0.3)

    def test_p_below_quarter(self):
        with pytest.raises(ValidationError, match="P is below 1/4"):
            RandomnessBounds(0.2, 0.1)

    def test_from_delta(self):
        rb = RandomnessBounds.from_delta(0.1)
        assert rb.P == pytest.approx(0.35)
        assert rb.Q == pytest.approx(0.15)
        assert rb.to_dict()["delta"] == 0.1

    def test_delta_range(self):
        with pytest.raises(ValidationError, match="delta"):
            RandomnessBounds.from_delta(0.3)

    def test_clamped(self):
        rb = RandomnessBounds(0.9, 0.2)
        assert rb.is_clamped
        assert rb.effective_p == pytest.approx(0.4)

    def test_degenerate(self):
        assert RandomnessBounds(0.25, 0.25).is_degenerate
        assert not RandomnessBounds(0.3, 0.2).is_degenerate


# =============================================================================
# Results and configuration
# =============================================================================


class TestConditionFlags:
    def test_names(self):
        for name, flags in CONDITIONS.items():
            assert flags.name == name
            assert ConditionFlags.from_name(name) is flags

    def test_flags(self):
        assert NS_FACTORIZABLE.no_signaling and NS_FACTORIZABLE.factorizable
        assert str(GENERAL) == "general"

    def test_unknown(self):
        with pytest.raises(ValidationError, match="unknown condition"):
            ConditionFlags.from_name("quantum")


class TestResults:
    def test_certificate_dict(self):
        assert Certificate.exact().to_dict() == {"kind": "exact"}
        grid = Certificate.grid(512, 8 / 512).to_dict()
        assert grid["resolution"] == 512
        assert grid["error_bound"] == pytest.approx(0.015625)

    def test_report(self):
        report = ValidationReport()
        assert report.ok
        report.add("averaging", 0.01, setting=2)
        assert not report
        assert report.constraints() == ["averaging"]
        assert str(report.violations[0]) == "averaging (setting 2): off by 0.01"

    def test_sim_config(self, uniform_ensemble):
        with pytest.raises(ValidationError, match="at least 1"):
            SimConfig(n_trials=0, seed=1, ensemble=uniform_ensemble)


class TestSweepSpec:
    def test_ranges_normalized(self):
        spec = SweepSpec((GENERAL,), p_range=(0.25, 0.5, 0.05), q_range=(0, 0.2, 0.05))
        assert spec.q_range == (0.0, 0.2, 0.05)

    def test_needs_condition(self):
        with pytest.raises(ValidationError, match="at least one condition"):
            SweepSpec((), mode=SweepMode.DELTA, delta_range=(0, 0.25, 0.05))

    def test_step_positive(self):
        with pytest.raises(ValidationError, match="step"):
            SweepSpec((GENERAL,), mode=SweepMode.DELTA, delta_range=(0, 0.25, 0))

    def test_mode_requirements(self):
        with pytest.raises(ValidationError, match="both P and Q"):
            SweepSpec((GENERAL,), p_range=(0.25, 0.5, 0.05))
        with pytest.raises(ValidationError, match="Q range"):
            SweepSpec((GENERAL,), mode=SweepMode.CRITICAL)
