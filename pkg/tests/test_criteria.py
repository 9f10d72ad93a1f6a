import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from regcheck.criteria import (
    COMPLIANT,
    NOT_APPLICABLE,
    VIOLATED,
    evaluate_rule,
    load_requirements,
    load_requirements_file,
    load_rules,
    load_rules_file,
    parse_rule,
)
from regcheck.errors import (
    DuplicateId,
    InvalidRequirement,
    ParseError,
    UnknownConcept,
)


class TestLoadRequirements:
    def test_fixture_requirement_six_roles(self, fixtures):
        reqs = load_requirements_file(fixtures / "requirements.json")
        assert len(reqs) == 1
        assert reqs[0].req_id == "r1"
        assert len(reqs[0].frame.roles) == 6

    def test_zero_roles_rejected(self):
        payload = json.dumps([{"req_id": "r9", "text": "x", "frame": []}])
        with pytest.raises(InvalidRequirement):
            load_requirements(payload)

    def test_duplicate_id_rejected(self):
        item = {"req_id": "r1", "text": "x", "frame": [{"label": "action", "text": "act"}]}
        with pytest.raises(DuplicateId):
            load_requirements(json.dumps([item, item]))

    def test_source_ref_preserved(self, fixtures):
        reqs = load_requirements_file(fixtures / "requirements.json")
        assert "33" in reqs[0].source_ref


class TestParseRule:
    def test_breach_notification_rule(self):
        rule = parse_rule("IF DataBreach.Risk_to_natural_person THEN Notification.Early")
        assert rule.precondition.atoms() == {"DataBreach.Risk_to_natural_person"}
        assert rule.postcondition == ("Notification.Early",)

    def test_late_reasons_rule(self):
        rule = parse_rule("IF Notification.Late THEN Reasons.Delay")
        assert rule.postcondition == ("Reasons.Delay",)

    def test_empty_precondition_rejected(self):
        with pytest.raises(ParseError):
            parse_rule("IF THEN X")

    def test_missing_then_rejected(self):
        with pytest.raises(ParseError):
            parse_rule("IF A B")

    def test_empty_postcondition_rejected(self):
        with pytest.raises(ParseError):
            parse_rule("IF A THEN")

    def test_boolean_operators_and_parens(self):
        rule = parse_rule("IF (A AND NOT B) OR C THEN D, E")
        assert rule.precondition.evaluate({"C"})
        assert rule.precondition.evaluate({"A"})
        assert not rule.precondition.evaluate({"A", "B"})
        assert rule.postcondition == ("D", "E")

    def test_keywords_case_insensitive(self):
        rule = parse_rule("if A and B then C")
        assert rule.precondition.evaluate({"A", "B"})

    def test_explicit_rule_id(self):
        rule = parse_rule("my-rule: IF A THEN B")
        assert rule.rule_id == "my-rule"

    def test_parse_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            parse_rule("IF A THEN )", line=4)
        assert err.value.line == 4
        assert err.value.column > 0


class TestLoadRules:
    def test_fixture_rules(self, fixtures):
        rules = load_rules_file(fixtures / "rules.txt")
        assert [r.rule_id for r in rules] == ["breach-notify", "late-reasons"]

    def test_comments_and_blanks_skipped(self):
        rules = load_rules("# heading\n\nIF A THEN B\n")
        assert len(rules) == 1

    def test_strict_mode_unknown_atom(self, fixtures):
        from regcheck.classify import load_concept_model_file

        model = load_concept_model_file(fixtures / "concepts.json")
        with pytest.raises(UnknownConcept):
            load_rules("IF NotDeclared THEN RightToRemove", model)

    def test_strict_mode_accepts_fixture(self, fixtures):
        from regcheck.classify import load_concept_model_file

        model = load_concept_model_file(fixtures / "concepts.json")
        rules = load_rules_file(fixtures / "rules.txt", model)
        assert len(rules) == 2

    def test_duplicate_rule_ids_rejected(self):
        with pytest.raises(DuplicateId):
            load_rules("x: IF A THEN B\nx: IF C THEN D\n")


class TestEvaluateRule:
    @pytest.fixture()
    def rules(self, fixtures):
        by_id = {r.rule_id: r for r in load_rules_file(fixtures / "rules.txt")}
        return by_id["breach-notify"], by_id["late-reasons"]

    def test_triggered_and_unmet_is_violated(self, rules):
        breach_notify, _ = rules
        verdict = evaluate_rule(breach_notify, {"DataBreach.Risk_to_natural_person"})
        assert verdict.status == VIOLATED
        assert verdict.missing_atoms == ("Notification.Early",)

    def test_triggered_and_met_is_compliant(self, rules):
        breach_notify, _ = rules
        verdict = evaluate_rule(
            breach_notify, {"DataBreach.Risk_to_natural_person", "Notification.Early"}
        )
        assert verdict.status == COMPLIANT
        assert verdict.missing_atoms == ()

    def test_untriggered_is_not_applicable(self, rules):
        _, late_reasons = rules
        verdict = evaluate_rule(late_reasons, set())
        assert verdict.status == NOT_APPLICABLE

    def test_pure_function(self, rules):
        breach_notify, _ = rules
        facts = {"DataBreach.Risk_to_natural_person"}
        assert evaluate_rule(breach_notify, facts) == evaluate_rule(breach_notify, facts)


atoms = st.sampled_from(["A", "B", "C", "D"])


@st.composite
def negation_free_rules(draw):
    n = draw(st.integers(min_value=1, max_value=3))
    pre_atoms = draw(st.lists(atoms, min_size=1, max_size=3))
    op = draw(st.sampled_from(["AND", "OR"]))
    pre = f" {op} ".join(pre_atoms)
    post = ", ".join(draw(st.lists(atoms, min_size=1, max_size=n)))
    return parse_rule(f"IF {pre} THEN {post}")


class TestRuleProperties:
    @given(
        negation_free_rules(),
        st.sets(atoms, max_size=4),
        st.sets(atoms, max_size=4),
    )
    def test_adding_facts_never_flips_compliant_to_violated(self, rule, facts, extra):
        before = evaluate_rule(rule, facts)
        after = evaluate_rule(rule, facts | extra)
        if before.status == COMPLIANT:
            assert after.status != VIOLATED

    @given(negation_free_rules(), st.sets(atoms, max_size=4))
    def test_not_applicable_iff_precondition_false(self, rule, facts):
        verdict = evaluate_rule(rule, facts)
        assert (verdict.status == NOT_APPLICABLE) == (not rule.precondition.evaluate(facts))
        if verdict.status == NOT_APPLICABLE:
            assert verdict.missing_atoms == ()
