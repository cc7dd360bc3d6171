import pytest

from fuzzcare.kb import DiagnosisReport, bundled_cohort, evaluate_crisp, load_default_kb
from fuzzcare.session import DiagnosisSession, InvalidTransition


@pytest.fixture(scope="module")
def report():
    kb = load_default_kb()
    return evaluate_crisp(kb.rule_base, kb, bundled_cohort()[0].record)


def full_record_fields():
    return dict(
        ecg=1.2, chest_pain=1.1, blood_sugar=96.0, cholesterol=160.0,
        blood_pressure=110.0, age=33.0, heart_rate=131.0,
    )


def test_result_starts_false():
    s = DiagnosisSession(id="s1")
    assert s.state == "Init"
    assert s.result is False


def test_happy_path_flips_result_only_at_recommended(report):
    s = DiagnosisSession(id="s1")
    for name, value in full_record_fields().items():
        s.collect(name, value)
        assert s.result is False
    s.record()
    s.mark_diagnosed()
    assert s.result is False
    s.mark_recommended(report)
    assert s.result is True
    assert s.state == "Recommended"
    s.close()
    assert s.state == "Closed"


def test_record_requires_all_seven():
    s = DiagnosisSession(id="s1")
    s.collect("ecg", 1.0)
    with pytest.raises(InvalidTransition) as e:
        s.record()
    assert "missing" in str(e.value)


def test_no_backward_transitions(report):
    s = DiagnosisSession(id="s1")
    for name, value in full_record_fields().items():
        s.collect(name, value)
    s.mark_diagnosed()
    with pytest.raises(InvalidTransition):
        s.collect("ecg", 2.0)
    s.mark_recommended(report)
    with pytest.raises(InvalidTransition):
        s.mark_diagnosed()
    s.close()
    with pytest.raises(InvalidTransition):
        s.close()


def test_cannot_recommend_before_diagnosis(report):
    s = DiagnosisSession(id="s1")
    s.collect("ecg", 1.0)
    with pytest.raises(InvalidTransition):
        s.mark_recommended(report)
    assert s.result is False
